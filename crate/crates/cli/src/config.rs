//! Campaign configuration: a flat `key = value` text format with dotted
//! keys, `#` comments and blank lines. Parsing collects every violation
//! instead of stopping at the first.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rmbo_core::policy::Setting;

/// Which benchmark problem the campaign runs on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSpec {
    Syn2d,
    Syn4d,
    Syn6d,
    Carrier(PathBuf),
    Custom(PathBuf),
}

impl ProblemSpec {
    pub fn token(&self) -> &'static str {
        match self {
            ProblemSpec::Syn2d => "syn2d",
            ProblemSpec::Syn4d => "syn4d",
            ProblemSpec::Syn6d => "syn6d",
            ProblemSpec::Carrier(_) => "carrier",
            ProblemSpec::Custom(_) => "custom",
        }
    }
}

/// Which robustness measure the campaign optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureChoice {
    /// Expectation over the environment distribution.
    Exp,
    /// Probability of exceeding the threshold h.
    Ptr,
    /// Expectation minus α times the mean absolute deviation.
    ExpMae,
}

impl MeasureChoice {
    pub fn token(&self) -> &'static str {
        match self {
            MeasureChoice::Exp => "exp",
            MeasureChoice::Ptr => "ptr",
            MeasureChoice::ExpMae => "exp-mae",
        }
    }
}

/// An acquisition strategy selectable in a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Random,
    Us,
    Bq,
    BptUcb { fixed: bool },
    Bbbmobo { fixed: bool },
    Proposed { fixed: bool },
}

impl StrategyKind {
    pub fn token(&self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Us => "us",
            StrategyKind::Bq => "bq",
            StrategyKind::BptUcb { fixed: false } => "bpt-ucb",
            StrategyKind::BptUcb { fixed: true } => "bpt-ucb-fixed",
            StrategyKind::Bbbmobo { fixed: false } => "bbbmobo",
            StrategyKind::Bbbmobo { fixed: true } => "bbbmobo-fixed",
            StrategyKind::Proposed { fixed: false } => "proposed",
            StrategyKind::Proposed { fixed: true } => "proposed-fixed",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "random" => StrategyKind::Random,
            "us" => StrategyKind::Us,
            "bq" => StrategyKind::Bq,
            "bpt-ucb" => StrategyKind::BptUcb { fixed: false },
            "bpt-ucb-fixed" => StrategyKind::BptUcb { fixed: true },
            "bbbmobo" => StrategyKind::Bbbmobo { fixed: false },
            "bbbmobo-fixed" => StrategyKind::Bbbmobo { fixed: true },
            "proposed" => StrategyKind::Proposed { fixed: false },
            "proposed-fixed" => StrategyKind::Proposed { fixed: true },
            _ => return None,
        })
    }
}

/// How the best historical estimate is tracked during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HatTConfig {
    Off,
    Exact,
    MonteCarlo { samples: usize },
}

/// A fully validated campaign description.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub problem: ProblemSpec,
    pub measure: MeasureChoice,
    /// Exceedance threshold; defaults per problem. Used by the PTR measure
    /// and by the BPT-UCB strategies on any measure.
    pub threshold: f64,
    /// Deviation weight for the exp-mae measure; defaults per problem.
    pub mae_weight: f64,
    pub setting: Setting,
    pub strategies: Vec<StrategyKind>,
    pub iterations: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub bound_check: bool,
    pub hat_t: HatTConfig,
    /// Optional override of the surrogate noise variance.
    pub noise_var: Option<f64>,
    /// BPT-UCB scale constant; defaults to 1 (2 for the carrier problem).
    pub bpt_c: f64,
    /// Non-fatal notes produced while parsing (e.g. defaulted seed).
    pub warnings: Vec<String>,
}

/// All violations found in a config file.
#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[&str] = &[
    "problem",
    "problem.path",
    "measure",
    "measure.h",
    "measure.alpha",
    "setting",
    "strategies",
    "iterations",
    "repetitions",
    "seed",
    "output",
    "bound_check",
    "hat_t",
    "hat_t.samples",
    "noise_var",
    "bpt.c",
];

/// Default (threshold, mae-weight) pairs per problem.
fn measure_defaults(problem: &ProblemSpec) -> (f64, f64) {
    match problem {
        ProblemSpec::Syn2d => (0.5, 1.0),
        ProblemSpec::Syn4d => (0.18, 4.0),
        ProblemSpec::Syn6d => (2.0, 8.0),
        ProblemSpec::Carrier(_) => (2.9, 4.0),
        ProblemSpec::Custom(_) => (0.0, 1.0),
    }
}

pub fn parse_config_text(text: &str) -> Result<CampaignConfig, ConfigError> {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            violations.push(format!("line {line}: expected `key = value`, found {stripped:?}"));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            violations.push(format!("line {line}: unknown key {key:?}"));
            continue;
        }
        if let Some((prev, _)) = map.insert(key.clone(), (line, value)) {
            warnings.push(format!(
                "key {key:?} on line {line} overrides the value from line {prev}"
            ));
        }
    }

    let get = |key: &str| map.get(key).map(|(_, v)| v.clone());

    let problem = match get("problem").as_deref() {
        Some("syn2d") => Some(ProblemSpec::Syn2d),
        Some("syn4d") => Some(ProblemSpec::Syn4d),
        Some("syn6d") => Some(ProblemSpec::Syn6d),
        Some(p @ ("carrier" | "custom")) => match get("problem.path") {
            Some(path) if !path.is_empty() => Some(if p == "carrier" {
                ProblemSpec::Carrier(PathBuf::from(path))
            } else {
                ProblemSpec::Custom(PathBuf::from(path))
            }),
            _ => {
                violations.push(format!("problem = {p} requires problem.path"));
                None
            }
        },
        Some(other) => {
            violations.push(format!(
                "unknown problem {other:?} (expected syn2d, syn4d, syn6d, carrier or custom)"
            ));
            None
        }
        None => {
            violations.push("missing required key \"problem\"".into());
            None
        }
    };
    if matches!(problem, Some(ProblemSpec::Syn2d | ProblemSpec::Syn4d | ProblemSpec::Syn6d))
        && map.contains_key("problem.path")
    {
        warnings.push("problem.path is ignored for synthetic problems".into());
    }

    let measure = match get("measure").as_deref() {
        Some("exp") | None => MeasureChoice::Exp,
        Some("ptr") => MeasureChoice::Ptr,
        Some("exp-mae") => MeasureChoice::ExpMae,
        Some(other) => {
            violations.push(format!(
                "unknown measure {other:?} (expected exp, ptr or exp-mae)"
            ));
            MeasureChoice::Exp
        }
    };
    if get("measure").is_none() {
        warnings.push("measure defaults to exp".into());
    }

    let (default_h, default_alpha) = problem
        .as_ref()
        .map(measure_defaults)
        .unwrap_or((0.0, 1.0));
    let parse_f64 = |key: &str, value: Option<String>, violations: &mut Vec<String>| -> Option<f64> {
        value.and_then(|v| match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                violations.push(format!("{key} must be a finite number, got {v:?}"));
                None
            }
        })
    };
    let threshold =
        parse_f64("measure.h", get("measure.h"), &mut violations).unwrap_or(default_h);
    let mae_weight =
        parse_f64("measure.alpha", get("measure.alpha"), &mut violations).unwrap_or(default_alpha);
    if mae_weight < 0.0 {
        violations.push(format!("measure.alpha must be non-negative, got {mae_weight}"));
    }

    let setting = match get("setting").as_deref() {
        Some("simulator") | None => Setting::Simulator,
        Some("uncontrollable") => Setting::Uncontrollable,
        Some(other) => {
            violations.push(format!(
                "unknown setting {other:?} (expected simulator or uncontrollable)"
            ));
            Setting::Simulator
        }
    };

    let mut strategies = Vec::new();
    match get("strategies") {
        Some(list) => {
            for token in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match StrategyKind::parse(token) {
                    Some(s) => {
                        if strategies.contains(&s) {
                            warnings.push(format!("strategy {token:?} listed twice"));
                        } else {
                            strategies.push(s);
                        }
                    }
                    None => violations.push(format!("unknown strategy {token:?}")),
                }
            }
            if strategies.is_empty() && violations.is_empty() {
                violations.push("strategies list is empty".into());
            }
        }
        None => violations.push("missing required key \"strategies\"".into()),
    }
    if strategies.contains(&StrategyKind::Bq) && measure != MeasureChoice::Exp {
        violations.push("strategy bq is only defined for measure = exp".into());
    }

    let parse_usize = |key: &str, value: Option<String>, violations: &mut Vec<String>| {
        value.and_then(|v| match v.parse::<usize>() {
            Ok(x) => Some(x),
            Err(_) => {
                violations.push(format!("{key} must be a non-negative integer, got {v:?}"));
                None
            }
        })
    };
    let iterations = parse_usize("iterations", get("iterations"), &mut violations);
    match iterations {
        Some(0) => violations.push("iterations must be at least 1".into()),
        None if !map.contains_key("iterations") => {
            violations.push("missing required key \"iterations\"".into())
        }
        _ => {}
    }
    let repetitions = parse_usize("repetitions", get("repetitions"), &mut violations);
    match repetitions {
        Some(0) => violations.push("repetitions must be at least 1".into()),
        None if !map.contains_key("repetitions") => {
            violations.push("missing required key \"repetitions\"".into())
        }
        _ => {}
    }

    let seed = match get("seed") {
        Some(v) => match v.parse::<u64>() {
            Ok(s) => s,
            Err(_) => {
                violations.push(format!("seed must be a 64-bit unsigned integer, got {v:?}"));
                0
            }
        },
        None => {
            warnings.push("seed defaults to 0".into());
            0
        }
    };

    let output = PathBuf::from(get("output").unwrap_or_else(|| "out".into()));

    let bound_check = match get("bound_check").as_deref() {
        Some("true") => true,
        Some("false") | None => false,
        Some(other) => {
            violations.push(format!("bound_check must be true or false, got {other:?}"));
            false
        }
    };

    let hat_t = match get("hat_t").as_deref() {
        Some("off") | None => HatTConfig::Off,
        Some("exact") => {
            if measure != MeasureChoice::Exp {
                violations.push("hat_t = exact is only defined for measure = exp".into());
            }
            HatTConfig::Exact
        }
        Some("mc") => {
            let samples = parse_usize("hat_t.samples", get("hat_t.samples"), &mut violations)
                .unwrap_or(256);
            if samples == 0 {
                violations.push("hat_t.samples must be at least 1".into());
            }
            HatTConfig::MonteCarlo { samples }
        }
        Some(other) => {
            violations.push(format!("hat_t must be off, exact or mc, got {other:?}"));
            HatTConfig::Off
        }
    };

    let noise_var = parse_f64("noise_var", get("noise_var"), &mut violations);
    if let Some(nv) = noise_var {
        if nv <= 0.0 {
            violations.push(format!("noise_var must be positive, got {nv}"));
        }
    }

    let bpt_c = parse_f64("bpt.c", get("bpt.c"), &mut violations).unwrap_or(
        if matches!(problem, Some(ProblemSpec::Carrier(_))) {
            2.0
        } else {
            1.0
        },
    );

    if !violations.is_empty() {
        return Err(ConfigError(violations));
    }
    Ok(CampaignConfig {
        problem: problem.expect("validated"),
        measure,
        threshold,
        mae_weight,
        setting,
        strategies,
        iterations: iterations.expect("validated"),
        repetitions: repetitions.expect("validated"),
        seed,
        output,
        bound_check,
        hat_t,
        noise_var,
        bpt_c,
        warnings,
    })
}

pub fn parse_config(path: &Path) -> Result<CampaignConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_text(&text)
}
