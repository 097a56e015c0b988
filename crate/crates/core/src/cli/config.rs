use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use crate::collectives::{
    Categorical, Collective, Constant, Generator, LabelSet, Oscillating, Periodic, Schedule,
};
use crate::error::Error;
use crate::ghz::Setting;
use crate::randomness::{SelectionSpec, DEFAULT_MIN_LENGTH};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Stabilize,
    Randomness,
    Combine,
    GhzSample,
    Lhv,
    Paradox,
    Resolve,
    Gedanken,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Stabilize,
        Scenario::Randomness,
        Scenario::Combine,
        Scenario::GhzSample,
        Scenario::Lhv,
        Scenario::Paradox,
        Scenario::Resolve,
        Scenario::Gedanken,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Stabilize => "stabilize",
            Scenario::Randomness => "randomness",
            Scenario::Combine => "combine",
            Scenario::GhzSample => "ghz-sample",
            Scenario::Lhv => "lhv",
            Scenario::Paradox => "paradox",
            Scenario::Resolve => "resolve",
            Scenario::Gedanken => "gedanken",
        }
    }

    /// Scenarios that draw `n` samples.
    pub fn samples(self) -> bool {
        matches!(
            self,
            Scenario::Stabilize | Scenario::Randomness | Scenario::Combine | Scenario::GhzSample
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!(
                    "unknown scenario `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "text" => Ok(Self::Text),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!(
                "unknown format `{other}` (expected text, json or csv)"
            )),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Text => "text",
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

/// Label source for the sampling scenarios.
///
/// `bernoulli:P` (labels `a`, `b`), `uniform:M` (labels `1..M`),
/// `oscillating:R` (labels `a`, `b`), `periodic:a/b/…`, `constant:a`.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    Bernoulli(f64),
    Uniform(usize),
    Oscillating(u64),
    Periodic(Vec<String>),
    Constant(String),
}

impl SourceSpec {
    pub fn label_set(&self) -> Result<Arc<LabelSet>, Error> {
        Ok(Arc::new(match self {
            Self::Bernoulli(_) | Self::Oscillating(_) => LabelSet::new(["a", "b"])?,
            Self::Uniform(m) => LabelSet::numeric(*m)?,
            Self::Periodic(cycle) => {
                let mut seen = std::collections::HashSet::new();
                LabelSet::new(cycle.iter().filter(|l| seen.insert(l.as_str())).cloned())?
            }
            Self::Constant(l) => LabelSet::new([l.clone()])?,
        }))
    }

    pub fn generator(&self, set: &LabelSet) -> Result<Arc<dyn Generator>, Error> {
        Ok(match self {
            Self::Bernoulli(p) => Arc::new(Categorical::bernoulli(*p)),
            Self::Uniform(m) => Arc::new(Categorical::uniform(*m)),
            Self::Oscillating(r) => Arc::new(Oscillating::new(*r)),
            Self::Periodic(cycle) => Arc::new(Periodic(
                cycle.iter().map(|l| set.get(l)).collect::<Result<_, _>>()?,
            )),
            Self::Constant(l) => Arc::new(Constant(set.get(l)?)),
        })
    }

    pub fn collective(&self, seed: u64, n: u64) -> Result<Collective, Error> {
        let set = self.label_set()?;
        let g = self.generator(&set)?;
        Collective::generate(set, g, seed, n)
    }

    /// Whether relative frequencies converge for this source.
    pub fn stabilizes(&self) -> bool {
        !matches!(self, Self::Oscillating(_))
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            Self::Uniform(m) => write!(f, "uniform:{m}"),
            Self::Oscillating(r) => write!(f, "oscillating:{r}"),
            Self::Periodic(c) => write!(f, "periodic:{}", c.join("/")),
            Self::Constant(l) => write!(f, "constant:{l}"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("expected kind:argument, got `{s}`"))?;
        let bad = || format!("bad argument in source `{s}`");
        match kind {
            "bernoulli" => {
                let p: f64 = arg.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("bernoulli probability {p} is outside [0, 1]"));
                }
                Ok(Self::Bernoulli(p))
            }
            "uniform" => match arg.parse() {
                Ok(m) if m >= 1 => Ok(Self::Uniform(m)),
                _ => Err(bad()),
            },
            "oscillating" => match arg.parse() {
                Ok(r) if r >= 2 => Ok(Self::Oscillating(r)),
                _ => Err(format!("oscillating ratio must be an integer ≥ 2 in `{s}`")),
            },
            "periodic" => {
                let cycle: Vec<String> = arg.split('/').map(|l| l.trim().to_string()).collect();
                if cycle.iter().any(|l| l.is_empty()) {
                    return Err(bad());
                }
                Ok(Self::Periodic(cycle))
            }
            "constant" if !arg.trim().is_empty() => Ok(Self::Constant(arg.trim().to_string())),
            _ => Err(format!("unknown source `{s}`")),
        }
    }
}

/// How the `combine` scenario builds its pair.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// `x` and `y` drawn from the source under different seeds.
    Independent,
    /// `y = x`.
    Copy,
    /// Photons 1 and 2 of one sampled setting.
    Ghz,
}

impl FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "independent" => Ok(Self::Independent),
            "copy" => Ok(Self::Copy),
            "ghz" => Ok(Self::Ghz),
            other => Err(format!(
                "unknown pairing `{other}` (expected independent, copy or ghz)"
            )),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Independent => "independent",
            Self::Copy => "copy",
            Self::Ghz => "ghz",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub n: u64,
    pub schedule: Schedule,
    /// `c` in `τ(N) = c/√N`.
    pub c: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// `None` picks the scenario's default.
    pub source: Option<SourceSpec>,
    pub pairing: Pairing,
    /// `None` means the three built-in selections.
    pub selections: Option<Vec<SelectionSpec>>,
    pub setting: Option<Setting>,
    pub min_length: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Paradox,
            seed: 0,
            n: 100_000,
            schedule: Schedule::default(),
            c: 5.0,
            format: OutputFormat::Text,
            out: None,
            source: None,
            pairing: Pairing::Independent,
            selections: None,
            setting: None,
            min_length: DEFAULT_MIN_LENGTH,
        }
    }
}

impl ExperimentConfig {
    pub fn source_or_default(&self) -> SourceSpec {
        self.source.clone().unwrap_or(match self.scenario {
            Scenario::Stabilize => SourceSpec::Oscillating(2),
            _ => SourceSpec::Uniform(2),
        })
    }

    pub fn setting_or_default(&self) -> Setting {
        self.setting.unwrap_or(Setting::S1)
    }

    /// Every key with its effective value, sorted by key.
    pub fn echo(&self) -> Value {
        json!({
            "scenario": self.scenario.name(),
            "seed": self.seed,
            "n": self.n,
            "schedule": self.schedule.to_string(),
            "c": self.c,
            "format": self.format.to_string(),
            "out": self.out.as_ref().map(|p| p.display().to_string()),
            "source": self.source_or_default().to_string(),
            "pairing": self.pairing.to_string(),
            "selections": self.selections.as_ref().map(|f| {
                f.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
            }),
            "setting": self.setting_or_default().phases,
            "min_length": self.min_length,
        })
    }
}

pub const KEYS: [&str; 12] = [
    "scenario",
    "seed",
    "n",
    "schedule",
    "c",
    "format",
    "out",
    "source",
    "pairing",
    "selections",
    "setting",
    "min_length",
];

/// A configuration problem, tied to the key that caused it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// `kollektiv <scenario> [--seed u64] [--n u64] [--c real] [--config path]
/// [--format text|json|csv] [--out path]` plus one flag per remaining key.
#[derive(Parser, Debug, Default, Clone)]
#[command(
    name = "kollektiv",
    version,
    about = "Frequency-probability and GHZ scenario runner"
)]
pub struct ConfigFlags {
    /// stabilize, randomness, combine, ghz-sample, lhv, paradox, resolve or gedanken
    pub scenario: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// tolerance coefficient c in c/√N
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// key=value file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// geometric:N0:K or a comma list of checkpoints
    #[arg(long)]
    pub schedule: Option<String>,
    /// bernoulli:P, uniform:M, oscillating:R, periodic:a/b, constant:a
    #[arg(long)]
    pub source: Option<String>,
    /// independent, copy or ghz
    #[arg(long)]
    pub pairing: Option<String>,
    /// ;-separated selections, e.g. "arithmetic(step=2,offset=1); skip_first(n=100)"
    #[arg(long)]
    pub selections: Option<String>,
    /// three phases, e.g. "pi/2,0,0"
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long = "min-length")]
    pub min_length: Option<String>,
}

impl ConfigFlags {
    fn pairs(&self) -> Vec<(&'static str, &String)> {
        [
            ("scenario", &self.scenario),
            ("seed", &self.seed),
            ("n", &self.n),
            ("c", &self.c),
            ("format", &self.format),
            ("out", &self.out),
            ("schedule", &self.schedule),
            ("source", &self.source),
            ("pairing", &self.pairing),
            ("selections", &self.selections),
            ("setting", &self.setting),
            ("min_length", &self.min_length),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError::new(
                format!("line {}", i + 1),
                format!("expected key=value, got `{line}`"),
            )
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(ConfigError::new(k, "unknown key"));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// File values first, then flags on top, then defaults for the rest.
pub fn parse_config(flags: &ConfigFlags) -> Result<ExperimentConfig, ConfigError> {
    let mut map = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags.pairs() {
        map.insert(k.to_string(), v.clone());
    }
    from_map(&map)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn from_map(map: &BTreeMap<String, String>) -> Result<ExperimentConfig, ConfigError> {
    fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        map.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ConfigError::new(key, format!("`{v}`: {e}")))
            })
            .transpose()
    }
    let d = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        scenario: get(map, "scenario")?.unwrap_or(d.scenario),
        seed: get(map, "seed")?.unwrap_or(d.seed),
        n: get(map, "n")?.unwrap_or(d.n),
        schedule: get(map, "schedule")?.unwrap_or(d.schedule),
        c: get(map, "c")?.unwrap_or(d.c),
        format: get(map, "format")?.unwrap_or(d.format),
        out: map.get("out").map(PathBuf::from),
        source: get(map, "source")?,
        pairing: get(map, "pairing")?.unwrap_or(d.pairing),
        selections: map
            .get("selections")
            .map(|v| {
                SelectionSpec::parse_family(v)
                    .map_err(|e| ConfigError::new("selections", e.to_string()))
            })
            .transpose()?,
        setting: get(map, "setting")?,
        min_length: get(map, "min_length")?.unwrap_or(d.min_length),
    };
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(ConfigError::new(
            "c",
            format!("tolerance coefficient must be positive, got {}", cfg.c),
        ));
    }
    if cfg.scenario.samples() && cfg.n == 0 {
        return Err(ConfigError::new(
            "n",
            format!("scenario {} needs n ≥ 1", cfg.scenario),
        ));
    }
    if matches!(cfg.selections.as_deref(), Some([])) {
        return Err(ConfigError::new("selections", "empty selection family"));
    }
    Ok(cfg)
}
