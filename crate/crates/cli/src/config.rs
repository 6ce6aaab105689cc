//! Run configuration: defaults, an optional TOML file and command-line
//! flags, merged in that order.

use std::path::{Path, PathBuf};

use birkhoff_core::fourier::CoeffRule;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MIN_SAMPLES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FiniteLaw,
    LimitLaw,
    Compare,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::FiniteLaw => "finite-law",
            Experiment::LimitLaw => "limit-law",
            Experiment::Compare => "compare",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Constant,
    Truncated,
}

impl From<Rule> for CoeffRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Constant => CoeffRule::Constant,
            Rule::Truncated => CoeffRule::Truncated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub a: f64,
    #[serde(rename = "N")]
    pub n_list: Vec<u64>,
    pub eps: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    /// Not recorded in output metadata, so moving a run does not change
    /// its files.
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
    pub experiment: Experiment,
    pub rule: Rule,
}

/// Keys accepted in a config file, all optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub a: Option<f64>,
    #[serde(rename = "N")]
    pub n_list: Option<Vec<u64>>,
    pub eps: Option<Vec<f64>>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub experiment: Option<Experiment>,
    pub rule: Option<Rule>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `over` win.
    pub fn overridden_by(self, over: PartialConfig) -> Self {
        Self {
            a: over.a.or(self.a),
            n_list: over.n_list.or(self.n_list),
            eps: over.eps.or(self.eps),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            experiment: over.experiment.or(self.experiment),
            rule: over.rule.or(self.rule),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let cfg = RunConfig {
            a: self.a.unwrap_or(0.5),
            n_list: self.n_list.unwrap_or_else(|| vec![1_000, 10_000, 100_000]),
            eps: self.eps.unwrap_or_else(|| vec![0.1, 0.05, 0.02]),
            samples: self.samples.unwrap_or(10_000),
            seed: self.seed.unwrap_or(42),
            out: self.out.unwrap_or_else(|| PathBuf::from(".")),
            format: self.format.unwrap_or(Format::Csv),
            experiment: self.experiment.ok_or_else(|| CliError::Usage("no experiment given".into()))?,
            rule: self.rule.unwrap_or(Rule::Truncated),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        PartialConfig { experiment: Some(experiment), ..Default::default() }.resolve().expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.a > 0.0 && self.a < 1.0) {
            return bad(format!("a = {} outside (0, 1)", self.a));
        }
        if self.n_list.is_empty() || self.eps.is_empty() {
            return bad("N and eps lists must be nonempty".into());
        }
        if self.n_list.contains(&0) {
            return bad("N must be positive".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("eps = {e} outside (0, 1)"));
        }
        if self.samples < MIN_SAMPLES {
            return bad(format!("samples = {} below {MIN_SAMPLES}", self.samples));
        }
        Ok(())
    }
}
