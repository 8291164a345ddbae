use std::path::PathBuf;

use seqpd::fock::SuiteOptions;
use seqpd::optimize::Scheme;
use seqpd::{
    make_tmsts, CovarianceMatrix4, DetectorModel, OptimizerConfig, OrderParameter, Party,
    SchemeTag, SettingsQuad, TmstsSpec,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One run of any subcommand. Every field has a default, so `{}` is a valid
/// config (vacuum, Husimi order, perfect detectors, full scheme).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeTag,
    #[serde(default)]
    pub complex_displacements: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<SettingsQuad>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub oracle: SuiteOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

fn default_s() -> f64 {
    -1.0
}

fn one() -> f64 {
    1.0
}

fn default_scheme() -> SchemeTag {
    SchemeTag::FullDispSqueeze
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateConfig {
    Tmsts(TmstsState),
    Explicit(ExplicitState),
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig::Tmsts(TmstsState { nu1: 1.0, nu2: 1.0, r: 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmstsState {
    #[serde(default = "one")]
    pub nu1: f64,
    #[serde(default = "one")]
    pub nu2: f64,
    #[serde(default)]
    pub r: f64,
}

/// Standard-form coefficients `(p, q, m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitState {
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    R(RGrid),
    Eta(EtaGrid),
    Phase(PhaseGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub eta_min: f64,
    pub eta_max: f64,
    pub steps: usize,
}

/// Rectangular `Re α × Im α` grid for the single-mode QPD of `party`
/// measured with compression `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub u: f64,
    #[serde(default = "party_a")]
    pub party: Party,
}

fn party_a() -> Party {
    Party::A
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Command-line overrides; each mirrors a config field.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON config file (`-` reads standard input).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub nu1: Option<f64>,
    #[arg(long)]
    pub nu2: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub scheme: Option<String>,
    /// Seed for the optimizer and the oracle case draw.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Read the config named by `ov.config` (or `{}`) and apply the flags.
    pub fn load(ov: &Overrides) -> Result<Self, CliError> {
        let text = match ov.config.as_deref() {
            None => "{}".to_string(),
            Some(p) if p.as_os_str() == "-" => std::io::read_to_string(std::io::stdin())
                .map_err(|e| CliError::Config(format!("reading standard input: {e}")))?,
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", p.display())))?,
        };
        let mut cfg = Self::parse(&text)?;
        cfg.apply(ov)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) -> Result<(), CliError> {
        if ov.r.is_some() || ov.nu1.is_some() || ov.nu2.is_some() {
            let StateConfig::Tmsts(st) = &mut self.state else {
                return Err(CliError::Config("--r/--nu1/--nu2 need a {nu1, nu2, r} state".into()));
            };
            st.r = ov.r.unwrap_or(st.r);
            st.nu1 = ov.nu1.unwrap_or(st.nu1);
            st.nu2 = ov.nu2.unwrap_or(st.nu2);
        }
        self.s = ov.s.unwrap_or(self.s);
        self.eta = ov.eta.unwrap_or(self.eta);
        if let Some(tag) = &ov.scheme {
            self.scheme = tag.parse().map_err(config_err)?;
        }
        if let Some(seed) = ov.seed {
            self.optimizer.seed = seed;
            self.oracle.seed = seed;
        }
        if let Some(n) = ov.restarts {
            self.optimizer.restarts = n;
        }
        if ov.out.is_some() || ov.format.is_some() {
            let out = self.output.get_or_insert_with(OutputSpec::default);
            out.path = ov.out.clone().or(out.path.take());
            out.format = ov.format.or(out.format);
        }
        Ok(())
    }

    pub fn tmsts(&self) -> Result<TmstsSpec, CliError> {
        match self.state {
            StateConfig::Tmsts(st) => TmstsSpec::new(st.nu1, st.nu2, st.r).map_err(config_err),
            StateConfig::Explicit(_) => {
                Err(CliError::Config("this command needs a {nu1, nu2, r} state".into()))
            }
        }
    }

    pub fn covariance(&self) -> Result<CovarianceMatrix4, CliError> {
        match self.state {
            StateConfig::Tmsts(_) => make_tmsts(self.tmsts()?).map_err(config_err),
            StateConfig::Explicit(e) => {
                CovarianceMatrix4::standard_form(e.p, e.q, e.m, e.n).map_err(config_err)
            }
        }
    }

    pub fn order(&self) -> Result<OrderParameter, CliError> {
        OrderParameter::new(self.s).map_err(config_err)
    }

    pub fn detector(&self) -> Result<DetectorModel, CliError> {
        DetectorModel::new(self.eta).map_err(config_err)
    }

    pub fn scheme(&self) -> Scheme {
        let scheme = Scheme::new(self.scheme);
        if self.complex_displacements {
            scheme.with_complex_displacements()
        } else {
            scheme
        }
    }

    pub fn optimizer(&self) -> Result<&OptimizerConfig, CliError> {
        self.optimizer.validate().map_err(config_err)?;
        Ok(&self.optimizer)
    }

    pub fn settings(&self) -> Result<Option<SettingsQuad>, CliError> {
        if let Some(q) = &self.settings {
            q.validate().map_err(config_err)?;
        }
        Ok(self.settings)
    }

    pub fn format(&self, default: Format) -> Format {
        self.output.as_ref().and_then(|o| o.format).unwrap_or(default)
    }

    pub fn path(&self) -> Option<&std::path::Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    /// Reject a grid on single-point commands.
    pub fn single_point(&self) -> Result<(), CliError> {
        match self.grid {
            None => Ok(()),
            Some(_) => Err(CliError::Config("this command takes a single point, not a grid".into())),
        }
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(name: &str, lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(CliError::Config(format!("{name} grid needs finite bounds with min <= max")));
    }
    match steps {
        0 => Err(CliError::Config(format!("{name} grid needs at least one step"))),
        1 => Ok(vec![lo]),
        n => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
    }
}
