//! TOML run configuration. Every key is optional; command line flags
//! override the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skewprobit::inference::{FitOptions, McmcOptions};
use skewprobit::models::{InterceptMode, Model, ModelKind, NormalPrior, PrecisionPrior, PriorConfig, QPrior};
use skewprobit::simstudy::SkewPriorSpec;

use crate::error::{CliError, Result};
use crate::formula::Formula;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelKind>,
    pub intercept: Option<InterceptMode>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub data: DataConfig,
    pub formula: Option<Formula>,
    #[serde(default)]
    pub priors: PriorsConfig,
    #[serde(default)]
    pub inference: InferenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub dataset: Option<String>,
    pub path: Option<PathBuf>,
    pub heart_source: Option<String>,
    pub verify_checksum: Option<bool>,
    pub wines: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorsConfig {
    /// `pc:THETA` or `gaussian:MEAN:VARIANCE`.
    pub skew: Option<String>,
    pub beta_mean: Option<f64>,
    pub beta_precision: Option<f64>,
    /// Per-coefficient overrides keyed by column name.
    #[serde(default)]
    pub beta: BTreeMap<String, NormalPrior>,
    pub q_mu0: Option<f64>,
    pub q_prec0: Option<f64>,
    pub precision_u: Option<f64>,
    pub precision_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    pub chains: Option<usize>,
    pub iterations: Option<usize>,
    pub warmup: Option<usize>,
    pub level: Option<f64>,
    pub evidence: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Priors with defaults for anything unset.
    pub fn prior_config(&self) -> Result<PriorConfig> {
        let p = &self.priors;
        let mut cfg = PriorConfig::default();
        if let Some(s) = &p.skew {
            cfg.skew = s.parse::<SkewPriorSpec>()?.build()?;
        }
        cfg.beta = NormalPrior::new(p.beta_mean.unwrap_or(0.0), p.beta_precision.unwrap_or(DEFAULT_BETA_PRECISION))?;
        for (name, prior) in &p.beta {
            cfg.beta_overrides.insert(name.clone(), NormalPrior::new(prior.mean, prior.precision)?);
        }
        let q = QPrior::default();
        cfg.q = QPrior {
            mu0: p.q_mu0.unwrap_or(q.mu0),
            prec0: p.q_prec0.unwrap_or(q.prec0),
        };
        let t = PrecisionPrior::default();
        cfg.precision = PrecisionPrior {
            u: p.precision_u.unwrap_or(t.u),
            p_u: p.precision_p.unwrap_or(t.p_u),
        };
        if !(cfg.q.prec0 > 0.0 && cfg.precision.u > 0.0 && cfg.precision.p_u > 0.0 && cfg.precision.p_u < 1.0) {
            return Err(CliError::Config("q_prec0 and precision_u must be positive, precision_p in (0, 1)".into()));
        }
        Ok(cfg)
    }

    pub fn model(&self, kind: ModelKind) -> Result<Model> {
        Ok(Model::new(kind, self.prior_config()?).with_intercept(self.intercept.unwrap_or_default()))
    }

    pub fn fit_options(&self) -> Result<FitOptions> {
        let i = &self.inference;
        let d = McmcOptions::default();
        let mcmc = McmcOptions {
            chains: i.chains.unwrap_or(d.chains),
            iterations: i.iterations.unwrap_or(d.iterations),
            warmup: i.warmup.unwrap_or(d.warmup),
            seed: self.seed.unwrap_or(d.seed),
        };
        if mcmc.chains == 0 || mcmc.warmup >= mcmc.iterations {
            return Err(CliError::Config("need at least one chain and warmup below iterations".into()));
        }
        let level = i.level.unwrap_or(0.95);
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Config(format!("level must lie in (0, 1), got {level}")));
        }
        Ok(FitOptions {
            mcmc,
            level,
            evidence: i.evidence.unwrap_or(true),
            ..FitOptions::default()
        })
    }
}

/// Default prior precision for fixed effects.
pub const DEFAULT_BETA_PRECISION: f64 = 0.001;
