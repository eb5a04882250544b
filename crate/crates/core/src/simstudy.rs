//! Coverage studies for the skewness under simulated skewed probit data.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::inference::{fit, quantile_sorted, FitOptions, McmcOptions};
use crate::link::StandardizedLink;
use crate::models::{Dataset, InterceptMode, Model, ModelKind, NormalPrior, PriorConfig, SkewPrior};
use crate::sn_core::{gamma1_sup, gamma1_to_alpha};

/// Skewness prior as a plain, serializable choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkewPriorSpec {
    Pc { theta: f64 },
    Gaussian { mean: f64, variance: f64 },
}

impl SkewPriorSpec {
    pub fn build(&self) -> Result<SkewPrior> {
        match *self {
            Self::Pc { theta } => SkewPrior::pc(theta),
            Self::Gaussian { mean, variance } => SkewPrior::gaussian(mean, variance),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Pc { .. } => "pc",
            Self::Gaussian { .. } => "gaussian",
        }
    }
}

impl std::str::FromStr for SkewPriorSpec {
    type Err = crate::Error;

    /// `pc:θ` or `gaussian:mean:variance`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| crate::Error::Domain(format!("bad number '{t}' in skew prior '{s}'")))
        };
        let spec = match parts.as_slice() {
            ["pc", t] => Self::Pc { theta: num(t)? },
            ["gaussian", m, v] => Self::Gaussian {
                mean: num(m)?,
                variance: num(v)?,
            },
            _ => return domain(format!("skew prior must be 'pc:THETA' or 'gaussian:MEAN:VAR', got '{s}'")),
        };
        spec.build()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub q: f64,
    pub beta1: f64,
    pub gamma1_true: f64,
    pub n: usize,
    pub n_trials: u64,
    pub n_reps: usize,
    pub skew_prior: SkewPriorSpec,
    pub intercept_mode: InterceptMode,
    pub seed: u64,
    /// Covariate standard deviation (x ~ N(0, 0.5) read as variance 0.5).
    pub x_sd: f64,
    /// Precision of the Normal priors on the fixed effects.
    pub beta_precision: f64,
    pub mcmc: McmcOptions,
    pub level: f64,
}

impl Scenario {
    /// Scenario with the desk-scale defaults (200 replicates, 4×4000
    /// iterations with 2000 warmup).
    pub fn new(name: &str, q: f64, beta1: f64, gamma1_true: f64, n_trials: u64, skew_prior: SkewPriorSpec) -> Self {
        Self {
            name: name.to_string(),
            q,
            beta1,
            gamma1_true,
            n: 200,
            n_trials,
            n_reps: 200,
            skew_prior,
            intercept_mode: InterceptMode::Quantile,
            seed: 20_240_601,
            x_sd: std::f64::consts::FRAC_1_SQRT_2,
            beta_precision: 0.001,
            mcmc: McmcOptions {
                chains: 4,
                iterations: 4_000,
                warmup: 2_000,
                seed: 0,
            },
            level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sup = gamma1_sup::<f64>();
        if !(self.q > 0.0 && self.q < 1.0) {
            return domain(format!("q must lie in (0, 1), got {}", self.q));
        }
        if !(self.gamma1_true.abs() < sup) {
            return domain(format!("true skewness {} outside (−{sup}, {sup})", self.gamma1_true));
        }
        if self.n == 0 || self.n_trials == 0 || self.n_reps == 0 {
            return domain("n, n_trials and n_reps must be positive");
        }
        if !(self.beta1.is_finite() && self.x_sd > 0.0 && self.beta_precision > 0.0) {
            return domain("beta1 must be finite, x_sd and beta_precision positive");
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return domain(format!("level must lie in (0, 1), got {}", self.level));
        }
        self.skew_prior.build()?;
        Ok(())
    }

    /// The model fitted to each replicate.
    pub fn model(&self) -> Result<Model> {
        let priors = PriorConfig {
            skew: self.skew_prior.build()?,
            beta: NormalPrior::new(0.0, self.beta_precision)?,
            ..PriorConfig::default()
        };
        Ok(Model::new(ModelKind::SkewProbit, priors).with_intercept(self.intercept_mode))
    }
}

/// SplitMix64 finalizer, used to derive per-replicate seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rep_seed(seed: u64, rep: usize, salt: u64) -> u64 {
    mix(mix(seed ^ salt).wrapping_add(rep as u64))
}

/// One simulated dataset; a pure function of (scenario, rep_index).
pub fn simulate_dataset(s: &Scenario, rep_index: usize) -> Result<Dataset> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(s.seed, rep_index, 0x5EED));
    let link = StandardizedLink::new(gamma1_to_alpha(s.gamma1_true)?)?;
    let beta0 = link.quantile_intercept(s.q)?;
    let normal = Normal::new(0.0, s.x_sd).expect("positive sd");
    let x: Vec<f64> = (0..s.n).map(|_| normal.sample(&mut rng)).collect();
    let mut y = Vec::with_capacity(s.n);
    for &xi in &x {
        let p = link.cdf(beta0 + s.beta1 * xi).clamp(0.0, 1.0);
        let draw = Binomial::new(s.n_trials, p).expect("valid binomial");
        y.push(draw.sample(&mut rng) as f64);
    }
    Dataset::binomial(
        y,
        vec![s.n_trials as f64; s.n],
        DMatrix::from_vec(s.n, 1, x),
        vec!["x".to_string()],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub rep: usize,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: Scenario,
    /// Percentage of successful replicates whose interval covers the truth.
    pub cp: f64,
    /// Median interval length.
    pub mlci: f64,
    /// Median of the interval endpoints and of the estimates.
    pub median_lo: f64,
    pub median_hi: f64,
    pub median_estimate: f64,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<ReplicateFailure>,
}

impl CoverageReport {
    pub fn failure_rate(&self) -> f64 {
        let total = self.records.len() + self.failures.len();
        self.failures.len() as f64 / total.max(1) as f64
    }

    /// Median of |estimate|.
    pub fn median_abs_estimate(&self) -> f64 {
        median(self.records.iter().map(|r| r.estimate.abs()).collect())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Fits one replicate and returns the posterior mean and interval of γ₁.
pub fn run_replicate(s: &Scenario, rep: usize) -> Result<ReplicateRecord> {
    let data = simulate_dataset(s, rep)?;
    let model = s.model()?;
    let opts = FitOptions {
        mcmc: McmcOptions {
            seed: rep_seed(s.seed, rep, 0x3C3C),
            ..s.mcmc
        },
        evidence: false,
        level: s.level,
        ..FitOptions::default()
    };
    let r = fit(&model, &data, &opts)?;
    let g = r.summary("gamma1").expect("skewness summary");
    Ok(ReplicateRecord {
        rep,
        estimate: g.mean,
        lo: g.lo,
        hi: g.hi,
        covered: g.lo <= s.gamma1_true && s.gamma1_true <= g.hi,
    })
}

/// Runs all replicates (in parallel) and aggregates coverage.
pub fn run_scenario(s: &Scenario) -> Result<CoverageReport> {
    s.validate()?;
    let results: Vec<(usize, Result<ReplicateRecord>)> =
        (0..s.n_reps).into_par_iter().map(|rep| (rep, run_replicate(s, rep))).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (rep, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(ReplicateFailure { rep, error: e.to_string() }),
        }
    }
    Ok(summarize(s.clone(), records, failures))
}

/// Aggregates replicate records into a report.
pub fn summarize(scenario: Scenario, records: Vec<ReplicateRecord>, failures: Vec<ReplicateFailure>) -> CoverageReport {
    let covered = records.iter().filter(|r| r.covered).count();
    let cp = if records.is_empty() {
        f64::NAN
    } else {
        100.0 * covered as f64 / records.len() as f64
    };
    CoverageReport {
        cp,
        mlci: median(records.iter().map(|r| r.hi - r.lo).collect()),
        median_lo: median(records.iter().map(|r| r.lo).collect()),
        median_hi: median(records.iter().map(|r| r.hi).collect()),
        median_estimate: median(records.iter().map(|r| r.estimate).collect()),
        scenario,
        records,
        failures,
    }
}

/// Same data, fitted with the quantile and with the classical intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundingReport {
    pub quantile: CoverageReport,
    pub classical: CoverageReport,
}

pub fn confounding_study(q: f64, beta1: f64, gamma1_true: f64, n_reps: usize, seed: u64) -> Result<ConfoundingReport> {
    let mut base = Scenario::new("confounding", q, beta1, gamma1_true, 1, SkewPriorSpec::Pc { theta: 5.0 });
    base.n_reps = n_reps;
    base.seed = seed;
    confounding_from(&base)
}

/// Runs `base` twice, differing only in the intercept mode.
pub fn confounding_from(base: &Scenario) -> Result<ConfoundingReport> {
    let mut quantile = base.clone();
    quantile.intercept_mode = InterceptMode::Quantile;
    let mut classical = base.clone();
    classical.intercept_mode = InterceptMode::Classical;
    Ok(ConfoundingReport {
        quantile: run_scenario(&quantile)?,
        classical: run_scenario(&classical)?,
    })
}

/// Large-trials scenarios 1 to 4 (N_i = 200).
pub fn large_trial_scenarios(prior: SkewPriorSpec) -> Vec<Scenario> {
    vec![
        Scenario::new("large-1", 1.0 / 3.0, 1.0, 0.0, 200, prior),
        Scenario::new("large-2", 0.25, -1.0, 2.0 / 3.0, 200, prior),
        Scenario::new("large-3", 0.30, 1.0, 1.0 / 3.0, 200, prior),
        Scenario::new("large-4", 0.10, -1.0, -1.0 / 3.0, 200, prior),
    ]
}

/// Binary-trial scenarios 1 and 2.
pub fn small_trial_scenarios(prior: SkewPriorSpec) -> Vec<Scenario> {
    vec![
        Scenario::new("binary-1", 0.5, 1.0, -2.0 / 3.0, 1, prior),
        Scenario::new("binary-2", 0.5, 1.0, 0.0, 1, prior),
    ]
}
