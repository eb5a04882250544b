//! Likelihoods and posteriors for skewed probit (Binomial) regression and
//! skew-normal mean regression.
//!
//! Models are evaluated on an unconstrained vector:
//!
//! | model | layout |
//! |---|---|
//! | skewed probit | `[Φ⁻¹(q), β₁..βₘ, atanh(γ₁/sup)]` |
//! | probit | `[Φ⁻¹(q), β₁..βₘ]` |
//! | skew-normal regression | `[β₀, β₁..βₘ, log τ, atanh(γ₁/sup)]` |
//! | Gaussian regression | `[β₀, β₁..βₘ, log τ]` |
//!
//! With the classical intercept the first entry of the binomial models is a
//! free β₀ instead of Φ⁻¹(q).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::link::{q_logprior, StandardizedLink};
use crate::pcprior::PcSkewPrior;
use crate::sn_core::{alpha_to_gamma1, ddelta_dalpha, delta, dgamma1_ddelta, gamma1_sup, gamma1_to_alpha};
use crate::special::{log_norm_cdf, log_norm_pdf, norm_cdf, norm_quantile};

/// Beyond this |atanh(γ₁/sup)| the likelihood is held at the boundary value
/// and the PC prior continues with its asymptotic e^{-|u|} decay.
pub const SKEW_U_MAX: f64 = 8.0;

/// Evidence window for u = atanh(γ₁/sup).
pub const SKEW_EVIDENCE_WINDOW: f64 = 5.0;
/// Evidence window for α.
pub const SKEW_EVIDENCE_WINDOW_ALPHA: f64 = 60.0;

/// Observations and design.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    n_trials: Option<Vec<f64>>,
    x: DMatrix<f64>,
    column_names: Vec<String>,
    log_binom: Vec<f64>,
}

fn ln_choose(n: f64, k: f64) -> f64 {
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

impl Dataset {
    /// Binomial counts `y` out of `n_trials`.
    pub fn binomial(y: Vec<f64>, n_trials: Vec<f64>, x: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        Self::check_shape(y.len(), &x, &column_names)?;
        if n_trials.len() != y.len() {
            return Err(Error::Dimension {
                expected: y.len(),
                got: n_trials.len(),
            });
        }
        for (i, (&yi, &ni)) in y.iter().zip(&n_trials).enumerate() {
            if !(ni >= 1.0 && ni.fract() == 0.0 && ni.is_finite()) {
                return Err(Error::Data(format!("row {i}: trials must be a positive integer, got {ni}")));
            }
            if !(yi >= 0.0 && yi <= ni && yi.fract() == 0.0) {
                return Err(Error::Data(format!("row {i}: count {yi} not in 0..={ni}")));
            }
        }
        let log_binom = y.iter().zip(&n_trials).map(|(&k, &n)| ln_choose(n, k)).collect();
        Ok(Self {
            y,
            n_trials: Some(n_trials),
            x,
            column_names,
            log_binom,
        })
    }

    /// Binary outcomes (one trial per row).
    pub fn bernoulli(y: Vec<f64>, x: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        let n = vec![1.0; y.len()];
        Self::binomial(y, n, x, column_names)
    }

    /// Real-valued responses.
    pub fn continuous(y: Vec<f64>, x: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        Self::check_shape(y.len(), &x, &column_names)?;
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("row {i}: response is not finite")));
        }
        Ok(Self {
            y,
            n_trials: None,
            x,
            column_names,
            log_binom: Vec::new(),
        })
    }

    fn check_shape(n: usize, x: &DMatrix<f64>, names: &[String]) -> Result<()> {
        if n == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if x.nrows() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.nrows(),
            });
        }
        if names.len() != x.ncols() {
            return Err(Error::Dimension {
                expected: x.ncols(),
                got: names.len(),
            });
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % n, pos / n);
            return Err(Error::Data(format!("row {r}, column {c}: covariate is not finite")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
    /// Number of covariate columns (no intercept).
    pub fn m(&self) -> usize {
        self.x.ncols()
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn n_trials(&self) -> Option<&[f64]> {
        self.n_trials.as_deref()
    }
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }
    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }
    pub fn is_binomial(&self) -> bool {
        self.n_trials.is_some()
    }

    /// Whether the covariate columns are linearly independent.
    pub fn is_full_rank(&self) -> bool {
        let m = self.m();
        if m == 0 {
            return true;
        }
        if self.n() < m {
            return false;
        }
        let sv = self.x.clone().singular_values();
        let max = sv.max();
        let tol = max * (self.n().max(m) as f64) * f64::EPSILON;
        max > 0.0 && sv.iter().all(|&s| s > tol)
    }

    /// Rows at the given indices, in that order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::Data(format!("row index {bad} out of range")));
        }
        let x = self.x.select_rows(rows.iter());
        let y = rows.iter().map(|&r| self.y[r]).collect();
        match &self.n_trials {
            Some(n) => Self::binomial(y, rows.iter().map(|&r| n[r]).collect(), x, self.column_names.clone()),
            None => Self::continuous(y, x, self.column_names.clone()),
        }
    }

    /// Σ log C(Nᵢ, yᵢ).
    pub fn log_binomial_constant(&self) -> f64 {
        self.log_binom.iter().sum()
    }
}

/// Natural-scale parameters of the skewed probit model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewProbitParams {
    pub q: f64,
    pub beta: Vec<f64>,
    pub gamma1: f64,
}

/// Natural-scale parameters of skew-normal mean regression. `beta[0]` is
/// the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalRegParams {
    pub beta: Vec<f64>,
    pub precision: f64,
    pub gamma1: f64,
}

fn shape_from_gamma1(gamma1: f64) -> Result<f64> {
    let sup = gamma1_sup::<f64>();
    if !(gamma1.abs() < sup) {
        return domain(format!("skewness {gamma1} outside (−{sup}, {sup})"));
    }
    gamma1_to_alpha(gamma1)
}

fn linear_predictor(x: &DMatrix<f64>, offset: f64, beta: &[f64]) -> Result<DVector<f64>> {
    if beta.len() != x.ncols() {
        return Err(Error::Dimension {
            expected: x.ncols(),
            got: beta.len(),
        });
    }
    let b = DVector::from_column_slice(beta);
    Ok(x * b).map(|e: DVector<f64>| e.add_scalar(offset))
}

fn binomial_loglik(link: &StandardizedLink<f64>, eta: &DVector<f64>, data: &Dataset) -> Result<f64> {
    let trials = data
        .n_trials()
        .ok_or_else(|| Error::Data("binomial model needs trial counts".into()))?;
    let mut total = 0.0;
    for i in 0..data.n() {
        let (y, n) = (data.y[i], trials[i]);
        let (lp, lq) = link.log_cdf_sf(eta[i]);
        let mut term = data.log_binom[i];
        if y > 0.0 {
            term += y * lp;
        }
        if n - y > 0.0 {
            term += (n - y) * lq;
        }
        total += term;
    }
    if total.is_nan() {
        return Err(Error::Numerical {
            context: "binomial log-likelihood",
            detail: "NaN term".into(),
        });
    }
    Ok(total)
}

/// Σ [log C(Nᵢ,yᵢ) + yᵢ log pᵢ + (Nᵢ−yᵢ) log(1−pᵢ)] with
/// pᵢ = F(β₀(q,α) + xᵢβ | α).
pub fn skewprobit_loglik(params: &SkewProbitParams, data: &Dataset) -> Result<f64> {
    let link = StandardizedLink::new(shape_from_gamma1(params.gamma1)?)?;
    let beta0 = link.quantile_intercept(params.q)?;
    binomial_loglik(&link, &linear_predictor(&data.x, beta0, &params.beta)?, data)
}

/// Binomial log-likelihood with a free (classical) intercept.
pub fn skewprobit_loglik_classical(beta0: f64, beta: &[f64], gamma1: f64, data: &Dataset) -> Result<f64> {
    let link = StandardizedLink::new(shape_from_gamma1(gamma1)?)?;
    binomial_loglik(&link, &linear_predictor(&data.x, beta0, beta)?, data)
}

fn sn_loglik_at(beta: &[f64], precision: f64, alpha: f64, data: &Dataset) -> Result<f64> {
    if data.is_binomial() {
        return Err(Error::Data("skew-normal regression needs a continuous response".into()));
    }
    if !(precision > 0.0 && precision.is_finite()) {
        return domain(format!("precision must be positive, got {precision}"));
    }
    if beta.len() != data.m() + 1 {
        return Err(Error::Dimension {
            expected: data.m() + 1,
            got: beta.len(),
        });
    }
    let link = StandardizedLink::new(alpha)?;
    let sigma = precision.sqrt().recip();
    let (xi_s, omega_s) = (link.xi_std(), link.omega_std());
    let omega = sigma * omega_s;
    let eta = linear_predictor(&data.x, beta[0], &beta[1..])?;
    let log_norm = std::f64::consts::LN_2 - omega.ln();
    let mut total = 0.0;
    for (i, &y) in data.y.iter().enumerate() {
        let z = (y - eta[i] - sigma * xi_s) / omega;
        total += log_norm + log_norm_pdf(z) + log_norm_cdf(alpha * z);
    }
    Ok(total)
}

/// Σ log sn_pdf(yᵢ; ξᵢ, ω, α) with E[Yᵢ] = ηᵢ and V[Yᵢ] = 1/τ.
pub fn snreg_loglik(params: &SkewNormalRegParams, data: &Dataset) -> Result<f64> {
    sn_loglik_at(&params.beta, params.precision, shape_from_gamma1(params.gamma1)?, data)
}

/// PC prior for a precision τ: log[(λ/2) τ^{-3/2} exp(−λ τ^{-1/2})] with
/// λ = −log(p_u)/u.
pub fn pc_logprior_precision(tau: f64, u: f64, p_u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return domain(format!("precision prior bound must be positive, got {u}"));
    }
    if !(p_u > 0.0 && p_u < 1.0) {
        return domain(format!("precision prior probability must lie in (0, 1), got {p_u}"));
    }
    if !(tau > 0.0) {
        return domain(format!("precision must be positive, got {tau}"));
    }
    let lambda = -p_u.ln() / u;
    Ok((0.5 * lambda).ln() - 1.5 * tau.ln() - lambda / tau.sqrt())
}

/// Success probabilities for new rows.
pub fn predict(params: &SkewProbitParams, x_new: &DMatrix<f64>) -> Result<Vec<f64>> {
    let link = StandardizedLink::new(shape_from_gamma1(params.gamma1)?)?;
    let beta0 = link.quantile_intercept(params.q)?;
    let eta = linear_predictor(x_new, beta0, &params.beta)?;
    Ok(eta.iter().map(|&e| link.cdf(e)).collect())
}

/// Normal prior given by mean and precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub precision: f64,
}

impl NormalPrior {
    pub fn new(mean: f64, precision: f64) -> Result<Self> {
        if !(precision > 0.0 && precision.is_finite() && mean.is_finite()) {
            return domain(format!("normal prior needs finite mean and positive precision, got ({mean}, {precision})"));
        }
        Ok(Self { mean, precision })
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let r = x - self.mean;
        0.5 * (self.precision / (2.0 * std::f64::consts::PI)).ln() - 0.5 * self.precision * r * r
    }
}

impl Default for NormalPrior {
    fn default() -> Self {
        Self {
            mean: 0.0,
            precision: 1.0,
        }
    }
}

/// Prior on the skewness γ₁.
#[derive(Debug, Clone)]
pub enum SkewPrior {
    Pc(PcSkewPrior<f64>),
    /// Normal(mean, variance) truncated to the γ₁ support.
    Gaussian { mean: f64, variance: f64 },
}

impl SkewPrior {
    pub fn pc(theta: f64) -> Result<Self> {
        Ok(Self::Pc(PcSkewPrior::new(theta)?))
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) {
            return domain(format!("Gaussian skew prior needs positive variance, got ({mean}, {variance})"));
        }
        Ok(Self::Gaussian { mean, variance })
    }

    /// log π(γ₁) on the γ₁ scale.
    pub fn log_density(&self, gamma1: f64) -> Result<f64> {
        match self {
            Self::Pc(p) => p.log_density_gamma1(gamma1),
            Self::Gaussian { mean, variance } => {
                let sup = gamma1_sup::<f64>();
                if !(gamma1.abs() <= sup) {
                    return domain(format!("skewness {gamma1} outside (−{sup}, {sup})"));
                }
                let sd = variance.sqrt();
                let mass = norm_cdf((sup - mean) / sd) - norm_cdf((-sup - mean) / sd);
                Ok(log_norm_pdf((gamma1 - mean) / sd) - sd.ln() - mass.ln())
            }
        }
    }

    /// log density of u = atanh(γ₁/sup), Jacobian included.
    pub fn log_density_unconstrained(&self, u: f64) -> Result<f64> {
        let sup = gamma1_sup::<f64>();
        let log_jac = |u: f64| sup.ln() + log_sech2(u);
        match self {
            Self::Pc(_) if u.abs() > SKEW_U_MAX => {
                let edge = self.log_density(sup * SKEW_U_MAX.tanh())? + log_jac(SKEW_U_MAX);
                Ok(edge - (u.abs() - SKEW_U_MAX))
            }
            _ => Ok(self.log_density(sup * u.tanh())? + log_jac(u)),
        }
    }
}

impl SkewPrior {
    /// log density on the α scale.
    pub fn log_density_alpha(&self, alpha: f64) -> Result<f64> {
        if !alpha.is_finite() {
            return domain(format!("shape must be finite, got {alpha}"));
        }
        match self {
            Self::Pc(p) => Ok(p.log_density_alpha(alpha)),
            Self::Gaussian { .. } => {
                let d = delta(alpha);
                let jac = dgamma1_ddelta(d) * ddelta_dalpha(alpha);
                Ok(self.log_density(alpha_to_gamma1(alpha))? + jac.ln())
            }
        }
    }
}

/// log(1 − tanh²u) without overflow.
fn log_sech2(u: f64) -> f64 {
    let a = u.abs();
    4f64.ln() - 2.0 * a - 2.0 * (-2.0 * a).exp().ln_1p()
}

/// q prior induced by β₀ ~ N(mu0, 1/prec0) under the probit link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPrior {
    pub mu0: f64,
    pub prec0: f64,
}

impl Default for QPrior {
    fn default() -> Self {
        Self { mu0: 0.0, prec0: 1.0 }
    }
}

/// PC prior for a precision: P(1/√τ > u) = p_u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPrior {
    pub u: f64,
    pub p_u: f64,
}

impl Default for PrecisionPrior {
    fn default() -> Self {
        Self { u: 1.0, p_u: 0.01 }
    }
}

/// Name used for the free intercept in prior overrides and outputs.
pub const INTERCEPT_NAME: &str = "(Intercept)";

#[derive(Debug, Clone)]
pub struct PriorConfig {
    pub skew: SkewPrior,
    /// Default prior for every fixed effect.
    pub beta: NormalPrior,
    /// Per-coefficient overrides keyed by column name (or [`INTERCEPT_NAME`]).
    pub beta_overrides: BTreeMap<String, NormalPrior>,
    pub q: QPrior,
    pub precision: PrecisionPrior,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            skew: SkewPrior::pc(5.0).expect("default PC prior"),
            beta: NormalPrior::default(),
            beta_overrides: BTreeMap::new(),
            q: QPrior::default(),
            precision: PrecisionPrior::default(),
        }
    }
}

impl PriorConfig {
    pub fn beta_prior(&self, name: &str) -> NormalPrior {
        self.beta_overrides.get(name).copied().unwrap_or(self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SkewProbit,
    Probit,
    SnRegression,
    GaussianRegression,
}

impl ModelKind {
    pub fn has_skewness(self) -> bool {
        matches!(self, Self::SkewProbit | Self::SnRegression)
    }
    pub fn is_binomial(self) -> bool {
        matches!(self, Self::SkewProbit | Self::Probit)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skew_probit" => Ok(Self::SkewProbit),
            "probit" => Ok(Self::Probit),
            "sn_regression" => Ok(Self::SnRegression),
            "gaussian_regression" => Ok(Self::GaussianRegression),
            other => domain(format!(
                "unknown model '{other}' (expected skew_probit, probit, sn_regression or gaussian_regression)"
            )),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SkewProbit => "skew_probit",
            Self::Probit => "probit",
            Self::SnRegression => "sn_regression",
            Self::GaussianRegression => "gaussian_regression",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptMode {
    #[default]
    Quantile,
    Classical,
}

/// Unconstrained coordinate used for the skewness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewScale {
    /// u = atanh(γ₁/sup).
    #[default]
    Gamma1,
    /// The shape α itself.
    Alpha,
}

/// A model together with its priors.
#[derive(Debug, Clone)]
pub struct Model {
    pub kind: ModelKind,
    pub intercept: InterceptMode,
    pub skew_scale: SkewScale,
    pub priors: PriorConfig,
}

impl Model {
    pub fn new(kind: ModelKind, priors: PriorConfig) -> Self {
        Self {
            kind,
            intercept: InterceptMode::Quantile,
            skew_scale: SkewScale::Gamma1,
            priors,
        }
    }

    pub fn with_intercept(mut self, mode: InterceptMode) -> Self {
        self.intercept = mode;
        self
    }

    pub fn with_skew_scale(mut self, scale: SkewScale) -> Self {
        self.skew_scale = scale;
        self
    }

    fn classical(&self) -> bool {
        self.kind.is_binomial() && self.intercept == InterceptMode::Classical
    }

    /// Length of the unconstrained vector for `m` covariates.
    pub fn dim(&self, m: usize) -> usize {
        match self.kind {
            ModelKind::SkewProbit => m + 2,
            ModelKind::Probit => m + 1,
            ModelKind::SnRegression => m + 3,
            ModelKind::GaussianRegression => m + 2,
        }
    }

    /// Range of the skewness coordinate over which conditional fits are made
    /// when integrating the evidence; beyond it γ₁ is within 1e-4 of its bound.
    pub fn skew_window(&self) -> (f64, f64) {
        match self.skew_scale {
            SkewScale::Gamma1 => (-SKEW_EVIDENCE_WINDOW, SKEW_EVIDENCE_WINDOW),
            SkewScale::Alpha => (-SKEW_EVIDENCE_WINDOW_ALPHA, SKEW_EVIDENCE_WINDOW_ALPHA),
        }
    }

    /// Index of the skewness entry, if any.
    pub fn skew_index(&self, m: usize) -> Option<usize> {
        self.kind.has_skewness().then(|| self.dim(m) - 1)
    }

    /// Natural-scale parameter names.
    pub fn param_names(&self, data: &Dataset) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim(data.m()));
        names.push(match (self.kind.is_binomial(), self.classical()) {
            (true, false) => "q".to_string(),
            _ => INTERCEPT_NAME.to_string(),
        });
        names.extend(data.column_names().iter().cloned());
        if !self.kind.is_binomial() {
            names.push("precision".into());
        }
        if self.kind.has_skewness() {
            names.push("gamma1".into());
        }
        names
    }

    fn check(&self, theta: &[f64], data: &Dataset) -> Result<()> {
        if self.kind.is_binomial() != data.is_binomial() {
            return Err(Error::Data(format!("model {} does not match the response type", self.kind)));
        }
        let dim = self.dim(data.m());
        if theta.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Maps the unconstrained vector to the natural scale.
    pub fn to_natural(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        let k = out.len();
        let bin = self.kind.is_binomial();
        if bin && !self.classical() {
            out[0] = norm_cdf(theta[0]);
        }
        let skew = self.kind.has_skewness();
        if skew {
            out[k - 1] = match self.skew_scale {
                SkewScale::Gamma1 => gamma1_sup::<f64>() * theta[k - 1].tanh(),
                SkewScale::Alpha => alpha_to_gamma1(theta[k - 1]),
            };
        }
        if !bin {
            let i = if skew { k - 2 } else { k - 1 };
            out[i] = theta[i].exp();
        }
        out
    }

    /// Inverse of [`Model::to_natural`].
    pub fn from_natural(&self, natural: &[f64]) -> Result<Vec<f64>> {
        let mut out = natural.to_vec();
        let k = out.len();
        let bin = self.kind.is_binomial();
        if bin && !self.classical() {
            let q = natural[0];
            if !(q > 0.0 && q < 1.0) {
                return domain(format!("q must lie in (0, 1), got {q}"));
            }
            out[0] = norm_quantile(q);
        }
        let skew = self.kind.has_skewness();
        if skew {
            let sup = gamma1_sup::<f64>();
            let g = natural[k - 1];
            if !(g.abs() < sup) {
                return domain(format!("skewness {g} outside (−{sup}, {sup})"));
            }
            out[k - 1] = match self.skew_scale {
                SkewScale::Gamma1 => (g / sup).atanh(),
                SkewScale::Alpha => gamma1_to_alpha(g)?,
            };
        }
        if !bin {
            let i = if skew { k - 2 } else { k - 1 };
            if !(natural[i] > 0.0) {
                return domain(format!("precision must be positive, got {}", natural[i]));
            }
            out[i] = natural[i].ln();
        }
        Ok(out)
    }

    /// Shape α used by the likelihood at the unconstrained skewness `u`.
    fn shape_at(&self, u: f64) -> Result<f64> {
        let cap = gamma1_to_alpha(gamma1_sup::<f64>() * SKEW_U_MAX.tanh())?;
        match self.skew_scale {
            SkewScale::Gamma1 => {
                let u = u.clamp(-SKEW_U_MAX, SKEW_U_MAX);
                Ok(gamma1_to_alpha(gamma1_sup::<f64>() * u.tanh())?.clamp(-cap, cap))
            }
            SkewScale::Alpha if u.is_finite() => Ok(u.clamp(-cap, cap)),
            SkewScale::Alpha => domain(format!("shape must be finite, got {u}")),
        }
    }

    /// Log-likelihood at an unconstrained point.
    pub fn log_likelihood(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        self.check(theta, data)?;
        let m = data.m();
        let alpha = match self.skew_index(m) {
            Some(i) => self.shape_at(theta[i])?,
            None => 0.0,
        };
        match self.kind {
            ModelKind::SkewProbit | ModelKind::Probit => {
                let link = StandardizedLink::new(alpha)?;
                let beta0 = if self.classical() {
                    theta[0]
                } else {
                    link.quantile_intercept(norm_cdf(theta[0]))?
                };
                binomial_loglik(&link, &linear_predictor(data.x(), beta0, &theta[1..=m])?, data)
            }
            ModelKind::SnRegression | ModelKind::GaussianRegression => {
                sn_loglik_at(&theta[..=m], theta[m + 1].exp(), alpha, data)
            }
        }
    }

    /// Log prior density of the unconstrained vector (Jacobians included).
    pub fn log_prior(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        self.check(theta, data)?;
        let m = data.m();
        let p = &self.priors;
        let mut total = 0.0;
        if self.kind.is_binomial() && !self.classical() {
            let z = theta[0];
            total += q_logprior(norm_cdf(z), p.q.mu0, p.q.prec0)? + log_norm_pdf(z);
        } else {
            total += p.beta_prior(INTERCEPT_NAME).log_density(theta[0]);
        }
        for (j, name) in data.column_names().iter().enumerate() {
            total += p.beta_prior(name).log_density(theta[1 + j]);
        }
        if !self.kind.is_binomial() {
            let log_tau = theta[m + 1];
            total += pc_logprior_precision(log_tau.exp(), p.precision.u, p.precision.p_u)? + log_tau;
        }
        if let Some(i) = self.skew_index(m) {
            total += match self.skew_scale {
                SkewScale::Gamma1 => p.skew.log_density_unconstrained(theta[i])?,
                SkewScale::Alpha => p.skew.log_density_alpha(theta[i])?,
            };
        }
        Ok(total)
    }

    /// Unnormalized log posterior on the unconstrained scale.
    pub fn log_posterior(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        Ok(self.log_likelihood(theta, data)? + self.log_prior(theta, data)?)
    }

    /// [`Model::log_posterior`] with errors mapped to −∞.
    pub fn log_posterior_or_neg_inf(&self, theta: &[f64], data: &Dataset) -> f64 {
        match self.log_posterior(theta, data) {
            Ok(v) if !v.is_nan() => v,
            _ => f64::NEG_INFINITY,
        }
    }

    /// Skewed probit parameters at an unconstrained point (quantile mode).
    pub fn skewprobit_params(&self, theta: &[f64], m: usize) -> Result<SkewProbitParams> {
        if !self.kind.is_binomial() || self.classical() {
            return domain("quantile-intercept binomial model required");
        }
        let nat = self.to_natural(theta);
        Ok(SkewProbitParams {
            q: nat[0],
            beta: nat[1..=m].to_vec(),
            gamma1: if self.kind.has_skewness() { nat[m + 1] } else { 0.0 },
        })
    }
}

/// Free-function form of [`Model::log_posterior`].
pub fn log_posterior(model: &Model, theta: &[f64], data: &Dataset) -> Result<f64> {
    model.log_posterior(theta, data)
}
