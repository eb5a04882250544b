//! Penalised-complexity prior for the skewness of the standardized link.
//!
//! The distance from the skew-normal link to probit is `d = √(2·KLD)`.
//! An exponential on `d` (truncated at the supremum `d_max`, since the
//! distance is bounded) is pushed back to the α and γ₁ scales.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{domain, Error, Result};
use crate::link::std_params;
use crate::quadrature::{integrate_pieces, QuadOptions};
use crate::real::Real;
use crate::sn_core::{
    delta, delta_to_alpha, dgamma1_ddelta, gamma1_sup, gamma1_to_delta,
};
use crate::special::{log_norm_cdf, log_norm_pdf};

/// Below this |α| the distance comes from the small-shape expansion.
pub const SERIES_SWITCH: f64 = 0.05;

/// Coefficients of KLD(α) ≈ c1 α⁶ + c2 α⁸ + c3 α¹⁰.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KldSeries<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

impl<T: Real> KldSeries<T> {
    pub fn new() -> Self {
        let pi = T::PI();
        let (p2, p3) = (pi * pi, pi * pi * pi);
        let (p4, p5) = (p2 * p2, p2 * p3);
        let l = T::lit;
        Self {
            c1: (p2 + l(16.0) - l(8.0) * pi) / (l(6.0) * p3),
            c2: -(l(144.0) * pi + l(3.0) * p3 - l(38.0) * p2 - l(168.0)) / (l(6.0) * p4),
            c3: (l(-42240.0) * pi - l(2560.0) * p3 + l(16176.0) * p2 + l(129.0) * p4 + l(39936.0)) / (l(120.0) * p5),
        }
    }

    pub fn kld(&self, alpha: T) -> T {
        let a2 = alpha * alpha;
        a2 * a2 * a2 * (self.c1 + a2 * (self.c2 + a2 * self.c3))
    }

    /// √(2 KLD) and its α-derivative.
    fn distance_and_slope(&self, alpha: T) -> (T, T) {
        let a2 = alpha * alpha;
        let inner = T::lit(2.0) * (self.c1 + a2 * (self.c2 + a2 * self.c3));
        let root = inner.sqrt();
        let d = alpha.abs() * a2 * root;
        // d'(α) = α² sign(α) (6c1 + 8c2α² + 10c3α⁴) / √(2(c1 + c2α² + c3α⁴))
        let num = T::lit(6.0) * self.c1 + a2 * (T::lit(8.0) * self.c2 + a2 * T::lit(10.0) * self.c3);
        (d, alpha.signum() * a2 * num / root)
    }

    /// d'(α)/α², finite at the origin.
    fn slope_over_alpha2(&self, alpha: T) -> T {
        let a2 = alpha * alpha;
        let root = (T::lit(2.0) * (self.c1 + a2 * (self.c2 + a2 * self.c3))).sqrt();
        let num = T::lit(6.0) * self.c1 + a2 * (T::lit(8.0) * self.c2 + a2 * T::lit(10.0) * self.c3);
        num / root
    }
}

impl<T: Real> Default for KldSeries<T> {
    fn default() -> Self {
        Self::new()
    }
}

pub fn kld_series<T: Real>(alpha: T) -> T {
    KldSeries::new().kld(alpha)
}

/// log(2Φ(y)) without cancellation near y = 0.
#[inline]
fn log_two_phi<T: Real>(y: T) -> T {
    if y.abs() < T::one() {
        (y * T::FRAC_1_SQRT_2()).erf().ln_1p()
    } else {
        T::LN_2() + log_norm_cdf(y)
    }
}

/// x log x − x + 1 written in terms of l = log x; ≈ l²/2 near 0.
#[inline]
fn rlogr_term<T: Real>(l: T) -> T {
    if l.abs() < T::lit(0.05) {
        // Σ_{k≥2} (k−1) l^k / k!
        let mut term = l * l * T::lit(0.5);
        let mut sum = term;
        let mut k = 2.0;
        while k < 14.0 {
            term = term * l / T::lit(k + 1.0);
            sum += term * T::lit(k);
            k += 1.0;
        }
        sum
    } else {
        l * l.exp() - l.exp_m1()
    }
}

/// KLD between the standardized density at shape δ (|δ| ≤ 1, δ = ±1 being
/// the half-normal limit) and the standard normal.
fn kld_from_delta<T: Real>(d: T) -> Result<T> {
    if d == T::zero() {
        return Ok(T::zero());
    }
    if !(d.abs() <= T::one()) {
        return domain(format!("|delta| must be at most 1, got {d}"));
    }
    // Reflection x → −x maps δ to −δ and leaves the KLD unchanged.
    let d = d.abs();
    let b = T::lit(2.0) / T::PI();
    let ln_omega = -T::lit(0.5) * (-b * d * d).ln_1p();
    let omega = ln_omega.exp();
    let one_minus_omega = -ln_omega.exp_m1();
    let xi = -omega * d * b.sqrt();
    let half_normal = d == T::one();
    let alpha = if half_normal { T::infinity() } else { delta_to_alpha(d) };

    let integrand = |x: T| {
        let z = (x - xi) / omega;
        let skew = if half_normal {
            if z < T::zero() {
                T::neg_infinity()
            } else {
                T::LN_2()
            }
        } else {
            log_two_phi(alpha * z)
        };
        let z_minus_x = (x * one_minus_omega - xi) / omega;
        let l = -ln_omega - z_minus_x * (z + x) * T::lit(0.5) + skew;
        let log_phi = log_norm_pdf(x);
        if l < T::lit(-600.0) {
            log_phi.exp()
        } else if l.abs() < T::lit(0.05) {
            log_phi.exp() * rlogr_term(l)
        } else {
            let f = (log_phi + l).exp();
            f * l - f + log_phi.exp()
        }
    };

    let scale = d.powi(6).min(T::one());
    let opts = QuadOptions {
        abs_tol: T::lit(1e-12) * scale,
        rel_tol: T::lit(1e-11).max(T::epsilon() * T::lit(64.0)),
        max_intervals: 2000,
    };
    let lim = T::lit(40.0);
    let mut breaks = vec![-lim, xi, T::zero(), lim];
    if alpha > T::one() {
        let width = omega / alpha;
        for k in [-16.0, -4.0, -1.0, 1.0, 4.0, 16.0] {
            let b = xi + T::lit(k) * width;
            if b > -lim && b < T::zero() {
                breaks.push(b);
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breaks"));
    }
    let r = integrate_pieces(integrand, &breaks, &opts).map_err(|e| Error::Numerical {
        context: "KLD quadrature",
        detail: format!("delta={d}: {e}"),
    })?;
    Ok(r.value.max(T::zero()))
}

/// KLD(α) by adaptive quadrature of `f log(f/φ)`.
pub fn kld_quadrature<T: Real>(alpha: T) -> Result<T> {
    if !alpha.is_finite() {
        return domain(format!("shape must be finite, got {alpha}"));
    }
    kld_from_delta(delta(alpha))
}

/// KLD of the half-normal limit (|α| → ∞).
pub fn kld_limit<T: Real>() -> Result<T> {
    kld_from_delta(T::one())
}

/// d(α) = √(2 KLD(α)).
pub fn distance<T: Real>(alpha: T) -> Result<T> {
    if !alpha.is_finite() {
        return domain(format!("shape must be finite, got {alpha}"));
    }
    if alpha.abs() < T::lit(SERIES_SWITCH) {
        return Ok(KldSeries::new().distance_and_slope(alpha).0);
    }
    Ok((T::lit(2.0) * kld_quadrature(alpha)?).sqrt())
}

/// θ = −log(p_U)/U so that P(d > U) = p_U.
pub fn theta_from_tail<T: Real>(u: T, p_u: T) -> Result<T> {
    if !(u > T::zero() && u.is_finite()) {
        return domain(format!("tail bound U must be positive, got {u}"));
    }
    if !(p_u > T::zero() && p_u < T::one()) {
        return domain(format!("tail probability must lie in (0, 1), got {p_u}"));
    }
    Ok(-p_u.ln() / u)
}

/// Monotone cubic (Fritsch–Carlson) interpolation of the distance.
///
/// Tabulates d^{1/3} on a uniform grid in `s` with δ = sin(πs/2). Near δ = 1
/// the distance approaches `d_max` like √(1−δ), which is smooth in `s`, and
/// near 0 it grows like δ³.
#[derive(Debug, Clone)]
pub struct DistanceTable<T> {
    values: Vec<T>,
    slopes: Vec<T>,
}

/// Number of nodes in the shared table.
pub const TABLE_NODES: usize = 1025;

impl<T: Real> DistanceTable<T> {
    /// Tabulates d (computed in f64, then converted).
    pub fn build(n: usize) -> Result<Self> {
        let n = n.max(8);
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut values64 = Vec::with_capacity(n);
        for &s in &nodes {
            let d = if s == 1.0 { 1.0 } else { (std::f64::consts::FRAC_PI_2 * s).sin() };
            values64.push((2.0 * kld_from_delta(d)?).sqrt().cbrt());
        }
        for w in values64.windows(2) {
            if w[1] <= w[0] && w[0] > 0.0 {
                return Err(Error::Numerical {
                    context: "distance table",
                    detail: format!("distance not increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        let slopes64 = pchip_slopes(&nodes, &values64);
        let cast = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Ok(Self {
            values: cast(&values64),
            slopes: cast(&slopes64),
        })
    }

    /// Process-wide table for scalar type `T`, built on first use.
    pub fn shared() -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<TypeId, Arc<dyn Any + Send + Sync>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("distance table cache poisoned");
        let entry = map.entry(TypeId::of::<T>()).or_insert_with(|| {
            let table: Arc<Self> = Arc::new(Self::build(TABLE_NODES).expect("distance table construction"));
            table
        });
        Arc::clone(entry).downcast::<Self>().expect("table type")
    }

    pub fn d_max(&self) -> T {
        self.values.last().expect("non-empty table").powi(3)
    }

    /// `(δ, d)` at the table nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (T, T)> + '_ {
        let n = self.values.len();
        self.values.iter().enumerate().map(move |(i, &v)| {
            let s = T::lit(i as f64 / (n - 1) as f64);
            ((T::FRAC_PI_2() * s).sin().min(T::one()), v.powi(3))
        })
    }

    /// `(d, ∂d/∂s)` at s ∈ [0, 1].
    pub fn eval_s(&self, s: T) -> (T, T) {
        let n = self.values.len();
        let s = s.max(T::zero()).min(T::one());
        let h = T::lit(1.0 / (n - 1) as f64);
        let k = (s / h).floor().to_usize().unwrap_or(0).min(n - 2);
        let t = (s - T::lit(k as f64) * h) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        let (two, three, six) = (T::lit(2.0), T::lit(3.0), T::lit(6.0));
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (two * t3 - three * t2 + T::one()) * y0
            + (t3 - two * t2 + t) * h * m0
            + (-two * t3 + three * t2) * y1
            + (t3 - t2) * h * m1;
        let slope = (six * t2 - six * t) / h * y0
            + (three * t2 - T::lit(4.0) * t + T::one()) * m0
            + (six * t - six * t2) / h * y1
            + (three * t2 - two * t) * m1;
        (value.powi(3), T::lit(3.0) * value * value * slope)
    }

    /// `(d, log ∂d/∂s)` at |δ| ∈ [0, 1].
    fn eval_delta(&self, d: T) -> (T, T) {
        let s = d.abs().min(T::one()).asin() / T::FRAC_PI_2();
        let (v, slope) = self.eval_s(s);
        (v, slope.ln())
    }

    /// d and ∂d/∂δ at |δ| ∈ [0, 1]; the derivative is infinite at |δ| = 1.
    pub fn eval(&self, d: T) -> (T, T) {
        let d = d.abs().min(T::one());
        let (v, log_ds) = self.eval_delta(d);
        let jac = T::FRAC_PI_2() * ((T::one() - d) * (T::one() + d)).sqrt();
        (v, log_ds.exp() / jac)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    m[0] = end(h[0], h[1], del[0], del[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    m
}

/// Which scale a prior density is reported on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorScale {
    Alpha,
    Gamma1,
}

impl std::str::FromStr for PriorScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Self::Alpha),
            "gamma1" => Ok(Self::Gamma1),
            other => domain(format!("unknown prior scale '{other}' (expected alpha or gamma1)")),
        }
    }
}

impl std::fmt::Display for PriorScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Alpha => "alpha",
            Self::Gamma1 => "gamma1",
        })
    }
}

/// PC prior with rate `theta` on the distance scale.
#[derive(Debug, Clone)]
pub struct PcSkewPrior<T> {
    theta: T,
    table: Arc<DistanceTable<T>>,
    series: KldSeries<T>,
    log_norm: T,
}

impl<T: Real> PcSkewPrior<T> {
    pub fn new(theta: T) -> Result<Self> {
        Self::with_table(theta, DistanceTable::shared())
    }

    pub fn with_table(theta: T, table: Arc<DistanceTable<T>>) -> Result<Self> {
        if !(theta > T::zero() && theta.is_finite()) {
            return domain(format!("PC prior rate must be positive, got {theta}"));
        }
        let log_norm = (-(-theta * table.d_max()).exp()).ln_1p();
        Ok(Self {
            theta,
            table,
            series: KldSeries::new(),
            log_norm,
        })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn d_max(&self) -> T {
        self.table.d_max()
    }

    pub fn table(&self) -> &DistanceTable<T> {
        &self.table
    }

    /// Tabulated d(α) (series below the switch point).
    pub fn distance(&self, alpha: T) -> T {
        if alpha.abs() < T::lit(SERIES_SWITCH) {
            self.series.distance_and_slope(alpha).0
        } else {
            self.table.eval(delta(alpha)).0
        }
    }

    /// d'(α).
    pub fn distance_slope(&self, alpha: T) -> T {
        if alpha.abs() < T::lit(SERIES_SWITCH) {
            self.series.distance_and_slope(alpha).1
        } else {
            let (_, log_ds) = self.table.eval_delta(delta(alpha));
            // dδ/dα · dδ/ds⁻¹ = (1−δ²)^{3/2} / ((π/2)(1−δ²)^{1/2})
            alpha.signum() * (log_ds - (alpha * alpha).ln_1p()).exp() / T::FRAC_PI_2()
        }
    }

    #[inline]
    fn log_base(&self) -> T {
        (self.theta * T::lit(0.5)).ln() - self.log_norm
    }

    /// log π(α); −∞ at α = 0.
    pub fn log_density_alpha(&self, alpha: T) -> T {
        if alpha.is_nan() {
            return T::nan();
        }
        if alpha == T::zero() {
            return T::neg_infinity();
        }
        if alpha.abs() < T::lit(SERIES_SWITCH) {
            let (d, slope) = self.series.distance_and_slope(alpha);
            return self.log_base() - self.theta * d + slope.abs().ln();
        }
        let (d, log_ds) = self.table.eval_delta(delta(alpha));
        self.log_base() - self.theta * d + log_ds - T::FRAC_PI_2().ln() - (alpha * alpha).ln_1p()
    }

    /// log π(γ₁) for |γ₁| ≤ sup. The density has an integrable spike like
    /// (sup − |γ₁|)^{-1/2} at the bounds and is +∞ on them.
    pub fn log_density_gamma1(&self, gamma1: T) -> Result<T> {
        let sup = gamma1_sup::<T>();
        if gamma1.is_nan() || gamma1.abs() > sup {
            return domain(format!("skewness {gamma1} outside (−{sup}, {sup})"));
        }
        let d = if gamma1.abs() == sup { gamma1.signum() } else { gamma1_to_delta(gamma1)? };
        Ok(self.log_density_delta_scale_gamma1(d))
    }

    fn log_density_delta_scale_gamma1(&self, d: T) -> T {
        let d_abs = d.abs();
        if d_abs < delta(T::lit(SERIES_SWITCH)) {
            let alpha = delta_to_alpha(d_abs);
            let (dist, _) = self.series.distance_and_slope(alpha);
            // d'(α)/γ₁'(α) with the common α² cancelled.
            let a2 = alpha * alpha;
            let pi = T::PI();
            let u2 = T::lit(2.0) * a2 / (pi * (T::one() + a2));
            let k = (T::lit(4.0) - pi) * T::lit(0.5);
            let g_over_a2 = T::lit(3.0) * k * T::lit(2.0) / (pi * (T::one() + a2)) * (T::lit(2.0) / pi).sqrt()
                * (T::one() + a2).powf(T::lit(-1.5))
                / (T::one() - u2).powf(T::lit(2.5));
            return self.log_base() - self.theta * dist + (self.series.slope_over_alpha2(alpha) / g_over_a2).ln();
        }
        let (dist, log_ds) = self.table.eval_delta(d_abs);
        let log_jac = T::FRAC_PI_2().ln() + T::lit(0.5) * ((T::one() - d_abs) * (T::one() + d_abs)).ln();
        self.log_base() - self.theta * dist + log_ds - log_jac - dgamma1_ddelta(d_abs).ln()
    }

    pub fn density_alpha(&self, alpha: T) -> T {
        self.log_density_alpha(alpha).exp()
    }

    pub fn density_gamma1(&self, gamma1: T) -> Result<T> {
        Ok(self.log_density_gamma1(gamma1)?.exp())
    }

    /// Prior mass of |α| ∈ [a, b] (0 ≤ a ≤ b) from the distance CDF.
    pub fn mass_abs_alpha(&self, a: T, b: T) -> T {
        let cdf = |x: T| {
            if x.is_infinite() {
                T::one()
            } else {
                (-(-self.theta * self.distance(x)).exp_m1()) / self.log_norm.exp()
            }
        };
        cdf(b) - cdf(a)
    }

    /// Prior mass of |γ₁| ∈ [a, b] with 0 ≤ a ≤ b ≤ sup.
    pub fn mass_abs_gamma1(&self, a: T, b: T) -> Result<T> {
        let sup = gamma1_sup::<T>();
        let cdf = |g: T| -> Result<T> {
            if g >= sup {
                return Ok(T::one());
            }
            let d = gamma1_to_delta(g)?.abs();
            let dist = if d < delta(T::lit(SERIES_SWITCH)) {
                self.series.distance_and_slope(delta_to_alpha(d)).0
            } else {
                self.table.eval(d).0
            };
            Ok(-(-self.theta * dist).exp_m1() / self.log_norm.exp())
        };
        Ok(cdf(b)? - cdf(a)?)
    }

    /// Equally spaced `(value, density)` pairs. The α grid spans
    /// `[-alpha_max, alpha_max]` including both ends; the γ₁ grid takes the
    /// midpoints of `n_points` equal cells of the support, avoiding the
    /// singular bounds.
    pub fn grid(&self, scale: PriorScale, n_points: usize, alpha_max: T) -> Result<Vec<(T, T)>> {
        if n_points < 2 {
            return domain(format!("grid needs at least 2 points, got {n_points}"));
        }
        if scale == PriorScale::Alpha && !(alpha_max > T::zero() && alpha_max.is_finite()) {
            return domain(format!("alpha range must be positive, got {alpha_max}"));
        }
        let sup = gamma1_sup::<T>();
        let (lo, step) = match scale {
            PriorScale::Alpha => (-alpha_max, T::lit(2.0) * alpha_max / T::lit((n_points - 1) as f64)),
            PriorScale::Gamma1 => {
                let step = T::lit(2.0) * sup / T::lit(n_points as f64);
                (-sup + T::lit(0.5) * step, step)
            }
        };
        (0..n_points)
            .map(|i| {
                let v = match scale {
                    PriorScale::Alpha if i == n_points - 1 => alpha_max,
                    _ => lo + step * T::lit(i as f64),
                };
                let dens = match scale {
                    PriorScale::Alpha => self.density_alpha(v),
                    PriorScale::Gamma1 => self.density_gamma1(v)?,
                };
                Ok((v, dens))
            })
            .collect()
    }
}

pub fn pc_logprior_alpha<T: Real>(alpha: T, prior: &PcSkewPrior<T>) -> T {
    prior.log_density_alpha(alpha)
}

pub fn pc_logprior_gamma1<T: Real>(gamma1: T, prior: &PcSkewPrior<T>) -> Result<T> {
    prior.log_density_gamma1(gamma1)
}

pub fn prior_grid<T: Real>(prior: &PcSkewPrior<T>, scale: PriorScale, n_points: usize) -> Result<Vec<(T, T)>> {
    prior.grid(scale, n_points, T::lit(DEFAULT_ALPHA_RANGE))
}

/// Half-width of the default α grid.
pub const DEFAULT_ALPHA_RANGE: f64 = 10.0;

/// Standardized parameters of the link at shape `alpha` (re-exported for
/// callers that only need the prior).
pub fn link_params<T: Real>(alpha: T) -> (T, T) {
    std_params(alpha)
}
