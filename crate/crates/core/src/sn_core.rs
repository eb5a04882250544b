//! Skew-normal distribution functions and skewness parameterisations.
//!
//! Density `g(x) = (2/ω) φ(z) Φ(αz)` with `z = (x − ξ)/ω`. The CDF is
//! `Φ(z) − 2T(z, α)` with Owen's T function; in the light tail, where that
//! difference cancels, the tail mass is integrated directly on the log
//! scale instead.

use crate::error::{domain, Result};
use crate::quadrature::{gauss_legendre_10, gauss_legendre_20, integrate, integrate_pieces, QuadOptions};
use crate::real::Real;
use crate::roots::{brent, bracket_increasing};
use crate::special::{log_norm_cdf, log_norm_pdf, norm_cdf, norm_pdf, norm_quantile, norm_sf};

/// Location `xi`, scale `omega > 0` and shape `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormalParams<T> {
    xi: T,
    omega: T,
    alpha: T,
}

impl<T: Real> SkewNormalParams<T> {
    pub fn new(xi: T, omega: T, alpha: T) -> Result<Self> {
        if !(xi.is_finite() && alpha.is_finite()) {
            return domain(format!("location and shape must be finite (xi={xi}, alpha={alpha})"));
        }
        if !(omega.is_finite() && omega > T::zero()) {
            return domain(format!("scale must be positive and finite, got {omega}"));
        }
        Ok(Self { xi, omega, alpha })
    }

    /// SN(0, 1, alpha).
    pub fn standard(alpha: T) -> Result<Self> {
        Self::new(T::zero(), T::one(), alpha)
    }

    pub fn xi(&self) -> T {
        self.xi
    }
    pub fn omega(&self) -> T {
        self.omega
    }
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn delta(&self) -> T {
        delta(self.alpha)
    }

    #[inline]
    fn z(&self, x: T) -> T {
        (x - self.xi) / self.omega
    }

    pub fn pdf(&self, x: T) -> T {
        let z = self.z(x);
        T::lit(2.0) / self.omega * norm_pdf(z) * norm_cdf(self.alpha * z)
    }

    pub fn log_pdf(&self, x: T) -> T {
        let z = self.z(x);
        T::LN_2() - self.omega.ln() + log_norm_pdf(z) + log_norm_cdf(self.alpha * z)
    }

    pub fn cdf(&self, x: T) -> T {
        let z = self.z(x);
        if z <= T::zero() {
            lower_tail(z, self.alpha)
        } else {
            T::one() - lower_tail(-z, -self.alpha)
        }
    }

    /// Survival function `1 − G(x)`, accurate in the upper tail.
    pub fn sf(&self, x: T) -> T {
        let z = self.z(x);
        if z >= T::zero() {
            lower_tail(-z, -self.alpha)
        } else {
            T::one() - lower_tail(z, self.alpha)
        }
    }

    pub fn log_cdf(&self, x: T) -> T {
        let z = self.z(x);
        if z <= T::zero() {
            log_lower_tail(z, self.alpha)
        } else {
            (-lower_tail(-z, -self.alpha)).ln_1p()
        }
    }

    pub fn log_sf(&self, x: T) -> T {
        let z = self.z(x);
        if z >= T::zero() {
            log_lower_tail(-z, -self.alpha)
        } else {
            (-lower_tail(z, self.alpha)).ln_1p()
        }
    }

    /// `(log G(x), log(1 − G(x)))` from a single tail evaluation.
    pub fn log_cdf_sf(&self, x: T) -> (T, T) {
        let z = self.z(x);
        if z <= T::zero() {
            let (v, lv) = lower_tail_with_log(z, self.alpha);
            (lv, (-v).ln_1p())
        } else {
            let (v, lv) = lower_tail_with_log(-z, -self.alpha);
            ((-v).ln_1p(), lv)
        }
    }

    /// Inverse CDF, solved to machine resolution in x.
    pub fn quantile(&self, prob: T) -> Result<T> {
        if !(prob > T::zero() && prob < T::one()) {
            return domain(format!("probability must lie in (0, 1), got {prob}"));
        }
        let (m, v) = standard_moments(self.alpha);
        let sd = v.sqrt();
        let z0 = m + sd * norm_quantile(prob);
        let alpha = self.alpha;
        let f = |z: T| {
            if z <= T::zero() {
                lower_tail(z, alpha) - prob
            } else {
                (T::one() - prob) - lower_tail(-z, -alpha)
            }
        };
        let bound = T::lit(60.0);
        let (lo, hi) = bracket_increasing(f, z0, sd, -bound, bound)?;
        let z = if lo == hi { lo } else { brent(f, lo, hi, T::zero(), 200)? };
        Ok(self.xi + self.omega * z)
    }

    /// `(mean, variance)`.
    pub fn moments(&self) -> (T, T) {
        let (m, v) = standard_moments(self.alpha);
        (self.xi + self.omega * m, self.omega * self.omega * v)
    }
}

fn standard_moments<T: Real>(alpha: T) -> (T, T) {
    let d = delta(alpha);
    let b = (T::lit(2.0) / T::PI()).sqrt();
    (d * b, T::one() - T::lit(2.0) * d * d / T::PI())
}

/// Validating density evaluation.
pub fn sn_pdf<T: Real>(x: T, p: &SkewNormalParams<T>) -> Result<T> {
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    Ok(p.pdf(x))
}

pub fn sn_cdf<T: Real>(x: T, p: &SkewNormalParams<T>) -> Result<T> {
    if x.is_nan() {
        return domain("CDF argument is NaN");
    }
    if x.is_infinite() {
        return Ok(if x > T::zero() { T::one() } else { T::zero() });
    }
    Ok(p.cdf(x))
}

pub fn sn_quantile<T: Real>(prob: T, p: &SkewNormalParams<T>) -> Result<T> {
    p.quantile(prob)
}

pub fn sn_moments<T: Real>(p: &SkewNormalParams<T>) -> (T, T) {
    p.moments()
}

/// P(Z ≤ z) for Z ~ SN(0, 1, alpha) and z ≤ 0.
fn lower_tail<T: Real>(z: T, alpha: T) -> T {
    let phi = norm_cdf(z);
    let v = phi - T::lit(2.0) * owen_t(z, alpha);
    if tail_formula_ok(v, phi, alpha) {
        v
    } else {
        log_lower_tail_by_quadrature(z, alpha).exp()
    }
}

fn lower_tail_with_log<T: Real>(z: T, alpha: T) -> (T, T) {
    let phi = norm_cdf(z);
    let v = phi - T::lit(2.0) * owen_t(z, alpha);
    if tail_formula_ok(v, phi, alpha) {
        (v, v.ln())
    } else {
        let lv = log_lower_tail_by_quadrature(z, alpha);
        (lv.exp(), lv)
    }
}

fn log_lower_tail<T: Real>(z: T, alpha: T) -> T {
    let phi = norm_cdf(z);
    let v = phi - T::lit(2.0) * owen_t(z, alpha);
    if tail_formula_ok(v, phi, alpha) {
        v.ln()
    } else {
        log_lower_tail_by_quadrature(z, alpha)
    }
}

#[inline]
fn tail_formula_ok<T: Real>(v: T, phi: T, alpha: T) -> bool {
    let tiny = T::min_positive_value() * T::lit(1e6);
    if v <= tiny {
        return false;
    }
    // For alpha > 0 the two terms cancel in the lower tail.
    alpha <= T::zero() || v > phi * T::lit(1e-3)
}

/// log ∫_{-∞}^{z} 2 φ(t) Φ(αt) dt for z ≤ 0, with the integrand scaled by
/// its value at `z` so nothing underflows.
fn log_lower_tail_by_quadrature<T: Real>(z: T, alpha: T) -> T {
    let log_g = T::LN_2() + log_norm_pdf(z) + log_norm_cdf(alpha * z);
    let log_phi_az = log_norm_cdf(alpha * z);
    // φ(z − s)/φ(z) = exp(zs − s²/2) < e^{-46} beyond this point.
    let s_max = -z.abs() + (z * z + T::lit(92.0)).sqrt();
    let ratio = |s: T| (z * s - s * s * T::lit(0.5) + log_norm_cdf(alpha * (z - s)) - log_phi_az).exp();
    let opts = QuadOptions {
        abs_tol: T::zero(),
        rel_tol: T::lit(1e-12).max(T::epsilon() * T::lit(16.0)),
        max_intervals: 200,
    };
    // Initial decay rate of the integrand; for large α it is ≈ α²|z|.
    let mills = (log_norm_pdf(alpha * z) - log_phi_az).exp();
    let rate = (-z + alpha * mills).max(T::one());
    let mut breaks = vec![T::zero()];
    let mut b = rate.recip();
    while b < s_max {
        breaks.push(b);
        b *= T::lit(8.0);
    }
    breaks.push(s_max);
    match integrate_pieces(ratio, &breaks, &opts) {
        Ok(r) => log_g + r.value.ln(),
        Err(_) => T::nan(),
    }
}

/// Owen's T function `T(h, a) = (1/2π) ∫₀^a exp(−h²(1+t²)/2) / (1+t²) dt`.
///
/// Adaptive Gauss–Kronrod on the defining integral for |a| ≤ 1; larger |a|
/// use `T(h,a) = ½Φ(h)Q(ah) + ½Φ(ah)Q(h) − T(ah, 1/a)` (h ≥ 0, a > 0).
pub fn owen_t<T: Real>(h: T, a: T) -> T {
    if h.is_nan() || a.is_nan() {
        return T::nan();
    }
    if a == T::zero() {
        return T::zero();
    }
    let sign = a.signum();
    let (h, a) = (h.abs(), a.abs());
    if h.is_infinite() {
        return T::zero();
    }
    if a.is_infinite() {
        return sign * T::lit(0.5) * norm_sf(h);
    }
    let v = if a <= T::one() {
        owen_t_integral(h, a)
    } else {
        let ah = a * h;
        T::lit(0.5) * (norm_cdf(h) * norm_sf(ah) + norm_cdf(ah) * norm_sf(h)) - owen_t_integral(ah, a.recip())
    };
    sign * v
}

/// Validating form of [`owen_t`].
pub fn try_owen_t<T: Real>(h: T, a: T) -> Result<T> {
    if !(h.is_finite() && a.is_finite()) {
        return domain(format!("Owen's T requires finite arguments (h={h}, a={a})"));
    }
    Ok(owen_t(h, a))
}

/// The defining integral for 0 < a ≤ 1 and h ≥ 0, by composite 20-point
/// Gauss–Legendre with panels sized to the Gaussian width 1/h.
fn owen_t_integral<T: Real>(h: T, a: T) -> T {
    let hh = h * h * T::lit(0.5);
    let scale = (-hh).exp();
    if scale == T::zero() {
        return T::zero();
    }
    let width = (h * a).to_f64_lossy();
    if width > OWEN_FIXED_LIMIT {
        return owen_t_adaptive(h, a);
    }
    let (rule, panels) = if width <= OWEN_SHORT_WIDTH && a <= T::lit(0.5) {
        (gauss_legendre_10(), 1)
    } else {
        (gauss_legendre_20(), (width / OWEN_PANEL_WIDTH).ceil().max(1.0) as usize)
    };
    let step = a / T::lit(panels as f64);
    let half = step * T::lit(0.5);
    let mut sum = T::zero();
    for p in 0..panels {
        let mid = step * T::lit(p as f64) + half;
        for &(x, w) in rule {
            let dx = half * T::lit(x);
            for t in [mid - dx, mid + dx] {
                let u = T::one() + t * t;
                sum += T::lit(w) * (-hh * t * t).exp() / u;
            }
        }
    }
    sum * half * scale / (T::lit(2.0) * T::PI())
}

/// Beyond this h·a the fixed rule hands over to adaptive quadrature.
const OWEN_FIXED_LIMIT: f64 = 40.0;
/// Widths handled by a single 10-point panel.
const OWEN_SHORT_WIDTH: f64 = 1.0;
/// Panel width in units of the Gaussian scale 1/h.
const OWEN_PANEL_WIDTH: f64 = 3.0;

/// Adaptive Gauss–Kronrod evaluation of the defining integral (reference
/// path, and used when the Gaussian factor is very narrow).
fn owen_t_adaptive<T: Real>(h: T, a: T) -> T {
    let hh = h * h * T::lit(0.5);
    let scale = (-hh).exp();
    if scale == T::zero() {
        return T::zero();
    }
    let base = T::lit(1e-14).max(T::epsilon() * T::lit(0.05));
    let opts = QuadOptions {
        abs_tol: base * scale.min(T::one()) * a,
        rel_tol: T::lit(1e-13).max(T::epsilon() * T::lit(8.0)),
        max_intervals: 100,
    };
    let f = |t: T| {
        let u = T::one() + t * t;
        (-hh * t * t).exp() / u
    };
    let r = match integrate(f, T::zero(), a, &opts) {
        Ok(r) => r.value,
        Err(_) => T::nan(),
    };
    r * scale / (T::lit(2.0) * T::PI())
}

/// δ = α/√(1+α²), stable for very large |α|.
#[inline]
pub fn delta<T: Real>(alpha: T) -> T {
    if alpha.abs() <= T::one() {
        alpha / (T::one() + alpha * alpha).sqrt()
    } else {
        alpha.signum() / (T::one() + (alpha * alpha).recip()).sqrt()
    }
}

/// dδ/dα = (1+α²)^{-3/2}.
#[inline]
pub fn ddelta_dalpha<T: Real>(alpha: T) -> T {
    let a2 = alpha * alpha;
    if a2.is_infinite() {
        return T::zero();
    }
    (T::one() + a2).powf(T::lit(-1.5))
}

/// α as a function of δ ∈ (−1, 1).
#[inline]
pub fn delta_to_alpha<T: Real>(delta: T) -> T {
    delta / ((T::one() - delta) * (T::one() + delta)).sqrt()
}

#[inline]
fn skew_const<T: Real>() -> T {
    (T::lit(4.0) - T::PI()) * T::lit(0.5)
}

/// Standardised third moment as a function of δ.
pub fn delta_to_gamma1<T: Real>(delta: T) -> T {
    let u2 = T::lit(2.0) * delta * delta / T::PI();
    let u = u2.sqrt() * delta.signum();
    if delta == T::zero() {
        return T::zero();
    }
    skew_const::<T>() * u * u * u / (T::one() - u2).powf(T::lit(1.5))
}

pub fn alpha_to_gamma1<T: Real>(alpha: T) -> T {
    delta_to_gamma1(delta(alpha))
}

/// dγ₁/dδ = (3(4−π)/2) u² / (1−u²)^{5/2} · √(2/π), u = δ√(2/π).
pub fn dgamma1_ddelta<T: Real>(delta: T) -> T {
    let u2 = T::lit(2.0) * delta * delta / T::PI();
    T::lit(3.0) * skew_const::<T>() * u2 / (T::one() - u2).powf(T::lit(2.5)) * (T::lit(2.0) / T::PI()).sqrt()
}

/// Supremum of |γ₁| over the skew-normal family (the δ → 1 limit).
pub fn gamma1_sup<T: Real>() -> T {
    delta_to_gamma1(T::one())
}

/// Closed-form inverse of [`delta_to_gamma1`].
pub fn gamma1_to_delta<T: Real>(gamma1: T) -> Result<T> {
    if !gamma1.is_finite() || gamma1.abs() >= gamma1_sup() {
        return domain(format!(
            "skewness {gamma1} outside the skew-normal range (−{0}, {0})",
            gamma1_sup::<T>()
        ));
    }
    if gamma1 == T::zero() {
        return Ok(T::zero());
    }
    let t = (T::lit(2.0) * gamma1.abs() / (T::lit(4.0) - T::PI())).powf(T::lit(2.0 / 3.0));
    let u2 = t / (T::one() + t);
    let d = (T::PI() * u2 * T::lit(0.5)).sqrt().min(T::one());
    Ok(gamma1.signum() * d)
}

pub fn gamma1_to_alpha<T: Real>(gamma1: T) -> Result<T> {
    let d = gamma1_to_delta(gamma1)?;
    if d.abs() >= T::one() {
        return domain(format!("skewness {gamma1} maps to an infinite shape"));
    }
    Ok(delta_to_alpha(d))
}

/// The four equivalent descriptions of skew-normal asymmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewnessScales<T> {
    pub alpha: T,
    /// α³
    pub gamma: T,
    pub gamma1: T,
    pub delta: T,
}

impl<T: Real> SkewnessScales<T> {
    pub fn from_alpha(alpha: T) -> Result<Self> {
        if !alpha.is_finite() {
            return domain(format!("shape must be finite, got {alpha}"));
        }
        Ok(Self {
            alpha,
            gamma: alpha * alpha * alpha,
            gamma1: alpha_to_gamma1(alpha),
            delta: delta(alpha),
        })
    }

    pub fn from_gamma(gamma: T) -> Result<Self> {
        Self::from_alpha(gamma.signum() * gamma.abs().cbrt())
    }

    pub fn from_gamma1(gamma1: T) -> Result<Self> {
        let alpha = gamma1_to_alpha(gamma1)?;
        Ok(Self {
            alpha,
            gamma: alpha * alpha * alpha,
            gamma1,
            delta: delta(alpha),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn std_sn(alpha: f64) -> SkewNormalParams<f64> {
        SkewNormalParams::standard(alpha).unwrap()
    }

    #[test]
    fn pdf_at_zero_is_phi0_for_any_shape() {
        for a in [-7.0, -1.0, 0.0, 0.5, 3.0, 40.0] {
            assert_relative_eq!(std_sn(a).pdf(0.0), 0.398_942_280_401_432_7, max_relative = 1e-15);
        }
    }

    #[test]
    fn fixed_rule_matches_adaptive() {
        let mut worst: f64 = 0.0;
        for i in 0..=120 {
            let h = i as f64 * 0.1;
            for j in 1..=40 {
                let a = j as f64 / 40.0;
                let fast = owen_t_integral(h, a);
                let slow = owen_t_adaptive(h, a);
                let rel = ((fast - slow) / slow).abs();
                worst = worst.max(rel);
            }
        }
        assert!(worst < 1e-13, "worst relative difference {worst:e}");
    }

    #[test]
    fn owen_t_identities() {
        assert_relative_eq!(owen_t(0.0, 1.0), 0.125, max_relative = 1e-14);
        let p = norm_cdf(1.0_f64);
        assert_relative_eq!(owen_t(1.0, 1.0), 0.5 * p * (1.0 - p), max_relative = 1e-13);
        assert_relative_eq!(owen_t(0.0, 3.0), 3f64.atan() / (2.0 * std::f64::consts::PI), max_relative = 1e-13);
        assert_eq!(owen_t(1.3, -0.7), -owen_t(1.3, 0.7));
        assert_eq!(owen_t(-1.3, 0.7), owen_t(1.3, 0.7));
        assert!(try_owen_t(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn cdf_at_zero_matches_arctan_identity() {
        for a in [-5.0, -1.0, 0.0, 1.0, 2.5] {
            let expect = 0.5 - f64::atan(a) / std::f64::consts::PI;
            assert_relative_eq!(std_sn(a).cdf(0.0), expect, max_relative = 1e-13);
        }
        assert_relative_eq!(std_sn(1.0).cdf(0.0), 0.25, max_relative = 1e-13);
    }

    #[test]
    fn light_tail_uses_stable_path() {
        // For alpha>0 far in the lower tail, Φ(z) − 2T cancels; the
        // log-scale tail must still be finite and decreasing.
        let p = std_sn(5.0);
        let mut prev = 0.0;
        for i in 0..40 {
            let x = -0.5 - 0.25 * i as f64;
            let l = p.log_cdf(x);
            assert!(l.is_finite(), "x={x}");
            assert!(l < prev);
            prev = l;
        }
        // Leading-order asymptote (1/(π α (1+α²) z²)) exp(−(1+α²)z²/2).
        let z: f64 = -8.0;
        let a: f64 = 5.0;
        let approx = -(1.0 + a * a) * z * z / 2.0 - (std::f64::consts::PI * a * (1.0 + a * a) * z * z).ln();
        assert!((p.log_cdf(z) - approx).abs() < 0.05);
    }

    #[test]
    fn cdf_sf_complement() {
        let p = SkewNormalParams::new(0.3, 1.7, -2.2).unwrap();
        for i in -20..=20 {
            let x = i as f64 * 0.4;
            assert!((p.cdf(x) + p.sf(x) - 1.0).abs() < 1e-14);
            assert_relative_eq!(p.log_cdf(x).exp(), p.cdf(x), max_relative = 1e-12);
            assert_relative_eq!(p.log_sf(x).exp(), p.sf(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn quantile_examples() {
        assert!(std_sn(0.0).quantile(0.5).unwrap().abs() < 1e-15);
        assert!(std_sn(1.0).quantile(0.25).unwrap().abs() < 1e-13);
        assert!(std_sn(1.0).quantile(1.0).is_err());
        assert!(std_sn(1.0).quantile(0.0).is_err());
    }

    #[test]
    fn moments_examples() {
        let (m, v) = std_sn(0.0).moments();
        assert_eq!((m, v), (0.0, 1.0));
        let (m, v) = std_sn(1.0).moments();
        assert_relative_eq!(m, 0.564_189_583_547_756_3, max_relative = 1e-14);
        assert_relative_eq!(v, 1.0 - 1.0 / std::f64::consts::PI, max_relative = 1e-14);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SkewNormalParams::new(0.0, 0.0, 1.0).is_err());
        assert!(SkewNormalParams::new(0.0, -1.0, 1.0).is_err());
        assert!(SkewNormalParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(sn_pdf(f64::INFINITY, &std_sn(1.0)).is_err());
    }

    #[test]
    fn gamma1_examples() {
        assert_eq!(alpha_to_gamma1(0.0), 0.0);
        assert!((gamma1_sup::<f64>() - 0.99527).abs() < 5e-6);
        assert_relative_eq!(alpha_to_gamma1(1e12), gamma1_sup::<f64>(), max_relative = 1e-12);
        let g = alpha_to_gamma1(2.0);
        assert_relative_eq!(gamma1_to_alpha(g).unwrap(), 2.0, max_relative = 1e-10);
        assert_eq!(gamma1_to_alpha(0.0).unwrap(), 0.0);
        assert!(gamma1_to_alpha(0.9953).is_err());
        assert!(gamma1_to_alpha(-1.0).is_err());
    }

    #[test]
    fn gamma1_of_simulation_scenarios() {
        // The closed-form inverse gives α ≈ 3.00 for γ₁ = 2/3 and
        // α ≈ ±1.60 for γ₁ = ±1/3; the forward map confirms both.
        let a = gamma1_to_alpha(2.0_f64 / 3.0).unwrap();
        assert_relative_eq!(a, 2.997_716_620_725_43, max_relative = 1e-10);
        assert_relative_eq!(alpha_to_gamma1(a), 2.0 / 3.0, max_relative = 1e-12);
        let b = gamma1_to_alpha(-1.0_f64 / 3.0).unwrap();
        assert_relative_eq!(b, -1.601_083_218_741_607, max_relative = 1e-10);
        assert_eq!(gamma1_to_alpha(1.0_f64 / 3.0).unwrap(), -b);
        // Larger shapes sit much closer to the bound.
        assert!(alpha_to_gamma1(10.0_f64) > 0.95);
    }

    #[test]
    fn skewness_scales_are_consistent() {
        let s = SkewnessScales::from_alpha(-1.5_f64).unwrap();
        assert_relative_eq!(s.gamma, -3.375);
        let t = SkewnessScales::from_gamma(s.gamma).unwrap();
        assert_relative_eq!(t.alpha, -1.5, max_relative = 1e-14);
        let u = SkewnessScales::from_gamma1(s.gamma1).unwrap();
        assert_relative_eq!(u.alpha, -1.5, max_relative = 1e-10);
        assert_relative_eq!(u.delta, -1.5 / (1.0f64 + 2.25).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn derivative_of_gamma1() {
        for d in [-0.9, -0.3, 0.2, 0.7, 0.95] {
            let h = 1e-6;
            let fd = (delta_to_gamma1(d + h) - delta_to_gamma1(d - h)) / (2.0 * h);
            assert_relative_eq!(dgamma1_ddelta(d), fd, max_relative = 1e-7);
        }
    }

    #[test]
    fn generic_f32() {
        let p = SkewNormalParams::<f32>::standard(2.0).unwrap();
        assert!((p.cdf(0.0) - (0.5 - 2f32.atan() / std::f32::consts::PI)).abs() < 1e-6);
        let x = p.quantile(0.3).unwrap();
        assert!((p.cdf(x) - 0.3).abs() < 1e-5);
    }
}
