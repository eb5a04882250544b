//! The zero-mean, unit-variance skew-normal link and the quantile intercept.

use crate::error::{domain, Result};
use crate::real::Real;
use crate::roots::{brent, bracket_increasing};
use crate::sn_core::{delta, SkewNormalParams};
use crate::special::{log_norm_cdf, log_norm_sf, norm_cdf, norm_quantile};

/// Bracket limit (in standardized units) for the intercept search.
pub const INTERCEPT_BRACKET: f64 = 40.0;

/// `(xi_std, omega_std)` such that SN(xi_std, omega_std, alpha) has mean 0
/// and variance 1.
pub fn std_params<T: Real>(alpha: T) -> (T, T) {
    let d = delta(alpha);
    let b = T::lit(2.0) / T::PI();
    let omega = (T::one() - b * d * d).sqrt().recip();
    let xi = -omega * d * b.sqrt();
    (xi, omega)
}

/// The link `F(·|α)`: CDF of the standardized skew-normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedLink<T> {
    alpha: T,
    dist: SkewNormalParams<T>,
}

impl<T: Real> StandardizedLink<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !alpha.is_finite() {
            return domain(format!("link shape must be finite, got {alpha}"));
        }
        let (xi, omega) = std_params(alpha);
        Ok(Self {
            alpha,
            dist: SkewNormalParams::new(xi, omega, alpha)?,
        })
    }

    pub fn probit() -> Self {
        Self::new(T::zero()).expect("probit link")
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn xi_std(&self) -> T {
        self.dist.xi()
    }
    pub fn omega_std(&self) -> T {
        self.dist.omega()
    }
    pub fn distribution(&self) -> &SkewNormalParams<T> {
        &self.dist
    }

    /// F(η|α).
    #[inline]
    pub fn cdf(&self, eta: T) -> T {
        if self.alpha == T::zero() {
            norm_cdf(eta)
        } else {
            self.dist.cdf(eta)
        }
    }

    #[inline]
    pub fn log_cdf(&self, eta: T) -> T {
        if self.alpha == T::zero() {
            log_norm_cdf(eta)
        } else {
            self.dist.log_cdf(eta)
        }
    }

    /// log(1 − F(η|α)).
    #[inline]
    pub fn log_sf(&self, eta: T) -> T {
        if self.alpha == T::zero() {
            log_norm_sf(eta)
        } else {
            self.dist.log_sf(eta)
        }
    }

    /// `(log F(η|α), log(1 − F(η|α)))`.
    #[inline]
    pub fn log_cdf_sf(&self, eta: T) -> (T, T) {
        if self.alpha == T::zero() {
            (log_norm_cdf(eta), log_norm_sf(eta))
        } else {
            self.dist.log_cdf_sf(eta)
        }
    }

    pub fn pdf(&self, x: T) -> T {
        self.dist.pdf(x)
    }

    pub fn log_pdf(&self, x: T) -> T {
        self.dist.log_pdf(x)
    }

    /// β₀(q, α) = F⁻¹(q|α).
    pub fn quantile_intercept(&self, q: T) -> Result<T> {
        if !(q > T::zero() && q < T::one()) {
            return domain(format!("intercept quantile must lie in (0, 1), got {q}"));
        }
        if self.alpha == T::zero() {
            return Ok(norm_quantile(q));
        }
        let dist = self.dist;
        // Evaluate the smaller tail directly so both ends keep relative precision.
        let f = |x: T| {
            let c = dist.cdf(x);
            if c < T::lit(0.5) {
                c - q
            } else {
                (T::one() - q) - dist.sf(x)
            }
        };
        let lim = T::lit(INTERCEPT_BRACKET);
        let (lo, hi) = bracket_increasing(f, norm_quantile(q), T::one(), -lim, lim)?;
        if lo == hi {
            return Ok(lo);
        }
        brent(f, lo, hi, T::zero(), 200)
    }
}

/// F(η|α).
pub fn link_eval<T: Real>(eta: T, alpha: T) -> Result<T> {
    if !eta.is_finite() {
        return domain(format!("linear predictor must be finite, got {eta}"));
    }
    Ok(StandardizedLink::new(alpha)?.cdf(eta))
}

pub fn quantile_intercept<T: Real>(q: T, alpha: T) -> Result<T> {
    StandardizedLink::new(alpha)?.quantile_intercept(q)
}

/// Intercept expressed as a quantile level `q` together with the β₀ it
/// implies for the current shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileIntercept<T> {
    pub q: T,
    pub beta0: T,
}

impl<T: Real> QuantileIntercept<T> {
    pub fn new(q: T, alpha: T) -> Result<Self> {
        Ok(Self {
            q,
            beta0: quantile_intercept(q, alpha)?,
        })
    }
}

/// Log density of `q` induced by β₀ ~ N(mu0, 1/prec0) through q = Φ(β₀).
///
/// Returns −∞ outside the open unit interval.
pub fn q_logprior<T: Real>(q: T, mu0: T, prec0: T) -> Result<T> {
    if !(prec0 > T::zero() && prec0.is_finite() && mu0.is_finite()) {
        return domain(format!("q prior needs finite mean and positive precision (mu0={mu0}, prec0={prec0})"));
    }
    if q.is_nan() {
        return domain("q is NaN");
    }
    if q <= T::zero() || q >= T::one() {
        return Ok(T::neg_infinity());
    }
    let z = norm_quantile(q);
    let half = T::lit(0.5);
    Ok(half * prec0.ln() - half * prec0 * (z - mu0) * (z - mu0) + half * z * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn probit_anchor() {
        assert_eq!(std_params(0.0_f64), (0.0, 1.0));
        let l = StandardizedLink::<f64>::probit();
        assert_eq!(l.cdf(0.0), 0.5);
        assert_relative_eq!(link_eval(norm_quantile(0.75), 0.0).unwrap(), 0.75, max_relative = 1e-14);
    }

    #[test]
    fn std_params_at_one() {
        let (xi, omega) = std_params(1.0_f64);
        let pi = std::f64::consts::PI;
        let om = (1.0 - 1.0 / pi).powf(-0.5);
        assert_relative_eq!(omega, om, max_relative = 1e-14);
        assert_relative_eq!(xi, -om * (1.0 / pi).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(omega, 1.211_173_896_236_317, max_relative = 1e-12);
        assert_relative_eq!(xi, -0.683_331_696_121_481, max_relative = 1e-12);
    }

    #[test]
    fn standardized_moments() {
        for a in [-30.0_f64, -2.0, 0.0, 0.3, 4.0, 1e4] {
            let l = StandardizedLink::new(a).unwrap();
            let (m, v) = l.distribution().moments();
            assert!(m.abs() < 1e-12, "alpha={a} mean={m}");
            assert!((v - 1.0).abs() < 1e-12, "alpha={a} var={v}");
        }
    }

    #[test]
    fn intercept_examples() {
        assert_eq!(quantile_intercept(0.5, 0.0_f64).unwrap(), 0.0);
        assert_relative_eq!(quantile_intercept(0.75, 0.0_f64).unwrap(), 0.674_489_750_196_081_7, max_relative = 1e-14);
        for a in [-8.0, -1.0, 0.7, 2.0, 15.0] {
            for q in [1e-6_f64, 0.05, 1.0 / 3.0, 0.9, 0.999_999] {
                let b = quantile_intercept(q, a).unwrap();
                assert!((link_eval(b, a).unwrap() - q).abs() < 1e-12 * q.max(1e-3), "q={q} a={a}");
            }
        }
        assert!(quantile_intercept(0.0, 1.0_f64).is_err());
        assert!(quantile_intercept(1.0, 1.0_f64).is_err());
    }

    #[test]
    fn q_prior_examples() {
        assert_eq!(q_logprior(0.5, 0.0, 1.0_f64).unwrap(), 0.0);
        for q in [0.01, 0.2, 0.7, 0.999] {
            assert!(q_logprior(q, 0.0, 1.0_f64).unwrap().abs() < 1e-12);
        }
        assert_eq!(q_logprior(0.0, 0.0, 1.0_f64).unwrap(), f64::NEG_INFINITY);
        assert!(q_logprior(0.5, 0.0, 0.0_f64).is_err());
    }

    #[test]
    fn quantile_intercept_struct() {
        let qi = QuantileIntercept::new(0.3, -2.0_f64).unwrap();
        assert_relative_eq!(link_eval(qi.beta0, -2.0).unwrap(), 0.3, max_relative = 1e-12);
    }
}
