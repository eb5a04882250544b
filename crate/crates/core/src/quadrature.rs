//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::real::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-10),
            max_intervals: 500,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

#[inline]
fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let half = (b - a) * T::lit(0.5);
    let center = (a + b) * T::lit(0.5);
    let fc = f(center);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kron += s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += s * T::lit(WG[j / 2]);
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`. Fails with diagnostics when the interval
/// budget is exhausted or the integrand produces non-finite values.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let first = kronrod(&mut f, a, b);
    let tol = |v: T| opts.abs_tol.max(opts.rel_tol * v.abs());
    if !first.value.is_finite() {
        return Err(non_finite(a, b));
    }
    if first.error <= tol(first.value) {
        return Ok(QuadResult {
            value: first.value,
            error: first.error,
            intervals: 1,
        });
    }
    let mut panels = Vec::with_capacity(16);
    panels.push(first);
    let (mut total, mut total_err) = (first.value, first.error);
    while total_err > tol(total) {
        if panels.len() >= opts.max_intervals {
            // Round-off limited: report only if we are far from the target.
            if total_err > tol(total) * T::lit(1e3) {
                return Err(Error::Numerical {
                    context: "adaptive quadrature",
                    detail: format!(
                        "interval budget {} exhausted on [{}, {}]: estimate {}, error {}",
                        opts.max_intervals, a, b, total, total_err
                    ),
                });
            }
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::lit(0.5);
        if mid <= p.a || mid >= p.b {
            break;
        }
        let left = kronrod(&mut f, p.a, mid);
        let right = kronrod(&mut f, mid, p.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(non_finite(p.a, p.b));
        }
        total = total - p.value + left.value + right.value;
        panels.push(left);
        panels.push(right);
        // Resum the error to avoid drift from repeated subtraction.
        total_err = panels.iter().fold(T::zero(), |s, p| s + p.error);
    }
    total = panels.iter().fold(T::zero(), |s, p| s + p.value);
    Ok(QuadResult {
        value: total,
        error: total_err,
        intervals: panels.len(),
    })
}

/// Integrates over consecutive sub-intervals delimited by `breaks`
/// (which must be sorted), summing values and error estimates.
pub fn integrate_pieces<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breaks: &[T],
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    let mut out = QuadResult {
        value: T::zero(),
        error: T::zero(),
        intervals: 0,
    };
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], opts)?;
        out.value += r.value;
        out.error += r.error;
        out.intervals += r.intervals;
    }
    Ok(out)
}

/// Integrates over `[a, ∞)` through the map x = a + t / (1 − t).
pub fn integrate_to_infinity<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    integrate(
        |t: T| {
            let one_m = T::one() - t;
            let x = a + t / one_m;
            let v = f(x);
            if v == T::zero() {
                T::zero()
            } else {
                v / (one_m * one_m)
            }
        },
        T::zero(),
        T::one(),
        opts,
    )
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// positive half only (nodes ascending; the rule is symmetric).
pub fn gauss_legendre_half(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n.div_ceil(2));
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        let (x, w) = if n % 2 == 1 && i == n / 2 { (0.0, w) } else { (x, w) };
        out.push((x, w));
    }
    out.reverse();
    out
}

/// 10-point Gauss–Legendre half rule, computed once.
pub fn gauss_legendre_10() -> &'static [(f64, f64)] {
    static RULE: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_half(10))
}

/// 20-point Gauss–Legendre half rule, computed once.
pub fn gauss_legendre_20() -> &'static [(f64, f64)] {
    static RULE: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_half(20))
}

fn non_finite<T: Real>(a: T, b: T) -> Error {
    Error::Numerical {
        context: "adaptive quadrature",
        detail: format!("non-finite integrand on [{a}, {b}]"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact_in_one_panel() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn adapts_to_a_kink() {
        let r = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, &QuadOptions::new(1e-13, 1e-13)).unwrap();
        assert!((r.value - (1.3 * 1.3 / 2.0 + 0.7 * 0.7 / 2.0)).abs() < 1e-12);
        assert!(r.intervals > 1);
    }

    #[test]
    fn gaussian_half_line() {
        let r = integrate_to_infinity(|x: f64| (-x * x / 2.0).exp(), 0.0, &QuadOptions::new(1e-14, 1e-13)).unwrap();
        assert!((r.value - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reports_non_finite_integrand() {
        let err = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &QuadOptions::default());
        assert!(err.is_err());
    }

    #[test]
    fn single_precision_works() {
        let r = integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI, &QuadOptions::new(1e-6, 1e-6)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }
}
