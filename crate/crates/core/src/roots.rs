//! Bracketed scalar root finding.

use crate::error::{Error, Result};
use crate::real::Real;

/// Brent's method: inverse quadratic / secant steps safeguarded by
/// bisection. `f(lo)` and `f(hi)` must have opposite signs (or one be 0).
///
/// Iterates until the bracket is narrower than `xtol` (plus a few ulps of
/// the iterate), so passing `xtol = 0` drives the bracket to machine
/// resolution.
pub fn brent<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, xtol: T, max_iter: usize) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NotBracketed {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let two = T::lit(2.0);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + xtol * T::lit(0.5);
        let m = (c - b) * T::lit(0.5);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = b + if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Numerical {
                context: "brent",
                detail: format!("function returned NaN at {b}"),
            });
        }
    }
    Err(Error::Numerical {
        context: "brent",
        detail: format!("no convergence after {max_iter} iterations; last iterate {b}"),
    })
}

/// Grows a bracket around `x0` for an increasing function `f` until
/// `f(lo) <= 0 <= f(hi)`, doubling the step each time and never leaving
/// `[floor, ceil]`.
pub fn bracket_increasing<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    x0: T,
    step: T,
    floor: T,
    ceil: T,
) -> Result<(T, T)> {
    let x0 = x0.max(floor).min(ceil);
    let f0 = f(x0);
    let mut step = step.abs().max(T::lit(1e-3));
    if f0 == T::zero() {
        return Ok((x0, x0));
    }
    let mut inner = x0;
    loop {
        let outer = if f0 > T::zero() {
            (inner - step).max(floor)
        } else {
            (inner + step).min(ceil)
        };
        let fo = f(outer);
        let crossed = if f0 > T::zero() { fo <= T::zero() } else { fo >= T::zero() };
        if crossed {
            return Ok(if f0 > T::zero() { (outer, inner) } else { (inner, outer) });
        }
        if outer == floor || outer == ceil {
            return Err(Error::NotBracketed {
                lo: floor.to_f64_lossy(),
                hi: ceil.to_f64_lossy(),
            });
        }
        inner = outer;
        step = step * T::lit(2.0);
    }
}
