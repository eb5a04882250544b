//! Posterior computation: MAP with a finite-difference Hessian, Laplace
//! evidence, adaptive random-walk Metropolis and posterior summaries.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::models::{Dataset, Model, SkewScale};
use crate::quadrature::gauss_legendre_20;
use crate::special::norm_quantile;

const LN_2PI: f64 = 1.8378770664093453;

/// Central-difference gradient with step 1e-6·(1+|xᵢ|).
pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * (1.0 + x[i].abs());
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian with step 1e-4·(1+|xᵢ|).
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let k = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * (1.0 + v.abs())).collect();
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut out = DMatrix::zeros(k, k);
    for i in 0..k {
        p[i] = x[i] + h[i];
        let up = f(&p);
        p[i] = x[i] - h[i];
        let down = f(&p);
        p[i] = x[i];
        out[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * h[i];
                p[j] = x[j] + sj * h[j];
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h[i] * h[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    /// BFGS iteration limit.
    pub max_iter: usize,
    /// Sup-norm gradient tolerance.
    pub grad_tol: f64,
    /// Nelder–Mead evaluation budget per coordinate.
    pub simplex_evals_per_dim: usize,
    /// Initial simplex edge.
    pub simplex_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            simplex_evals_per_dim: 150,
            simplex_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// The line search stalled at a point no coordinate probe could improve
    /// (typically a kink of the log posterior).
    pub stalled: bool,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Derivative-free simplex ascent; returns the best vertex and its value.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let k = x0.len();
    if k == 0 {
        return (Vec::new(), f(x0));
    }
    let n = k as f64;
    // Dimension-adapted coefficients.
    let (refl, expand, contract, shrink) = (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n);
    let cost = |x: &[f64]| {
        let v = -f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((x0.to_vec(), cost(x0)));
    for i in 0..k {
        let mut v = x0.to_vec();
        v[i] += step * (1.0 + x0[i].abs().min(10.0));
        let c = cost(&v);
        simplex.push((v, c));
    }
    let mut evals = k + 1;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[k].1);
        let spread = (worst - best).abs();
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0f64, f64::max);
        if spread <= 1e-12 * (1.0 + best.abs()) && size < 1e-9 {
            break;
        }
        let centroid: Vec<f64> = (0..k).map(|j| simplex[..k].iter().map(|(v, _)| v[j]).sum::<f64>() / n).collect();
        let along = |t: f64| -> Vec<f64> { (0..k).map(|j| centroid[j] + t * (simplex[k].0[j] - centroid[j])).collect() };
        let xr = along(-refl);
        let fr = cost(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-refl * expand);
            let fe = cost(&xe);
            evals += 1;
            simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[k - 1].1 {
            simplex[k] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[k].1 {
                let xc = along(-refl * contract);
                let fc = cost(&xc);
                (xc, fc)
            } else {
                let xc = along(contract);
                let fc = cost(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < fr.min(simplex[k].1) {
                simplex[k] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for j in 0..k {
                        vertex.0[j] = x_best[j] + shrink * (vertex.0[j] - x_best[j]);
                    }
                    vertex.1 = cost(&vertex.0);
                }
                evals += k;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, c) = simplex.swap_remove(0);
    (x, -c)
}

/// Quasi-Newton ascent with finite-difference gradients.
pub fn bfgs<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
    bfgs_from(f, x0, None, opts)
}

/// BFGS started from the inverse curvature `inv0` (an estimate of the
/// covariance, i.e. the inverse of minus the Hessian).
pub fn bfgs_preconditioned<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], inv0: &DMatrix<f64>, opts: &OptimOptions) -> Result<OptimResult> {
    if inv0.nrows() != x0.len() || inv0.ncols() != x0.len() {
        return Err(Error::Dimension {
            expected: x0.len(),
            got: inv0.nrows(),
        });
    }
    bfgs_from(f, x0, Some(inv0), opts)
}

fn bfgs_from<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], inv0: Option<&DMatrix<f64>>, opts: &OptimOptions) -> Result<OptimResult> {
    let k = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    if !fx.is_finite() {
        return domain("objective is not finite at the starting point");
    }
    if k == 0 {
        return Ok(OptimResult {
            x: Vec::new(),
            value: fx,
            grad_norm: 0.0,
            iterations: 0,
            stalled: false,
        });
    }
    let mut g = DVector::from_vec(gradient(f, x.as_slice()));
    let mut inv = inv0.cloned().unwrap_or_else(|| DMatrix::<f64>::identity(k, k));
    let mut fresh = inv0.is_none();
    for iter in 0..opts.max_iter {
        let gn = sup_norm(g.as_slice());
        if gn < opts.grad_tol {
            return Ok(OptimResult {
                x: x.as_slice().to_vec(),
                value: fx,
                grad_norm: gn,
                iterations: iter,
                stalled: false,
            });
        }
        // Ascent direction.
        let mut dir = &inv * &g;
        let mut slope = dir.dot(&g);
        if !(slope > 0.0) {
            inv = DMatrix::identity(k, k);
            dir = g.clone();
            slope = dir.dot(&g);
            fresh = true;
        }
        if fresh {
            let scale = 1.0 / sup_norm(dir.as_slice()).max(1.0);
            dir *= scale;
            slope *= scale;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + t * &dir;
            let ft = f(trial.as_slice());
            if ft.is_finite() && ft >= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if !fresh {
                inv = DMatrix::identity(k, k);
                fresh = true;
                continue;
            }
            return stall_or_fail(f, x.as_slice(), fx, gn, iter);
        };
        let g_new = DVector::from_vec(gradient(f, x_new.as_slice()));
        let s = &x_new - &x;
        // Minimization form: y = ∇(−f)_new − ∇(−f)_old.
        let y = &g - &g_new;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                let yy = y.dot(&y);
                inv = DMatrix::identity(k, k) * (sy / yy);
            }
            let rho = 1.0 / sy;
            let i_k = DMatrix::<f64>::identity(k, k);
            let left = &i_k - rho * &s * y.transpose();
            let right = &i_k - rho * &y * s.transpose();
            inv = &left * &inv * &right + rho * &s * s.transpose();
            fresh = false;
        }
        let improved = f_new - fx;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improved.abs() <= 1e-15 * (1.0 + fx.abs()) && sup_norm(s.as_slice()) < 1e-12 {
            return stall_or_fail(f, x.as_slice(), fx, sup_norm(g.as_slice()), iter);
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        grad_norm: sup_norm(g.as_slice()),
        best_value: fx,
        best_point: x.as_slice().to_vec(),
    })
}

/// Accepts a stalled point if no coordinate probe improves it.
fn stall_or_fail<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, gn: f64, iter: usize) -> Result<OptimResult> {
    let mut p = x.to_vec();
    let tol = 1e-10 * (1.0 + fx.abs());
    for i in 0..x.len() {
        for scale in [1e-6, 1e-4] {
            let h = scale * (1.0 + x[i].abs());
            for sign in [1.0, -1.0] {
                p[i] = x[i] + sign * h;
                let v = f(&p);
                p[i] = x[i];
                if v > fx + tol {
                    return Err(Error::NoConvergence {
                        iterations: iter,
                        grad_norm: gn,
                        best_value: fx,
                        best_point: x.to_vec(),
                    });
                }
            }
        }
    }
    Ok(OptimResult {
        x: x.to_vec(),
        value: fx,
        grad_norm: gn,
        iterations: iter,
        stalled: true,
    })
}

/// Simplex refinement followed by BFGS.
pub fn maximize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
    if !f(x0).is_finite() {
        return domain("log posterior is not finite at the initial point");
    }
    let budget = opts.simplex_evals_per_dim * x0.len().max(1);
    let (start, _) = nelder_mead(f, x0, opts.simplex_step, budget);
    bfgs(f, &start, opts)
}

/// log Z ≈ logpost(MAP) + (k/2) log 2π − ½ log det(−H).
pub fn laplace_evidence(log_post_at_map: f64, hessian: &DMatrix<f64>) -> Result<f64> {
    let k = hessian.nrows();
    if k == 0 {
        return Ok(log_post_at_map);
    }
    let neg = -hessian;
    let chol = Cholesky::new(neg).ok_or_else(|| {
        Error::NotNegativeDefinite(format!("Hessian at the mode is not negative definite (dimension {k})"))
    })?;
    let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    Ok(log_post_at_map + 0.5 * k as f64 * LN_2PI - 0.5 * log_det)
}

/// Inverse of −H, if −H is positive definite.
pub fn laplace_covariance(hessian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(-hessian)
        .ok_or_else(|| Error::NotNegativeDefinite("Hessian at the mode is not negative definite".into()))?;
    let cov = chol.inverse();
    Ok((&cov + cov.transpose()) * 0.5)
}

/// Evidence with one coordinate integrated numerically: for each value of
/// coordinate `index` the remaining coordinates get a Laplace approximation,
/// and the resulting curve is integrated by Gauss–Legendre quadrature (split
/// at `kink`, where the integrand need not be smooth).
///
/// Conditional fits stay inside `window`; mass beyond it is taken from an
/// exponential tail matched to the curve's slope at the edge.
pub fn integrated_laplace_evidence<F: Fn(&[f64]) -> f64>(
    f: &F,
    map: &[f64],
    index: usize,
    kink: Option<f64>,
    window: Option<(f64, f64)>,
    opts: &OptimOptions,
) -> Result<f64> {
    let k = map.len();
    if index >= k {
        return Err(Error::Dimension { expected: k, got: index });
    }
    let rest0: Vec<f64> = map.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, v)| *v).collect();
    let full = |u: f64, rest: &[f64]| {
        let mut p = Vec::with_capacity(k);
        p.extend_from_slice(&rest[..index]);
        p.push(u);
        p.extend_from_slice(&rest[index..]);
        p
    };
    let rest_idx: Vec<usize> = (0..k).filter(|&i| i != index).collect();
    let h_map = hessian(f, map);
    let neg_rr = DMatrix::from_fn(k - 1, k - 1, |r, c| -h_map[(rest_idx[r], rest_idx[c])]);
    let inv0 = Cholesky::new(neg_rr)
        .map(|c| c.inverse())
        .unwrap_or_else(|| DMatrix::identity(k - 1, k - 1));
    let warm = std::cell::RefCell::new(vec![(map[index], rest0.clone())]);
    let conditional = |u: f64| -> Result<f64> {
        if k == 1 {
            return Ok(f(&[u]));
        }
        let start = {
            let w = warm.borrow();
            w.iter()
                .min_by(|a, b| (a.0 - u).abs().total_cmp(&(b.0 - u).abs()))
                .map(|(_, r)| r.clone())
                .unwrap_or_else(|| rest0.clone())
        };
        let g = |rest: &[f64]| f(&full(u, rest));
        let fit = match bfgs_preconditioned(&g, &start, &inv0, opts) {
            Ok(r) => r,
            Err(_) => maximize(&g, &start, opts)?,
        };
        let h = hessian(&g, &fit.x);
        let value = laplace_evidence(fit.value, &h)?;
        warm.borrow_mut().push((u, fit.x));
        Ok(value)
    };

    let center = map[index];
    let peak = conditional(center)?;
    let sd = Cholesky::new(-h_map.clone())
        .map(|c| c.inverse()[(index, index)].sqrt())
        .filter(|v| v.is_finite() && *v > 0.0)
        .unwrap_or(0.1);
    let (w_lo, w_hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if !(w_lo < center && center < w_hi) {
        return domain(format!("mode {center} outside the integration window ({w_lo}, {w_hi})"));
    }
    let drop = 30.0;
    let mut bounds = [center, center];
    let mut tail_mass = 0.0;
    for (side, dir, edge) in [(0usize, -1.0f64, w_lo), (1, 1.0, w_hi)] {
        let mut step = (0.5 * sd).max(0.01);
        let mut u = center;
        for _ in 0..40 {
            u += dir * step;
            if (u - edge) * dir >= 0.0 {
                u = edge;
                let c_edge = conditional(edge)?;
                if c_edge >= peak - drop {
                    let eps = 0.05 * (edge - center).abs();
                    let slope = (c_edge - conditional(edge - dir * eps)?) / eps;
                    if !(slope < 0.0) {
                        return Err(Error::Numerical {
                            context: "integrated evidence",
                            detail: format!("curve not decaying at the window edge {edge}"),
                        });
                    }
                    tail_mass += (c_edge - peak).exp() / -slope;
                }
                break;
            }
            if conditional(u)? < peak - drop {
                break;
            }
            step *= 1.6;
        }
        bounds[side] = u;
    }
    let mut breaks = vec![bounds[0]];
    if let Some(c) = kink.filter(|c| *c > bounds[0] && *c < bounds[1]) {
        breaks.push(c);
    }
    breaks.push(bounds[1]);
    // The curve is smooth within each piece, so one Gauss–Legendre panel
    // per piece suffices and keeps the number of conditional fits small.
    let rule = gauss_legendre_20();
    let mut total = tail_mass;
    for w in breaks.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for &(x, wt) in rule {
            let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
            for &t in nodes {
                total += half * wt * (conditional(mid + half * t)? - peak).exp();
            }
        }
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical {
            context: "integrated evidence",
            detail: format!("integral {total}"),
        });
    }
    Ok(peak + total.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcOptions {
    pub chains: usize,
    /// Iterations per chain, warmup included.
    pub iterations: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            chains: 4,
            iterations: 10_000,
            warmup: 5_000,
            seed: 1,
        }
    }
}

/// Post-warmup draws on the unconstrained scale, per chain.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcOutput {
    pub draws: Vec<Vec<Vec<f64>>>,
    /// Post-warmup acceptance rate per chain.
    pub acceptance: Vec<f64>,
    /// Final proposal scale per chain.
    pub scale: Vec<f64>,
}

fn target_acceptance(k: usize) -> f64 {
    if k == 1 {
        0.44
    } else {
        0.234
    }
}

struct Proposal {
    chol: DMatrix<f64>,
    log_scale: f64,
}

impl Proposal {
    fn new(cov: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        Cholesky::<f64, Dyn>::new(cov.clone()).map(|c| c.l())
    }
}

fn run_chain<F: Fn(&[f64]) -> f64>(
    log_target: &F,
    init: &[f64],
    init_chol: &DMatrix<f64>,
    opts: &McmcOptions,
    chain: usize,
) -> Result<(Vec<Vec<f64>>, f64, f64)> {
    let k = init.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(chain as u64);
    let normal = |rng: &mut ChaCha8Rng| -> DVector<f64> {
        DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(rng)))
    };
    let mut prop = Proposal {
        chol: init_chol.clone(),
        log_scale: (2.38 / (k as f64).sqrt()).ln(),
    };
    // Over-dispersed start around the mode.
    let mut x = DVector::from_column_slice(init);
    let mut fx = f64::NEG_INFINITY;
    for _ in 0..100 {
        let cand = DVector::from_column_slice(init) + &prop.chol * normal(&mut rng);
        let fc = log_target(cand.as_slice());
        if fc.is_finite() {
            x = cand;
            fx = fc;
            break;
        }
    }
    if !fx.is_finite() {
        x = DVector::from_column_slice(init);
        fx = log_target(init);
        if !fx.is_finite() {
            return domain("log posterior is not finite at the MCMC starting point");
        }
    }
    let target = target_acceptance(k);
    let mut mean = DVector::zeros(k);
    let mut scatter = DMatrix::zeros(k, k);
    let mut n_adapt = 0usize;
    let adapt_from = opts.warmup / 4;
    let mut kept = Vec::with_capacity(opts.iterations - opts.warmup);
    let mut accepted_after = 0usize;
    for it in 0..opts.iterations {
        let z = normal(&mut rng);
        let cand = &x + prop.log_scale.exp() * (&prop.chol * z);
        let fc = log_target(cand.as_slice());
        let log_u: f64 = {
            let u: f64 = rand::Rng::gen(&mut rng);
            u.ln()
        };
        let log_ratio = if fc.is_finite() { fc - fx } else { f64::NEG_INFINITY };
        let accept = log_u < log_ratio;
        if accept {
            x = cand;
            fx = fc;
        }
        if it < opts.warmup {
            let a = log_ratio.min(0.0).exp();
            prop.log_scale += (a - target) / ((it + 1) as f64).powf(0.6);
            if it >= adapt_from {
                n_adapt += 1;
                let delta = &x - &mean;
                mean += &delta / n_adapt as f64;
                scatter += &delta * (&x - &mean).transpose();
                if n_adapt >= 100.max(10 * k) && n_adapt % 50 == 0 {
                    let mut cov = &scatter / (n_adapt - 1) as f64;
                    let ridge = 1e-10 * (cov.trace() / k as f64).max(1e-300);
                    for i in 0..k {
                        cov[(i, i)] += ridge;
                    }
                    if let Some(l) = Proposal::new(&cov) {
                        // Keep the overall step size comparable when switching bases.
                        if n_adapt == 100.max(10 * k) {
                            prop.log_scale = (2.38 / (k as f64).sqrt()).ln();
                        }
                        prop.chol = l;
                    }
                }
            }
        } else {
            if accept {
                accepted_after += 1;
            }
            kept.push(x.as_slice().to_vec());
        }
    }
    let n_kept = (opts.iterations - opts.warmup).max(1);
    Ok((kept, accepted_after as f64 / n_kept as f64, prop.log_scale.exp()))
}

/// Adaptive random-walk Metropolis, chains in parallel. The proposal
/// covariance starts at `init_cov` and is adapted during warmup only.
pub fn mcmc_adaptive<F: Fn(&[f64]) -> f64 + Sync>(
    log_target: &F,
    init: &[f64],
    init_cov: &DMatrix<f64>,
    opts: &McmcOptions,
) -> Result<McmcOutput> {
    if !(opts.iterations > opts.warmup && opts.warmup >= 1 && opts.chains >= 1) {
        return domain(format!(
            "need iterations > warmup >= 1 and at least one chain (got {} / {} / {})",
            opts.iterations, opts.warmup, opts.chains
        ));
    }
    if init_cov.nrows() != init.len() || init_cov.ncols() != init.len() {
        return Err(Error::Dimension {
            expected: init.len(),
            got: init_cov.nrows(),
        });
    }
    let chol = Proposal::new(init_cov)
        .ok_or_else(|| Error::NotNegativeDefinite("initial proposal covariance is not positive definite".into()))?;
    let runs: Vec<Result<(Vec<Vec<f64>>, f64, f64)>> = (0..opts.chains)
        .into_par_iter()
        .map(|c| run_chain(log_target, init, &chol, opts, c))
        .collect();
    let mut out = McmcOutput {
        draws: Vec::with_capacity(opts.chains),
        acceptance: Vec::with_capacity(opts.chains),
        scale: Vec::with_capacity(opts.chains),
    };
    for r in runs {
        let (d, a, s) = r?;
        out.draws.push(d);
        out.acceptance.push(a);
        out.scale.push(s);
    }
    Ok(out)
}

/// Type-7 quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Equal-tailed interval from empirical quantiles.
pub fn credible_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return domain("credible interval of an empty sample");
    }
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("credible level must lie in (0, 1), got {level}"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return domain("sample contains NaN");
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok((quantile_sorted(&s, tail), quantile_sorted(&s, 1.0 - tail)))
}

/// Multi-chain effective sample size (Geyer initial monotone sequence).
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m == 0 || n < 4 {
        return f64::NAN;
    }
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / n as f64).collect();
    let acov = |c: usize, lag: usize| -> f64 {
        let x = &chains[c][..n];
        let mu = means[c];
        (0..n - lag).map(|i| (x[i] - mu) * (x[i + lag] - mu)).sum::<f64>() / n as f64
    };
    let w: f64 = (0..m).map(|c| acov(c, 0) * n as f64 / (n - 1) as f64).sum::<f64>() / m as f64;
    let grand = means.iter().sum::<f64>() / m as f64;
    let b = if m > 1 {
        n as f64 * means.iter().map(|v| (v - grand).powi(2)).sum::<f64>() / (m - 1) as f64
    } else {
        0.0
    };
    let var_plus = (n - 1) as f64 / n as f64 * w + b / n as f64;
    if !(var_plus > 0.0) {
        return f64::NAN;
    }
    let rho = |lag: usize| 1.0 - (w - (0..m).map(|c| acov(c, lag)).sum::<f64>() / m as f64) / var_plus;
    let mut tau = -1.0;
    let mut prev = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let mut pair = rho(lag) + rho(lag + 1);
        if pair < 0.0 {
            break;
        }
        pair = pair.min(prev);
        tau += 2.0 * pair;
        prev = pair;
        lag += 2;
    }
    (m * n) as f64 / tau.max(1.0 / (m * n) as f64).max(1e-12)
}

/// Potential scale reduction factor.
pub fn rhat(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m < 2 || n < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / n as f64).collect();
    let vars: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c[..n].iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64)
        .collect();
    let w = vars.iter().sum::<f64>() / m as f64;
    let grand = means.iter().sum::<f64>() / m as f64;
    let b = n as f64 * means.iter().map(|v| (v - grand).powi(2)).sum::<f64>() / (m - 1) as f64;
    let var_plus = (n - 1) as f64 / n as f64 * w + b / n as f64;
    (var_plus / w).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub lo: f64,
    pub hi: f64,
    pub ess: f64,
    pub rhat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub acceptance: Vec<f64>,
    pub proposal_scale: Vec<f64>,
    pub map_grad_norm: f64,
    pub map_stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorResult {
    pub names: Vec<String>,
    pub map_unconstrained: Vec<f64>,
    pub map_natural: Vec<f64>,
    pub log_posterior_at_map: f64,
    /// Inverse of −H on the unconstrained scale.
    pub laplace_cov: Vec<Vec<f64>>,
    /// Pooled post-warmup draws on the natural scale, chain by chain.
    pub samples: Vec<Vec<f64>>,
    /// The same draws on the unconstrained scale.
    pub samples_unconstrained: Vec<Vec<f64>>,
    pub summaries: Vec<ParamSummary>,
    /// Reported log evidence (integrated over the skewness for skewed models).
    pub log_evidence: Option<f64>,
    /// Plain Laplace evidence at the joint mode.
    pub laplace_log_evidence: Option<f64>,
    pub evidence_error: Option<String>,
    pub diagnostics: Diagnostics,
}

impl PosteriorResult {
    pub fn summary(&self, name: &str) -> Option<&ParamSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }

    /// Column `j` of the natural-scale draws.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub mcmc: McmcOptions,
    pub optim: OptimOptions,
    pub evidence: bool,
    pub level: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            mcmc: McmcOptions::default(),
            optim: OptimOptions::default(),
            evidence: true,
            level: 0.95,
        }
    }
}

/// Starting point: observed rate (binomial) or least squares (regression),
/// zero skewness.
pub fn initial_point(model: &Model, data: &Dataset) -> Result<Vec<f64>> {
    let m = data.m();
    let mut theta = vec![0.0; model.dim(m)];
    if let Some(trials) = data.n_trials() {
        let (ys, ns): (f64, f64) = data.y().iter().zip(trials).fold((0.0, 0.0), |a, (y, n)| (a.0 + y, a.1 + n));
        let rate = ((ys + 0.5) / (ns + 1.0)).clamp(1e-6, 1.0 - 1e-6);
        theta[0] = norm_quantile(rate);
    } else {
        let n = data.n();
        let mut design = DMatrix::from_element(n, m + 1, 1.0);
        design.view_mut((0, 1), (n, m)).copy_from(data.x());
        let y = DVector::from_column_slice(data.y());
        let beta = design
            .clone()
            .svd(true, true)
            .solve(&y, 1e-12)
            .map_err(|e| Error::Numerical {
                context: "least squares start",
                detail: e.to_string(),
            })?;
        let resid = &y - &design * &beta;
        let dof = (n as f64 - (m + 1) as f64).max(1.0);
        let var = (resid.dot(&resid) / dof).max(1e-12);
        theta[..=m].copy_from_slice(beta.as_slice());
        theta[m + 1] = -var.ln();
    }
    Ok(theta)
}

/// MAP on the unconstrained scale: the symmetric model first (skewness held
/// at zero), then all coordinates.
pub fn map_fit(model: &Model, data: &Dataset, init: Option<&[f64]>, opts: &OptimOptions) -> Result<(OptimResult, DMatrix<f64>)> {
    let f = |t: &[f64]| model.log_posterior_or_neg_inf(t, data);
    let start = match init {
        Some(v) => v.to_vec(),
        None => initial_point(model, data)?,
    };
    let mut starts = vec![];
    if let (Some(idx), None) = (model.skew_index(data.m()), init) {
        // The PC density on α vanishes at α = 0, so that scale starts just
        // off zero on both sides.
        let zeros: &[f64] = match model.skew_scale {
            SkewScale::Gamma1 => &[0.0],
            SkewScale::Alpha => &[0.1, -0.1],
        };
        for &zero in zeros {
            let sub = |rest: &[f64]| {
                let mut p = rest.to_vec();
                p.insert(idx, zero);
                f(&p)
            };
            let mut rest = start.clone();
            rest.remove(idx);
            let mut s = match maximize(&sub, &rest, opts) {
                Ok(r) => r.x,
                Err(_) => rest,
            };
            s.insert(idx, zero);
            starts.push(s);
        }
    } else {
        starts.push(start.clone());
    }
    let mut best: Option<OptimResult> = None;
    let mut last_err = None;
    for s in &starts {
        match maximize(&f, s, opts) {
            Ok(r) if best.as_ref().map_or(true, |b| r.value > b.value) => best = Some(r),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let res = match (best, last_err) {
        (Some(r), _) => r,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start"),
    };
    let h = hessian(&f, &res.x);
    Ok((res, h))
}

fn proposal_covariance(model: &Model, data: &Dataset, h: &DMatrix<f64>) -> DMatrix<f64> {
    let k = h.nrows();
    let mut cov = laplace_covariance(h).unwrap_or_else(|_| {
        DMatrix::from_diagonal(&DVector::from_iterator(
            k,
            (0..k).map(|i| 1.0 / (-h[(i, i)]).max(1e-2)),
        ))
    });
    // A kink in the skewness prior at zero makes the local curvature useless
    // as a step size; give that coordinate an uncorrelated working variance.
    if let Some(i) = model.skew_index(data.m()) {
        if cov[(i, i)] < 1e-2 {
            for j in 0..k {
                cov[(i, j)] = 0.0;
                cov[(j, i)] = 0.0;
            }
            cov[(i, i)] = 1e-2;
        }
    }
    cov
}

/// MAP, Laplace evidence and MCMC summaries.
pub fn fit(model: &Model, data: &Dataset, opts: &FitOptions) -> Result<PosteriorResult> {
    let names = model.param_names(data);
    let k = names.len();
    let (map, h) = map_fit(model, data, None, &opts.optim)?;
    let f = |t: &[f64]| model.log_posterior_or_neg_inf(t, data);

    let (mut log_evidence, mut laplace_log_evidence, mut evidence_error) = (None, None, None);
    if opts.evidence {
        match laplace_evidence(map.value, &h) {
            Ok(v) => laplace_log_evidence = Some(v),
            Err(e) => evidence_error = Some(e.to_string()),
        }
        match model.skew_index(data.m()) {
            Some(idx) => {
                match integrated_laplace_evidence(&f, &map.x, idx, Some(0.0), Some(model.skew_window()), &opts.optim) {
                    Ok(v) => log_evidence = Some(v),
                    Err(e) => evidence_error = Some(e.to_string()),
                }
            }
            None => log_evidence = laplace_log_evidence,
        }
    }

    let cov = proposal_covariance(model, data, &h);
    let out = mcmc_adaptive(&f, &map.x, &cov, &opts.mcmc)?;
    let per_chain_nat: Vec<Vec<Vec<f64>>> = out
        .draws
        .iter()
        .map(|c| c.iter().map(|t| model.to_natural(t)).collect())
        .collect();
    let mut summaries = Vec::with_capacity(k);
    for (j, name) in names.iter().enumerate() {
        let chains: Vec<Vec<f64>> = per_chain_nat.iter().map(|c| c.iter().map(|r| r[j]).collect()).collect();
        let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let sd = (pooled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
        let (lo, hi) = credible_interval(&pooled, opts.level)?;
        summaries.push(ParamSummary {
            name: name.clone(),
            mean,
            sd,
            lo,
            hi,
            ess: effective_sample_size(&chains),
            rhat: rhat(&chains),
        });
    }
    let laplace_cov = laplace_covariance(&h)
        .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect())
        .unwrap_or_default();
    Ok(PosteriorResult {
        names,
        map_natural: model.to_natural(&map.x),
        map_unconstrained: map.x.clone(),
        log_posterior_at_map: map.value,
        laplace_cov,
        samples: per_chain_nat.into_iter().flatten().collect(),
        samples_unconstrained: out.draws.into_iter().flatten().collect(),
        summaries,
        log_evidence,
        laplace_log_evidence,
        evidence_error,
        diagnostics: Diagnostics {
            acceptance: out.acceptance,
            proposal_scale: out.scale,
            map_grad_norm: map.grad_norm,
            map_stalled: map.stalled,
        },
    })
}

/// Fraction of rows classified correctly at threshold 0.5.
pub fn classification_rate(probabilities: &[f64], data: &Dataset) -> Result<f64> {
    if data.is_binomial() && data.n_trials().is_some_and(|t| t.iter().any(|n| *n != 1.0)) {
        return Err(Error::Data("classification needs a binary response".into()));
    }
    if probabilities.len() != data.n() {
        return Err(Error::Dimension {
            expected: data.n(),
            got: probabilities.len(),
        });
    }
    let hits = probabilities
        .iter()
        .zip(data.y())
        .filter(|(p, y)| (**p >= 0.5) == (**y >= 0.5))
        .count();
    Ok(hits as f64 / data.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        let (lo, hi) = credible_interval(&s, 0.95).unwrap();
        assert!((lo - 3.475).abs() < 1e-12 && (hi - 97.525).abs() < 1e-12);
        assert!(credible_interval(&[], 0.9).is_err());
        assert_eq!(credible_interval(&[2.0], 0.9).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn quadratic_maximum() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 3.0 * (x[1] + 2.0).powi(2) - x[0] * x[1];
        let r = maximize(&f, &[0.0, 0.0], &OptimOptions::default()).unwrap();
        // Stationarity: 2(x−1) + y = 0, 6(y+2) + x = 0.
        let y = -13.0 / 5.5;
        let x = 1.0 - y / 2.0;
        assert!((r.x[0] - x).abs() < 1e-6 && (r.x[1] - y).abs() < 1e-6);
        assert!(r.grad_norm < 1e-6);
    }

    #[test]
    fn kink_maximum_is_accepted() {
        let f = |x: &[f64]| -2.0 * x[0].abs() - (x[1] - 0.5).powi(2) + 0.3 * x[0];
        let r = maximize(&f, &[0.7, 0.0], &OptimOptions::default()).unwrap();
        assert!(r.x[0].abs() < 1e-6 && (r.x[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn laplace_exact_for_gaussian() {
        let h = DMatrix::from_row_slice(2, 2, &[-4.0, 1.0, 1.0, -2.0]);
        let det: f64 = 7.0;
        let want = 1.5 + LN_2PI - 0.5 * det.ln();
        assert!((laplace_evidence(1.5, &h).unwrap() - want).abs() < 1e-12);
        assert!(laplace_evidence(0.0, &DMatrix::from_row_slice(1, 1, &[1.0])).is_err());
    }

    #[test]
    fn ess_of_independent_draws() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chains: Vec<Vec<f64>> = (0..4).map(|_| (0..2000).map(|_| rng.gen::<f64>()).collect()).collect();
        let ess = effective_sample_size(&chains);
        assert!(ess > 6000.0 && ess < 10000.0, "{ess}");
        let r = rhat(&chains);
        assert!((r - 1.0).abs() < 0.01);
    }
}

/// Mode and log evidence without sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceResult {
    pub names: Vec<String>,
    pub map_natural: Vec<f64>,
    pub log_posterior_at_map: f64,
    /// Integrated over the skewness for skewed models, plain Laplace otherwise.
    pub log_evidence: f64,
    pub laplace_log_evidence: f64,
}

pub fn evidence(model: &Model, data: &Dataset, opts: &OptimOptions) -> Result<EvidenceResult> {
    let (map, h) = map_fit(model, data, None, opts)?;
    let laplace = laplace_evidence(map.value, &h)?;
    let f = |t: &[f64]| model.log_posterior_or_neg_inf(t, data);
    let log_evidence = match model.skew_index(data.m()) {
        Some(idx) => integrated_laplace_evidence(&f, &map.x, idx, Some(0.0), Some(model.skew_window()), opts)?,
        None => laplace,
    };
    Ok(EvidenceResult {
        names: model.param_names(data),
        map_natural: model.to_natural(&map.x),
        log_posterior_at_map: map.value,
        log_evidence,
        laplace_log_evidence: laplace,
    })
}
