//! Acceptance run: one line per criterion, then a tally.
//!
//! Failures are reported, not raised, so the binary always exits 0.
//! `SKEWPROBIT_ACCEPTANCE=quick` cuts the simulation replicate counts
//! (results are then labelled `quick` and are not the desk-scale figures).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use nalgebra::DMatrix;
use skewprobit::inference::{self, FitOptions, McmcOptions, OptimOptions};
use skewprobit::link::{link_eval, quantile_intercept};
use skewprobit::models::{Dataset, Model, ModelKind};
use skewprobit::pcprior::{kld_quadrature, kld_series, KldSeries, PcSkewPrior};
use skewprobit::quadrature::{integrate, integrate_pieces, QuadOptions};
use skewprobit::simstudy::{
    confounding_from, run_scenario, small_trial_scenarios, large_trial_scenarios, CoverageReport, Scenario, SkewPriorSpec,
};
use skewprobit::sn_core::{alpha_to_gamma1, delta_to_gamma1, dgamma1_ddelta, gamma1_sup, gamma1_to_alpha, SkewNormalParams};
use skewprobit::special::norm_cdf;
use skewprobit::Link;
use skewprobit_cli::commands::holdout_score;
use skewprobit_cli::config::RunConfig;
use skewprobit_cli::datasets::{NamedDataset, Sources};
use skewprobit_cli::formula::{write_dataset, written_formula};
use skewprobit_cli::table::Table;

type Outcome = Result<Verdict, String>;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn quick() -> bool {
    std::env::var("SKEWPROBIT_ACCEPTANCE").is_ok_and(|v| v == "quick")
}

fn quad() -> QuadOptions<f64> {
    QuadOptions::new(1e-13, 1e-12)
}

fn prior_quad() -> QuadOptions<f64> {
    QuadOptions::new(1e-12, 1e-10)
}

// Tolerances.
const KLD_C1_REL: f64 = 1e-3;
const KLD_SERIES_REL: f64 = 1e-3;
const ANCHOR_TOL: f64 = 1e-8;
const QINT_TOL: f64 = 1e-9;
const PRIOR_NORM_TOL: f64 = 1e-4;
const PRIOR_MASS_TOL: f64 = 1e-6;
const CP_BAND: (f64, f64) = (90.0, 99.0);
const LARGE1_MLCI: (f64, f64) = (0.28, 0.08);
const BINARY2_MLCI: (f64, f64) = (0.33, 0.10);
const GAUSSIAN_BINARY_MLCI_MIN: f64 = 1.0;
const BEETLE_GAMMA1: (f64, f64) = (-0.456, 0.15);
const BEETLE_Q: (f64, f64) = (0.643, 0.04);
const BEETLE_EVIDENCE: (f64, f64, f64) = (-21.75, -23.93, 1.5);
const HEART_GAMMA1: (f64, f64) = (0.02, 0.1);
const HEART_HOLDOUT: (f64, f64) = (84.55, 5.0);
const HEART_HOLDOUT_SEEDS: u64 = 10;
const WINES_GAMMA1: (f64, f64) = (0.439, 0.1);
const MONOTONE_SLACK: f64 = 5.0;

fn within(x: f64, (centre, tol): (f64, f64)) -> bool {
    (x - centre).abs() <= tol
}

fn criterion_1() -> Outcome {
    let c1 = (PI * PI + 16.0 - 8.0 * PI) / (6.0 * PI.powi(3));
    let stored = KldSeries::<f64>::new().c1;
    let alpha = 0.01_f64;
    let ratio = kld_quadrature::<f64>(alpha).map_err(e)? / alpha.powi(6);
    let rel_c1 = ((ratio - c1) / c1).abs();
    let mut worst = 0.0_f64;
    for k in 1..=40 {
        let a = 0.005 * k as f64;
        for a in [a, -a] {
            let q = kld_quadrature::<f64>(a).map_err(e)?;
            worst = worst.max(((kld_series::<f64>(a) - q) / q).abs());
        }
    }
    let ok = rel_c1 < KLD_C1_REL && ((stored - c1) / c1).abs() < 1e-12 && worst < KLD_SERIES_REL;
    Ok(verdict(ok, format!("KLD(0.01)/α⁶ rel err {rel_c1:.2e}; series vs quadrature max rel err {worst:.2e} on |α| ≤ 0.2")))
}

fn criterion_2() -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64);
    for a in [0.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0, 50.0, -50.0] {
        let link = Link::new(a).map_err(e)?;
        let b = [-14.0, link.xi_std(), 14.0];
        let mean = integrate_pieces(|x| x * link.pdf(x), &b, &quad()).map_err(e)?.value;
        let var = integrate_pieces(|x| (x - mean).powi(2) * link.pdf(x), &b, &quad()).map_err(e)?.value;
        worst = (worst.0.max(mean.abs()), worst.1.max((var - 1.0).abs()));
    }
    let ok = worst.0 < ANCHOR_TOL && worst.1 < ANCHOR_TOL;
    Ok(verdict(ok, format!("max |mean| {:.1e}, max |var − 1| {:.1e}", worst.0, worst.1)))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0_f64;
    for i in 0..21 {
        let q = 0.01 + 0.98 * i as f64 / 20.0;
        for j in 0..21 {
            let a = -20.0 + 2.0 * j as f64;
            let b = quantile_intercept(q, a).map_err(e)?;
            worst = worst.max((link_eval(b, a).map_err(e)? - q).abs());
        }
    }
    Ok(verdict(worst < QINT_TOL, format!("max |F(β₀(q, α)) − q| = {worst:.1e} on 21×21 grid")))
}

fn gamma1_mass(prior: &PcSkewPrior<f64>) -> Result<f64, String> {
    let f = |s: f64| {
        let d = (FRAC_PI_2 * s).sin();
        let jac = dgamma1_ddelta(d) * FRAC_PI_2 * (FRAC_PI_2 * s).cos();
        prior.density_gamma1(delta_to_gamma1(d)).unwrap_or(f64::NAN) * jac
    };
    Ok(2.0 * integrate_pieces(f, &[0.0, 0.01, 0.05, 0.2, 1.0], &prior_quad()).map_err(e)?.value)
}

fn criterion_4() -> Outcome {
    let mut norm_err = 0.0_f64;
    for theta in [2.0, 5.0, 10.0] {
        let prior = PcSkewPrior::<f64>::new(theta).map_err(e)?;
        norm_err = norm_err.max((gamma1_mass(&prior)? - 1.0).abs());
    }
    let mut mass_err = 0.0_f64;
    for theta in [2.0, 5.0, 10.0] {
        let prior = PcSkewPrior::<f64>::new(theta).map_err(e)?;
        for (a, b) in [(0.02, 0.3), (0.3, 1.0), (1.0, 4.0), (4.0, 30.0), (-2.0, -0.5), (-0.7, 1.3)] {
            let on_alpha = integrate(|x| prior.density_alpha(x), a, b, &prior_quad()).map_err(e)?.value;
            let (ga, gb) = (alpha_to_gamma1(a), alpha_to_gamma1(b));
            let on_gamma = integrate(|g| prior.density_gamma1(g).unwrap_or(f64::NAN), ga, gb, &prior_quad()).map_err(e)?.value;
            mass_err = mass_err.max((on_alpha - on_gamma).abs());
        }
    }
    let ok = norm_err < PRIOR_NORM_TOL && mass_err < PRIOR_MASS_TOL;
    Ok(verdict(ok, format!("max |∫π(γ₁) − 1| {norm_err:.1e} (θ = 2, 5, 10); max interval-mass gap {mass_err:.1e}")))
}

fn criterion_5() -> Outcome {
    let sup = gamma1_sup::<f64>();
    let shown = format!("{sup:.5}");
    Ok(verdict(shown == "0.99527", format!("sup |γ₁| = {sup:.10} → {shown}")))
}

fn reps(full: usize) -> usize {
    if quick() {
        (full / 5).max(10)
    } else {
        full
    }
}

fn line(r: &CoverageReport) -> String {
    format!(
        "{} {}: CP {:.1} MLCI {:.3} median γ̂₁ {:.3} ({} reps, {} failed)",
        r.scenario.name,
        r.scenario.skew_prior.label(),
        r.cp,
        r.mlci,
        r.median_estimate,
        r.records.len(),
        r.failures.len()
    )
}

struct Coverage {
    large1_pc: CoverageReport,
    binary1_pc: CoverageReport,
    binary1_gauss: CoverageReport,
    binary2_pc: CoverageReport,
    binary2_gauss: CoverageReport,
}

const PC: SkewPriorSpec = SkewPriorSpec::Pc { theta: 5.0 };
const GAUSS: SkewPriorSpec = SkewPriorSpec::Gaussian { mean: 0.0, variance: 100.0 };

fn scenario(list: Vec<Scenario>, name: &str) -> Result<Scenario, String> {
    let mut s = list.into_iter().find(|s| s.name == name).ok_or_else(|| format!("no scenario {name}"))?;
    s.n_reps = reps(s.n_reps);
    Ok(s)
}

fn coverage_runs() -> Result<Coverage, String> {
    let run = |list: Vec<Scenario>, name: &str| -> Result<CoverageReport, String> {
        let t = Instant::now();
        let r = run_scenario(&scenario(list, name)?).map_err(e)?;
        eprintln!("  {} ({:.0} s)", line(&r), t.elapsed().as_secs_f64());
        Ok(r)
    };
    Ok(Coverage {
        large1_pc: run(large_trial_scenarios(PC), "large-1")?,
        binary1_pc: run(small_trial_scenarios(PC), "binary-1")?,
        binary1_gauss: run(small_trial_scenarios(GAUSS), "binary-1")?,
        binary2_pc: run(small_trial_scenarios(PC), "binary-2")?,
        binary2_gauss: run(small_trial_scenarios(GAUSS), "binary-2")?,
    })
}

fn criterion_6(c: &Result<Coverage, String>) -> Outcome {
    let c = c.as_ref().map_err(Clone::clone)?;
    let in_cp = |r: &CoverageReport| r.cp >= CP_BAND.0 && r.cp <= CP_BAND.1;
    let checks = [
        in_cp(&c.large1_pc),
        within(c.large1_pc.mlci, LARGE1_MLCI),
        in_cp(&c.binary2_pc),
        within(c.binary2_pc.mlci, BINARY2_MLCI),
        c.binary1_gauss.mlci > GAUSSIAN_BINARY_MLCI_MIN,
        c.binary2_gauss.mlci > GAUSSIAN_BINARY_MLCI_MIN,
    ];
    let names = ["large-1 CP", "large-1 MLCI", "binary-2 CP", "binary-2 MLCI", "binary-1 gaussian MLCI", "binary-2 gaussian MLCI"];
    let failed: Vec<&str> = names.iter().zip(checks).filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let detail = format!(
        "{}; {}; {}; {}{}{}",
        line(&c.large1_pc),
        line(&c.binary2_pc),
        line(&c.binary1_gauss),
        line(&c.binary2_gauss),
        if failed.is_empty() { String::new() } else { format!("; out of band: {}", failed.join(", ")) },
        if quick() { " [quick]" } else { "" }
    );
    Ok(verdict(failed.is_empty(), detail))
}

fn criterion_7(c: &Result<Coverage, String>) -> Outcome {
    let c = c.as_ref().map_err(Clone::clone)?;
    let (pc, g) = (&c.binary1_pc, &c.binary1_gauss);
    let (apc, ag) = (pc.median_abs_estimate(), g.median_abs_estimate());
    let ok = pc.mlci < g.mlci && apc < ag;
    Ok(verdict(
        ok,
        format!(
            "binary-1 MLCI pc {:.3} vs gaussian {:.3}; median |γ̂₁| pc {apc:.3} vs gaussian {ag:.3}{}",
            pc.mlci,
            g.mlci,
            if quick() { " [quick]" } else { "" }
        ),
    ))
}

fn default_model(kind: ModelKind) -> Result<Model, String> {
    RunConfig::default().model(kind).map_err(e)
}

fn mean_of(fit: &inference::PosteriorResult, name: &str) -> Result<(f64, f64, f64), String> {
    let s = fit.summary(name).ok_or_else(|| format!("no summary for {name}"))?;
    Ok((s.mean, s.lo, s.hi))
}

fn evidence_pair(skewed: ModelKind, symmetric: ModelKind, data: &Dataset) -> Result<(f64, f64), String> {
    let opts = OptimOptions::default();
    let a = inference::evidence(&default_model(skewed)?, data, &opts).map_err(e)?;
    let b = inference::evidence(&default_model(symmetric)?, data, &opts).map_err(e)?;
    Ok((a.log_evidence, b.log_evidence))
}

fn fit_options() -> FitOptions {
    FitOptions {
        evidence: false,
        ..FitOptions::default()
    }
}

fn criterion_8() -> Outcome {
    let data = NamedDataset::Beetle.load(&Sources::default()).map_err(e)?.dataset;
    let fit = inference::fit(&default_model(ModelKind::SkewProbit)?, &data, &fit_options()).map_err(e)?;
    let (g, glo, ghi) = mean_of(&fit, "gamma1")?;
    let (q, _, _) = mean_of(&fit, "q")?;
    let (skew, probit) = evidence_pair(ModelKind::SkewProbit, ModelKind::Probit, &data)?;
    let checks = [
        ("γ₁ mean", within(g, BEETLE_GAMMA1)),
        ("γ₁ CI excludes 0", glo > 0.0 || ghi < 0.0),
        ("q mean", within(q, BEETLE_Q)),
        ("evidence ordering", skew > probit),
        ("skewed evidence", (skew - BEETLE_EVIDENCE.0).abs() <= BEETLE_EVIDENCE.2),
        ("probit evidence", (probit - BEETLE_EVIDENCE.1).abs() <= BEETLE_EVIDENCE.2),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Ok(verdict(
        failed.is_empty(),
        format!(
            "γ₁ {g:.3} ({glo:.3}, {ghi:.3}); q {q:.3}; log evidence skewed {skew:.2} vs probit {probit:.2}{}",
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    ))
}

fn criterion_9() -> Outcome {
    let data = NamedDataset::Heart.load(&Sources::default()).map_err(e)?.dataset;
    let skewed = default_model(ModelKind::SkewProbit)?;
    let fit = inference::fit(&skewed, &data, &fit_options()).map_err(e)?;
    let (g, glo, ghi) = mean_of(&fit, "gamma1")?;
    let (skew, probit) = evidence_pair(ModelKind::SkewProbit, ModelKind::Probit, &data)?;
    let mut rates = Vec::new();
    for seed in 1..=HEART_HOLDOUT_SEEDS {
        rates.push(holdout_score(&skewed, &data, &fit_options(), 0.5, seed).map_err(e)?.0);
    }
    let mean_rate = rates.iter().sum::<f64>() / rates.len() as f64;
    let checks = [
        ("γ₁ mean", within(g, HEART_GAMMA1)),
        ("γ₁ CI contains 0", glo <= 0.0 && 0.0 <= ghi),
        ("evidence ordering", probit > skew),
        ("holdout rate", within(mean_rate, HEART_HOLDOUT)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.1}")).collect();
    Ok(verdict(
        failed.is_empty(),
        format!(
            "γ₁ {g:.3} ({glo:.3}, {ghi:.3}); log evidence skewed {skew:.2} vs probit {probit:.2}; holdout % over seeds 1..={HEART_HOLDOUT_SEEDS}: [{}] mean {mean_rate:.2}{}",
            shown.join(", "),
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    ))
}

fn criterion_10() -> Outcome {
    let loaded = match NamedDataset::Wines.load(&Sources::default()) {
        Ok(l) => l,
        Err(err) => return Ok(Verdict::Skip(format!("wines CSV not supplied ({err})"))),
    };
    let data = loaded.dataset;
    let fit = inference::fit(&default_model(ModelKind::SnRegression)?, &data, &fit_options()).map_err(e)?;
    let (g, glo, ghi) = mean_of(&fit, "gamma1")?;
    let (sn, gauss) = evidence_pair(ModelKind::SnRegression, ModelKind::GaussianRegression, &data)?;
    let ok = within(g, WINES_GAMMA1) && (glo > 0.0 || ghi < 0.0) && sn > gauss;
    Ok(verdict(ok, format!("γ₁ {g:.3} ({glo:.3}, {ghi:.3}); log evidence skew-normal {sn:.2} vs gaussian {gauss:.2}")))
}

fn natural(model: &Model, data: &Dataset, values: &BTreeMap<&str, f64>) -> Result<Vec<f64>, String> {
    let nat: Vec<f64> = model.param_names(data).iter().map(|n| values.get(n.as_str()).copied().unwrap_or(0.3)).collect();
    model.from_natural(&nat).map_err(e)
}

fn invariant_battery() -> Result<Vec<(&'static str, bool)>, String> {
    let mut out = Vec::new();

    let mut norm = 0.0_f64;
    let mut reflect = 0.0_f64;
    let mut quant = 0.0_f64;
    for a in [-8.0, -1.5, 0.0, 0.7, 4.0] {
        let p = SkewNormalParams::new(0.3, 1.7, a).map_err(e)?;
        let total = integrate_pieces(|x| p.pdf(x), &[-30.0, 0.3, 30.0], &quad()).map_err(e)?.value;
        norm = norm.max((total - 1.0).abs());
        let m = SkewNormalParams::new(-0.3, 1.7, -a).map_err(e)?;
        for x in [-3.0, -0.4, 0.0, 1.1, 2.5] {
            reflect = reflect.max((p.cdf(x) + m.cdf(-x) - 1.0).abs());
            reflect = reflect.max((p.pdf(x) - m.pdf(-x)).abs());
        }
        for pr in [0.01, 0.3, 0.5, 0.9, 0.999] {
            quant = quant.max((p.cdf(p.quantile(pr).map_err(e)?) - pr).abs());
        }
    }
    out.push(("skew-normal density normalizes", norm < 1e-10));
    out.push(("reflection α → −α", reflect < 1e-13));
    out.push(("quantile round trip", quant < 1e-10));

    let mut trip = 0.0_f64;
    for g in [-0.99_f64, -0.5, -1e-3, 0.0, 0.2, 0.9] {
        trip = trip.max((alpha_to_gamma1(gamma1_to_alpha(g).map_err(e)?) - g).abs());
    }
    out.push(("γ₁ ↔ α round trip", trip < 1e-12));

    let mut probit = 0.0_f64;
    for eta in [-4.0_f64, -1.0, 0.0, 0.5, 3.0] {
        probit = probit.max((link_eval(eta, 0.0).map_err(e)? - norm_cdf(eta)).abs());
    }
    out.push(("link at α = 0 is the probit", probit < 1e-15));

    let beetle = NamedDataset::Beetle.load(&Sources::default()).map_err(e)?.dataset;
    let vals = BTreeMap::from([("q", 0.6), ("dosage", 19.0), ("gamma1", 0.0)]);
    let (sk, pr) = (default_model(ModelKind::SkewProbit)?, default_model(ModelKind::Probit)?);
    let l1 = sk.log_likelihood(&natural(&sk, &beetle, &vals)?, &beetle).map_err(e)?;
    let l2 = pr.log_likelihood(&natural(&pr, &beetle, &vals)?, &beetle).map_err(e)?;
    out.push(("skewed probit at γ₁ = 0 equals probit", (l1 - l2).abs() < 1e-9));

    let x = DMatrix::from_fn(30, 1, |r, _| (r as f64 * 0.37).sin());
    let y: Vec<f64> = (0..30).map(|r| 1.0 + (r as f64 * 1.3).cos()).collect();
    let cont = Dataset::continuous(y, x, vec!["x".into()]).map_err(e)?;
    let vals = BTreeMap::from([("(Intercept)", 1.0), ("x", 0.5), ("precision", 2.0), ("gamma1", 0.0)]);
    let (sn, ga) = (default_model(ModelKind::SnRegression)?, default_model(ModelKind::GaussianRegression)?);
    let l1 = sn.log_likelihood(&natural(&sn, &cont, &vals)?, &cont).map_err(e)?;
    let l2 = ga.log_likelihood(&natural(&ga, &cont, &vals)?, &cont).map_err(e)?;
    out.push(("skew-normal regression at γ₁ = 0 equals Gaussian", (l1 - l2).abs() < 1e-9));

    let short = FitOptions {
        mcmc: McmcOptions {
            chains: 2,
            iterations: 1500,
            warmup: 500,
            seed: 11,
        },
        evidence: false,
        ..FitOptions::default()
    };
    let f1 = inference::fit(&sk, &beetle, &short).map_err(e)?;
    let f2 = inference::fit(&sk, &beetle, &short).map_err(e)?;
    out.push(("fit determinism under a fixed seed", f1.samples == f2.samples && f1.summaries == f2.summaries));

    let mut s = small_trial_scenarios(PC).remove(0);
    s.n_reps = 2;
    s.mcmc = short.mcmc;
    out.push(("scenario reproducibility", run_scenario(&s).map_err(e)? == run_scenario(&s).map_err(e)?));

    let mut round = true;
    for ds in [NamedDataset::Beetle, NamedDataset::Heart] {
        let d = ds.load(&Sources::default()).map_err(e)?.dataset;
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).map_err(e)?;
        let table = Table::from_reader(buf.as_slice()).map_err(e)?;
        round &= written_formula(&d).apply(&table, d.is_binomial()).map_err(e)?.dataset == d;
    }
    out.push(("dataset write/read round trip", round));
    Ok(out)
}

fn reduced(mut s: Scenario, n_reps: usize) -> Scenario {
    s.n_reps = reps(n_reps);
    s.mcmc = McmcOptions {
        chains: 2,
        iterations: 3000,
        warmup: 1000,
        seed: 0,
    };
    s
}

fn criterion_11() -> Outcome {
    let battery = invariant_battery()?;
    let mut failed: Vec<String> = battery.iter().filter(|c| !c.1).map(|c| c.0.to_string()).collect();

    let base = scenario(small_trial_scenarios(PC), "binary-1")?;
    let mut cps = Vec::new();
    for n_trials in [1, 5, 25, 100] {
        let mut s = reduced(base.clone(), 100);
        s.n_trials = n_trials;
        cps.push(run_scenario(&s).map_err(e)?.cp);
    }
    let monotone = cps.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK);
    if !monotone {
        failed.push("monotone coverage in N_i".into());
    }

    let mut conf = reduced(Scenario::new("confounding", 0.4, 0.1, -2.0 / 3.0, 1, PC), 100);
    conf.seed = 7;
    let c = confounding_from(&conf).map_err(e)?;
    let (mq, mc) = (c.quantile.median_estimate, c.classical.median_estimate);
    if !(mq < 0.0 && mc >= 0.0) {
        failed.push("confounding sign recovery".into());
    }

    let cp_text: Vec<String> = cps.iter().map(|c| format!("{c:.0}")).collect();
    Ok(verdict(
        failed.is_empty(),
        format!(
            "{} of {} invariants hold; binary-1 CP at N_i = 1, 5, 25, 100: [{}]; confounding median γ̂₁ quantile {mq:.3} ({:.3}, {:.3}) vs classical {mc:.3} ({:.3}, {:.3}){}{}",
            battery.iter().filter(|c| c.1).count(),
            battery.len(),
            cp_text.join(", "),
            c.quantile.median_lo,
            c.quantile.median_hi,
            c.classical.median_lo,
            c.classical.median_hi,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) },
            if quick() { " [quick]" } else { "" }
        ),
    ))
}

fn report(n: usize, started: Instant, outcome: Outcome, tally: &mut [usize; 3]) {
    let secs = started.elapsed().as_secs_f64();
    let (tag, detail, slot) = match outcome {
        Ok(Verdict::Pass(d)) => ("PASS", d, 0),
        Ok(Verdict::Fail(d)) => ("FAIL", d, 1),
        Ok(Verdict::Skip(d)) => ("SKIP", d, 2),
        Err(d) => ("FAIL", format!("error: {d}"), 1),
    };
    tally[slot] += 1;
    println!("criterion {n:>2} {tag}: {detail} [{secs:.1} s]");
}

fn main() {
    let mut tally = [0usize; 3];
    let simple: [(usize, fn() -> Outcome); 5] = [(1, criterion_1), (2, criterion_2), (3, criterion_3), (4, criterion_4), (5, criterion_5)];
    for (n, f) in simple {
        let t = Instant::now();
        report(n, t, f(), &mut tally);
    }

    let t = Instant::now();
    let coverage = coverage_runs();
    report(6, t, criterion_6(&coverage), &mut tally);
    report(7, t, criterion_7(&coverage), &mut tally);

    let late: [(usize, fn() -> Outcome); 4] = [(8, criterion_8), (9, criterion_9), (10, criterion_10), (11, criterion_11)];
    for (n, f) in late {
        let t = Instant::now();
        report(n, t, f(), &mut tally);
    }
    println!("acceptance: {} passed, {} failed, {} skipped", tally[0], tally[1], tally[2]);
}
