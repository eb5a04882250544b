use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use skewprobit::inference::{self, Diagnostics, EvidenceResult, FitOptions, McmcOptions, ParamSummary, PosteriorResult};
use skewprobit::models::{Dataset, InterceptMode, Model, ModelKind};
use skewprobit::pcprior::{PcSkewPrior, PriorScale, DEFAULT_ALPHA_RANGE};
use skewprobit::simstudy::{self, CoverageReport, Scenario, SkewPriorSpec};
use skewprobit::sn_core::gamma1_to_alpha;
use skewprobit::Link;

use crate::config::{RunConfig, DEFAULT_BETA_PRECISION};
use crate::datasets::{self, HeartSource, NamedDataset, Sources};
use crate::error::{CliError, Result};
use crate::formula::{self, Formula, Loaded};
use crate::output::{atomic_write, json_bytes, render_table, samples_csv, summary_csv};

#[derive(Debug, Parser)]
#[command(name = "skewprobit", version, about = "Skewed probit and skew-normal regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write posterior summaries, draws and evidence.
    Fit(FitArgs),
    /// Run coverage scenarios or the intercept confounding study.
    Simulate(SimulateArgs),
    /// Tabulate the PC prior density of the skewness.
    Prior(PriorArgs),
    /// Score a random holdout by correct classification.
    Predict(PredictArgs),
    /// Compare the log evidence of two models on the same data.
    Evidence(EvidenceArgs),
    /// List, fetch or export the named datasets.
    #[command(subcommand)]
    Datasets(DatasetsCommand),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named dataset: beetle, heart or wines.
    #[arg(long, conflicts_with = "data")]
    pub dataset: Option<String>,
    /// CSV file with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    /// Factor covariates, as `col` or `col:Reference`.
    #[arg(long, value_delimiter = ',')]
    pub factors: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<String>>,
    #[arg(long)]
    pub binarize_above: Option<f64>,
    /// Heart file source: `bundled`, a path or a URL.
    #[arg(long)]
    pub heart_source: Option<String>,
    /// Skip the heart checksum (row and event counts are still checked).
    #[arg(long)]
    pub no_checksum: bool,
    /// Wines CSV.
    #[arg(long)]
    pub wines: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// skew_probit, probit, sn_regression or gaussian_regression.
    #[arg(long)]
    pub model: Option<String>,
    /// quantile or classical.
    #[arg(long)]
    pub intercept: Option<String>,
    /// `pc:THETA` or `gaussian:MEAN:VARIANCE`.
    #[arg(long)]
    pub skew_prior: Option<String>,
    #[arg(long)]
    pub beta_precision: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Skip the evidence computation.
    #[arg(long)]
    pub no_evidence: bool,
    /// Directory for summary.csv, samples.csv and fit.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fraction of rows held out for scoring.
    #[arg(long, default_value_t = 0.5)]
    pub holdout: f64,
    /// Write a JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvidenceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// The two models to compare; defaults to the skewed model and its
    /// symmetric reduction.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    #[arg(long, default_value_t = 5.0)]
    pub theta: f64,
    /// alpha or gamma1.
    #[arg(long, default_value = "gamma1")]
    pub scale: String,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Half-width of the α grid.
    #[arg(long, default_value_t = DEFAULT_ALPHA_RANGE)]
    pub alpha_max: f64,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario names (large-1..4, binary-1..2), `large`, `binary` or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub scenario: Vec<String>,
    /// TOML file with `[[scenario]]` tables; replaces the built-in list.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skew priors to run, e.g. `pc:5,gaussian:0:100`.
    #[arg(long, value_delimiter = ',', default_value = "pc:5")]
    pub prior: Vec<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per observation, overriding the scenario.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Standard deviation of the simulated covariate.
    #[arg(long)]
    pub x_sd: Option<f64>,
    /// 500 replicates with full-length chains.
    #[arg(long)]
    pub full_scale: bool,
    /// Run the quantile versus classical intercept study instead, with
    /// truth `q,beta1,gamma1`.
    #[arg(long, value_delimiter = ',')]
    pub confounding: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum DatasetsCommand {
    /// Show the named datasets and where they come from.
    List,
    /// Download and validate the heart data into the cache directory.
    Fetch {
        /// URL or local path.
        #[arg(long, default_value = datasets::HEART_URL)]
        source: String,
        /// Target directory; defaults to the cache directory variable.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        no_checksum: bool,
    },
    /// Write the preprocessed design of a dataset as CSV.
    Export {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn usage(e: skewprobit::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Overlays command line flags on the configuration file.
pub fn merged_config(data: &DataArgs, model: Option<&ModelArgs>) -> Result<RunConfig> {
    let mut cfg = match &data.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &data.dataset {
        cfg.data.dataset = Some(d.clone());
        cfg.data.path = None;
    }
    if let Some(p) = &data.data {
        cfg.data.path = Some(p.clone());
        cfg.data.dataset = None;
    }
    if let Some(s) = &data.heart_source {
        cfg.data.heart_source = Some(s.clone());
    }
    if data.no_checksum {
        cfg.data.verify_checksum = Some(false);
    }
    if let Some(w) = &data.wines {
        cfg.data.wines = Some(w.clone());
    }
    let touches_formula = data.response.is_some()
        || data.trials.is_some()
        || data.covariates.is_some()
        || data.factors.is_some()
        || data.center.is_some()
        || data.binarize_above.is_some();
    if touches_formula {
        let f = cfg.formula.get_or_insert_with(Formula::default);
        if let Some(r) = &data.response {
            f.response = r.clone();
        }
        if let Some(t) = &data.trials {
            f.trials = Some(t.clone());
        }
        if let Some(c) = &data.covariates {
            f.covariates = c.clone();
        }
        if let Some(c) = &data.factors {
            f.factors = c.clone();
        }
        if let Some(c) = &data.center {
            f.center = c.clone();
        }
        if let Some(b) = data.binarize_above {
            f.binarize_above = Some(b);
        }
    }
    if let Some(m) = model {
        if let Some(k) = &m.model {
            cfg.model = Some(k.parse().map_err(usage)?);
        }
        if let Some(i) = &m.intercept {
            cfg.intercept = Some(match i.as_str() {
                "quantile" => InterceptMode::Quantile,
                "classical" => InterceptMode::Classical,
                other => return Err(CliError::Usage(format!("unknown intercept '{other}' (expected quantile or classical)"))),
            });
        }
        if let Some(s) = &m.skew_prior {
            s.parse::<SkewPriorSpec>().map_err(usage)?;
            cfg.priors.skew = Some(s.clone());
        }
        if let Some(b) = m.beta_precision {
            cfg.priors.beta_precision = Some(b);
        }
        if let Some(s) = m.seed {
            cfg.seed = Some(s);
        }
        let inf = &mut cfg.inference;
        inf.chains = m.chains.or(inf.chains);
        inf.iterations = m.iterations.or(inf.iterations);
        inf.warmup = m.warmup.or(inf.warmup);
        inf.level = m.level.or(inf.level);
    }
    Ok(cfg)
}

/// Loaded data with a label for reports.
pub struct ResolvedData {
    pub label: String,
    pub named: Option<NamedDataset>,
    pub loaded: Loaded,
}

fn sources(cfg: &RunConfig) -> Result<Sources> {
    Ok(Sources {
        heart: cfg.data.heart_source.as_deref().map(str::parse::<HeartSource>).transpose()?,
        verify_checksum: cfg.data.verify_checksum.unwrap_or(true),
        wines: cfg.data.wines.clone(),
    })
}

fn named(cfg: &RunConfig) -> Result<Option<NamedDataset>> {
    cfg.data.dataset.as_deref().map(str::parse).transpose()
}

/// The model kind from the configuration or the data's natural default.
pub fn model_kind(cfg: &RunConfig) -> Result<ModelKind> {
    if let Some(k) = cfg.model {
        return Ok(k);
    }
    Ok(match named(cfg)? {
        Some(NamedDataset::Wines) => ModelKind::SnRegression,
        Some(_) => ModelKind::SkewProbit,
        None => match &cfg.formula {
            Some(f) if f.trials.is_none() && f.binarize_above.is_none() => {
                return Err(CliError::Usage("--model is required for a CSV without a trials column".into()))
            }
            _ => ModelKind::SkewProbit,
        },
    })
}

pub fn resolve_data(cfg: &RunConfig, kind: ModelKind) -> Result<ResolvedData> {
    match (named(cfg)?, &cfg.data.path) {
        (Some(ds), _) => {
            if ds.is_binomial() != kind.is_binomial() {
                return Err(CliError::Usage(format!("model {kind} does not suit dataset {ds}")));
            }
            Ok(ResolvedData {
                label: ds.to_string(),
                named: Some(ds),
                loaded: ds.load(&sources(cfg)?)?,
            })
        }
        (None, Some(path)) => {
            let f = cfg
                .formula
                .as_ref()
                .filter(|f| !f.response.is_empty())
                .ok_or_else(|| CliError::Usage("a CSV needs --response (or a [formula] table)".into()))?;
            Ok(ResolvedData {
                label: path.display().to_string(),
                named: None,
                loaded: formula::load_csv(path, f, kind.is_binomial())?,
            })
        }
        (None, None) => Err(CliError::Usage("give --dataset NAME or --data PATH".into())),
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    data: &'a str,
    model: ModelKind,
    intercept: InterceptMode,
    skew_prior: String,
    beta_precision: f64,
    n: usize,
    dropped_rows: usize,
    centers: &'a BTreeMap<String, f64>,
    mcmc: McmcOptions,
    level: f64,
    summaries: &'a [ParamSummary],
    map: BTreeMap<&'a str, f64>,
    log_posterior_at_map: f64,
    log_evidence: Option<f64>,
    laplace_log_evidence: Option<f64>,
    evidence_error: Option<&'a str>,
    diagnostics: &'a Diagnostics,
}

fn fit_report<'a>(cfg: &RunConfig, kind: ModelKind, data: &'a ResolvedData, opts: &FitOptions, fit: &'a PosteriorResult) -> FitReport<'a> {
    FitReport {
        data: &data.label,
        model: kind,
        intercept: cfg.intercept.unwrap_or_default(),
        skew_prior: cfg.priors.skew.clone().unwrap_or_else(|| "pc:5".into()),
        beta_precision: cfg.priors.beta_precision.unwrap_or(DEFAULT_BETA_PRECISION),
        n: data.loaded.dataset.n(),
        dropped_rows: data.loaded.dropped,
        centers: &data.loaded.centers,
        mcmc: opts.mcmc,
        level: opts.level,
        summaries: &fit.summaries,
        map: fit.names.iter().map(String::as_str).zip(fit.map_natural.iter().copied()).collect(),
        log_posterior_at_map: fit.log_posterior_at_map,
        log_evidence: fit.log_evidence,
        laplace_log_evidence: fit.laplace_log_evidence,
        evidence_error: fit.evidence_error.as_deref(),
        diagnostics: &fit.diagnostics,
    }
}

fn write_or_print(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => atomic_write(p, bytes),
        None => out.write_all(bytes).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn say(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

pub fn fit_cmd(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = merged_config(&a.data, Some(&a.model))?;
    if a.no_evidence {
        cfg.inference.evidence = Some(false);
    }
    let kind = model_kind(&cfg)?;
    let data = resolve_data(&cfg, kind)?;
    let model = cfg.model(kind)?;
    let opts = cfg.fit_options()?;
    let fit = inference::fit(&model, &data.loaded.dataset, &opts)?;

    let mut text = format!("data: {} (n = {}, dropped {})\nmodel: {kind}\n", data.label, data.loaded.dataset.n(), data.loaded.dropped);
    text.push_str(&render_table(&fit, opts.level));
    if let Some(e) = fit.log_evidence {
        text.push_str(&format!("log evidence: {e:.4}\n"));
    }
    if let Some(e) = &fit.evidence_error {
        text.push_str(&format!("evidence unavailable: {e}\n"));
    }
    say(out, &text)?;

    if let Some(dir) = a.out.clone().or_else(|| cfg.output.dir.clone()) {
        atomic_write(&dir.join("summary.csv"), &summary_csv(&fit)?)?;
        atomic_write(&dir.join("samples.csv"), &samples_csv(&fit, opts.mcmc.chains)?)?;
        atomic_write(&dir.join("fit.json"), &json_bytes(&fit_report(&cfg, kind, &data, &opts, &fit))?)?;
    }
    Ok(())
}

/// Rows held out for scoring: a seeded shuffle, first `holdout · n` rows.
pub fn holdout_split(n: usize, holdout: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(CliError::Usage(format!("--holdout must lie in (0, 1), got {holdout}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((n as f64) * holdout).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(CliError::Usage(format!("holdout {holdout} leaves an empty split of {n} rows")));
    }
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Posterior predictive success probabilities, averaged over at most
/// `max_draws` evenly thinned draws.
pub fn predictive_probabilities(model: &Model, fit: &PosteriorResult, x: &DMatrix<f64>, max_draws: usize) -> Result<Vec<f64>> {
    if !model.kind.is_binomial() {
        return Err(CliError::Usage("prediction needs a binomial model".into()));
    }
    let m = x.ncols();
    let step = (fit.samples.len() / max_draws.max(1)).max(1);
    let mut acc = vec![0.0; x.nrows()];
    let mut used = 0usize;
    for draw in fit.samples.iter().step_by(step) {
        let gamma1 = if model.kind.has_skewness() { draw[m + 1] } else { 0.0 };
        let link = Link::new(gamma1_to_alpha(gamma1)?)?;
        let beta0 = match model.intercept {
            InterceptMode::Quantile => link.quantile_intercept(draw[0])?,
            InterceptMode::Classical => draw[0],
        };
        for (i, row) in x.row_iter().enumerate() {
            let eta = beta0 + row.iter().zip(&draw[1..=m]).map(|(a, b)| a * b).sum::<f64>();
            acc[i] += link.cdf(eta);
        }
        used += 1;
    }
    Ok(acc.into_iter().map(|s| s / used as f64).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictReport {
    pub data: String,
    pub model: ModelKind,
    pub seed: u64,
    pub holdout: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub correct_percent: f64,
}

/// Fits on the training rows and scores the held-out rows.
pub fn holdout_score(model: &Model, data: &Dataset, opts: &FitOptions, holdout: f64, seed: u64) -> Result<(f64, usize, usize)> {
    let (train, test) = holdout_split(data.n(), holdout, seed)?;
    let train_data = data.subset(&train)?;
    let test_data = data.subset(&test)?;
    let mut opts = *opts;
    opts.evidence = false;
    opts.mcmc.seed = seed;
    let fit = inference::fit(model, &train_data, &opts)?;
    let probs = predictive_probabilities(model, &fit, test_data.x(), 1000)?;
    let rate = inference::classification_rate(&probs, &test_data)?;
    Ok((100.0 * rate, train.len(), test.len()))
}

pub fn predict_cmd(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = merged_config(&a.data, Some(&a.model))?;
    let kind = model_kind(&cfg)?;
    if !kind.is_binomial() {
        return Err(CliError::Usage("predict needs a binomial model".into()));
    }
    let data = resolve_data(&cfg, kind)?;
    let model = cfg.model(kind)?;
    let opts = cfg.fit_options()?;
    let seed = cfg.seed.unwrap_or(opts.mcmc.seed);
    let (pct, n_train, n_test) = holdout_score(&model, &data.loaded.dataset, &opts, a.holdout, seed)?;
    say(out, &format!("correct classification: {pct:.2}% ({n_test} held out, {n_train} used for fitting, seed {seed})\n"))?;
    if let Some(p) = &a.out {
        let report = PredictReport {
            data: data.label,
            model: kind,
            seed,
            holdout: a.holdout,
            n_train,
            n_test,
            correct_percent: pct,
        };
        atomic_write(p, &json_bytes(&report)?)?;
    }
    Ok(())
}

fn symmetric_of(kind: ModelKind) -> ModelKind {
    match kind {
        ModelKind::SkewProbit | ModelKind::Probit => ModelKind::Probit,
        ModelKind::SnRegression | ModelKind::GaussianRegression => ModelKind::GaussianRegression,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvidenceComparison {
    pub data: String,
    pub models: Vec<ModelKind>,
    pub results: Vec<EvidenceResult>,
    /// First minus second log evidence.
    pub log_bayes_factor: f64,
    pub preferred: ModelKind,
}

pub fn evidence_cmd(a: &EvidenceArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = merged_config(&a.data, Some(&a.model))?;
    let first = model_kind(&cfg)?;
    let kinds: Vec<ModelKind> = match &a.models {
        Some(list) => list.iter().map(|s| s.parse().map_err(usage)).collect::<Result<_>>()?,
        None => {
            let base = if first.has_skewness() { first } else if first.is_binomial() { ModelKind::SkewProbit } else { ModelKind::SnRegression };
            vec![base, symmetric_of(base)]
        }
    };
    if kinds.len() != 2 || kinds[0].is_binomial() != kinds[1].is_binomial() {
        return Err(CliError::Usage("--models takes two models of the same response type".into()));
    }
    let data = resolve_data(&cfg, kinds[0])?;
    let opts = cfg.fit_options()?;
    let mut results = Vec::new();
    for &k in &kinds {
        results.push(inference::evidence(&cfg.model(k)?, &data.loaded.dataset, &opts.optim)?);
    }
    let bf = results[0].log_evidence - results[1].log_evidence;
    let cmp = EvidenceComparison {
        data: data.label,
        models: kinds.clone(),
        log_bayes_factor: bf,
        preferred: if bf >= 0.0 { kinds[0] } else { kinds[1] },
        results,
    };
    let mut text = String::new();
    for (k, r) in kinds.iter().zip(&cmp.results) {
        text.push_str(&format!("{:<20} log evidence {:>12.4}\n", k.to_string(), r.log_evidence));
    }
    text.push_str(&format!("log Bayes factor ({} vs {}): {bf:.4}; preferred: {}\n", kinds[0], kinds[1], cmp.preferred));
    say(out, &text)?;
    if let Some(p) = &a.out {
        atomic_write(p, &json_bytes(&cmp)?)?;
    }
    Ok(())
}

/// CSV grid of the PC prior: `value,density,scale,theta`.
pub fn prior_grid_csv(theta: f64, scale: PriorScale, points: usize, alpha_max: f64) -> Result<Vec<u8>> {
    let prior = PcSkewPrior::<f64>::new(theta).map_err(usage)?;
    let grid = prior.grid(scale, points, alpha_max).map_err(usage)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(format!("csv: {e}"));
    w.write_record(["value", "density", "scale", "theta"]).map_err(err)?;
    for (v, d) in grid {
        w.write_record([v.to_string(), d.to_string(), scale.to_string(), theta.to_string()]).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))
}

pub fn prior_cmd(a: &PriorArgs, out: &mut dyn Write) -> Result<()> {
    let scale: PriorScale = a.scale.parse().map_err(usage)?;
    let bytes = prior_grid_csv(a.theta, scale, a.points, a.alpha_max)?;
    write_or_print(a.out.as_deref(), &bytes, out)
}

/// One `[[scenario]]` entry of a scenario file.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub name: String,
    pub q: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub n_trials: u64,
    pub prior: Option<String>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub x_sd: Option<f64>,
    pub intercept: Option<InterceptMode>,
    pub beta_precision: Option<f64>,
    pub chains: Option<usize>,
    pub iterations: Option<usize>,
    pub warmup: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: Vec<ScenarioEntry>,
}

impl ScenarioEntry {
    pub fn build(&self, default_prior: SkewPriorSpec) -> Result<Scenario> {
        let prior = match &self.prior {
            Some(p) => p.parse().map_err(usage)?,
            None => default_prior,
        };
        let mut s = Scenario::new(&self.name, self.q, self.beta1, self.gamma1, self.n_trials, prior);
        s.n = self.n.unwrap_or(s.n);
        s.n_reps = self.reps.unwrap_or(s.n_reps);
        s.seed = self.seed.unwrap_or(s.seed);
        s.x_sd = self.x_sd.unwrap_or(s.x_sd);
        s.intercept_mode = self.intercept.unwrap_or(s.intercept_mode);
        s.beta_precision = self.beta_precision.unwrap_or(s.beta_precision);
        s.mcmc.chains = self.chains.unwrap_or(s.mcmc.chains);
        s.mcmc.iterations = self.iterations.unwrap_or(s.mcmc.iterations);
        s.mcmc.warmup = self.warmup.unwrap_or(s.mcmc.warmup);
        s.validate().map_err(usage)?;
        Ok(s)
    }
}

fn builtin_scenarios(names: &[String], prior: SkewPriorSpec) -> Result<Vec<Scenario>> {
    let all: Vec<Scenario> = simstudy::large_trial_scenarios(prior)
        .into_iter()
        .chain(simstudy::small_trial_scenarios(prior))
        .collect();
    let mut picked = Vec::new();
    for n in names {
        let matched: Vec<Scenario> = match n.as_str() {
            "all" => all.clone(),
            "large" | "binary" => all.iter().filter(|s| s.name.starts_with(n.as_str())).cloned().collect(),
            other => all.iter().filter(|s| s.name == other).cloned().collect(),
        };
        if matched.is_empty() {
            return Err(CliError::Usage(format!("unknown scenario '{n}' (expected large-1..4, binary-1..2, large, binary or all)")));
        }
        for s in matched {
            if !picked.iter().any(|p: &Scenario| p.name == s.name) {
                picked.push(s);
            }
        }
    }
    Ok(picked)
}

fn records_csv(report: &CoverageReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(format!("csv: {e}"));
    w.write_record(["rep", "estimate", "lo", "hi", "covered"]).map_err(err)?;
    for r in &report.records {
        w.write_record([r.rep.to_string(), r.estimate.to_string(), r.lo.to_string(), r.hi.to_string(), r.covered.to_string()])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))
}

#[derive(Serialize)]
struct CoverageSummary<'a> {
    scenario: &'a Scenario,
    replicates: usize,
    failures: usize,
    failure_rate: f64,
    cp: f64,
    mlci: f64,
    median_estimate: f64,
    median_abs_estimate: f64,
    median_lo: f64,
    median_hi: f64,
    failure_messages: Vec<&'a str>,
}

fn coverage_summary(r: &CoverageReport) -> CoverageSummary<'_> {
    CoverageSummary {
        scenario: &r.scenario,
        replicates: r.records.len(),
        failures: r.failures.len(),
        failure_rate: r.failure_rate(),
        cp: r.cp,
        mlci: r.mlci,
        median_estimate: r.median_estimate,
        median_abs_estimate: r.median_abs_estimate(),
        median_lo: r.median_lo,
        median_hi: r.median_hi,
        failure_messages: r.failures.iter().map(|f| f.error.as_str()).collect(),
    }
}

fn coverage_line(r: &CoverageReport) -> String {
    format!(
        "{:<16} {:<9} CP {:>6.1}  MLCI {:>7.3}  median {:>7.3}  failures {}\n",
        r.scenario.name,
        r.scenario.skew_prior.label(),
        r.cp,
        r.mlci,
        r.median_estimate,
        r.failures.len()
    )
}

fn write_coverage(dir: &Path, stem: &str, r: &CoverageReport) -> Result<()> {
    atomic_write(&dir.join(format!("{stem}.csv")), &records_csv(r)?)?;
    atomic_write(&dir.join(format!("{stem}.json")), &json_bytes(&coverage_summary(r))?)
}

fn interval_table(reports: &[(&str, &CoverageReport)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(format!("csv: {e}"));
    w.write_record(["mode", "rep", "estimate", "lo", "hi", "length"]).map_err(err)?;
    for (mode, r) in reports {
        for rec in &r.records {
            w.write_record([
                mode.to_string(),
                rec.rep.to_string(),
                rec.estimate.to_string(),
                rec.lo.to_string(),
                rec.hi.to_string(),
                (rec.hi - rec.lo).to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))
}

fn tune(s: &mut Scenario, a: &SimulateArgs) {
    if a.full_scale {
        s.n_reps = 500;
        s.mcmc = McmcOptions {
            seed: s.mcmc.seed,
            ..McmcOptions::default()
        };
    }
    if let Some(r) = a.reps {
        s.n_reps = r;
    }
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    if let Some(t) = a.trials {
        s.n_trials = t;
    }
    if let Some(x) = a.x_sd {
        s.x_sd = x;
    }
}

pub fn simulate_cmd(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let priors: Vec<SkewPriorSpec> = a
        .prior
        .iter()
        .map(|p| p.trim().parse().map_err(usage))
        .collect::<Result<_>>()?;

    if let Some(truth) = &a.confounding {
        let v: Vec<f64> = truth
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{t}' in --confounding"))))
            .collect::<Result<_>>()?;
        let [q, b1, g1] = v[..] else {
            return Err(CliError::Usage("--confounding takes q,beta1,gamma1".into()));
        };
        let mut base = Scenario::new("confounding", q, b1, g1, 1, priors.first().copied().unwrap_or(SkewPriorSpec::Pc { theta: 5.0 }));
        tune(&mut base, a);
        base.validate().map_err(usage)?;
        let rep = simstudy::confounding_from(&base)?;
        let mut text = String::new();
        for (mode, r) in [("quantile", &rep.quantile), ("classical", &rep.classical)] {
            text.push_str(&format!(
                "{mode:<10} median interval ({:.3}, {:.3})  median estimate {:.3}  CP {:.1}\n",
                r.median_lo, r.median_hi, r.median_estimate, r.cp
            ));
        }
        say(out, &text)?;
        if let Some(dir) = &a.out {
            write_coverage(dir, "confounding_quantile", &rep.quantile)?;
            write_coverage(dir, "confounding_classical", &rep.classical)?;
            atomic_write(
                &dir.join("confounding_intervals.csv"),
                &interval_table(&[("quantile", &rep.quantile), ("classical", &rep.classical)])?,
            )?;
        }
        return Ok(());
    }

    let mut scenarios = Vec::new();
    for prior in &priors {
        let base = match &a.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                let file: ScenarioFile = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                file.scenario.iter().map(|e| e.build(*prior)).collect::<Result<Vec<_>>>()?
            }
            None => builtin_scenarios(&a.scenario, *prior)?,
        };
        scenarios.extend(base);
    }
    for s in &mut scenarios {
        tune(s, a);
        s.validate().map_err(usage)?;
    }
    for s in &scenarios {
        let report = simstudy::run_scenario(s)?;
        say(out, &coverage_line(&report))?;
        if let Some(dir) = &a.out {
            write_coverage(dir, &format!("{}_{}", s.name, s.skew_prior.label()), &report)?;
        }
    }
    Ok(())
}

pub fn datasets_cmd(c: &DatasetsCommand, out: &mut dyn Write) -> Result<()> {
    match c {
        DatasetsCommand::List => {
            let cache = datasets::cache_dir().map_or_else(|| format!("unset (set {})", datasets::DATA_DIR_ENV), |d| d.display().to_string());
            say(
                out,
                &format!(
                    "beetle  bundled; 8 dose groups, killed out of total, centered log10 dose\n\
                     heart   {}; {} complete rows, {} events\n\
                     wines   user supplied (--wines or {}); columns wine, acidity, sugar, pH\n\
                     cache   {cache}\n",
                    HeartSource::default_source(),
                    datasets::HEART_ROWS,
                    datasets::HEART_EVENTS,
                    datasets::WINES_ENV,
                ),
            )
        }
        DatasetsCommand::Fetch { source, dir, no_checksum } => {
            let dir = dir
                .clone()
                .or_else(datasets::cache_dir)
                .ok_or_else(|| CliError::Usage(format!("give --dir or set {}", datasets::DATA_DIR_ENV)))?;
            let src: HeartSource = source.parse()?;
            let heart = datasets::fetch_heart(&src, !no_checksum)?;
            let target = dir.join(datasets::HEART_FILE);
            atomic_write(&target, &heart.bytes)?;
            say(
                out,
                &format!(
                    "wrote {} ({} complete rows, {} events, sha256 {})\n",
                    target.display(),
                    heart.loaded.dataset.n(),
                    heart.loaded.events(),
                    heart.sha256
                ),
            )
        }
        DatasetsCommand::Export { data, out: path } => {
            let cfg = merged_config(data, None)?;
            let kind = match named(&cfg)? {
                Some(ds) if !ds.is_binomial() => ModelKind::SnRegression,
                Some(_) => ModelKind::SkewProbit,
                None => model_kind(&cfg)?,
            };
            let resolved = resolve_data(&cfg, kind)?;
            let mut bytes = Vec::new();
            formula::write_dataset(&resolved.loaded.dataset, &mut bytes)?;
            write_or_print(path.as_deref(), &bytes, out)
        }
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => fit_cmd(a, out),
        Command::Simulate(a) => simulate_cmd(a, out),
        Command::Prior(a) => prior_cmd(a, out),
        Command::Predict(a) => predict_cmd(a, out),
        Command::Evidence(a) => evidence_cmd(a, out),
        Command::Datasets(c) => datasets_cmd(c, out),
    }
}
