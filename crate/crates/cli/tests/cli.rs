use std::path::Path;

use skewprobit_cli::commands::holdout_split;
use skewprobit_cli::config::RunConfig;
use skewprobit_cli::run;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("skewprobit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const SHORT: [&str; 6] = ["--chains", "2", "--iterations", "2000", "--warmup", "1000"];

fn fit_beetle(dir: &Path) -> (i32, String, String) {
    let d = dir.to_str().unwrap();
    let mut args = vec!["fit", "--dataset", "beetle", "--model", "skew_probit", "--skew-prior", "pc:5", "--seed", "7", "--out", d];
    args.extend(SHORT);
    cli(&args)
}

#[test]
fn prior_grid_schema() {
    let (code, out, _) = cli(&["prior", "--theta", "5", "--scale", "gamma1", "--points", "512"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("value,density,scale,theta"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 512);
    for r in &rows {
        assert_eq!(r.len(), 4);
        assert_eq!(r[2], "gamma1");
        assert_eq!(r[3], "5");
        assert!(r[1].parse::<f64>().unwrap() > 0.0);
    }
    let values: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn prior_grid_to_file_on_alpha_scale() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.csv");
    let (code, out, _) = cli(&["prior", "--scale", "alpha", "--points", "11", "--theta", "2", "--out", p.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().nth(1).unwrap().starts_with("-10,"));
    assert!(text.lines().nth(6).unwrap().starts_with("0,0,alpha,2"));
}

#[test]
fn fit_writes_the_table_schema_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (code, out, err) = fit_beetle(a.path());
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("log evidence"));
    assert_eq!(fit_beetle(b.path()).0, 0);
    for f in ["summary.csv", "samples.csv", "fit.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }
    let summary = std::fs::read_to_string(a.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "name,posterior_mean,ci_lo,ci_hi");
    let names: Vec<&str> = rows[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(names, ["q", "dosage", "gamma1"]);
    for r in &rows[1..] {
        let v: Vec<f64> = r.split(',').skip(1).map(|t| t.parse().unwrap()).collect();
        assert!(v[1] <= v[0] && v[0] <= v[2], "{r}");
    }
    let samples = std::fs::read_to_string(a.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().next(), Some("chain,q,dosage,gamma1"));
    assert_eq!(samples.lines().count(), 1 + 2 * 1000);

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(json["model"], "skew_probit");
    assert_eq!(json["mcmc"]["seed"], 7);
    assert!(json["log_evidence"].as_f64().unwrap() < 0.0);
    let text = std::fs::read_to_string(a.path().join("fit.json")).unwrap();
    let keys = ["\"data\"", "\"model\"", "\"summaries\"", "\"log_evidence\"", "\"diagnostics\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "key order changed");
}

#[test]
fn seed_changes_the_draws() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    fit_beetle(a.path());
    let mut args = vec!["fit", "--dataset", "beetle", "--no-evidence", "--seed", "8", "--out", b.path().to_str().unwrap()];
    args.extend(SHORT);
    assert_eq!(cli(&args).0, 0);
    let x = std::fs::read(a.path().join("samples.csv")).unwrap();
    let y = std::fs::read(b.path().join("samples.csv")).unwrap();
    assert!(x != y);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&["frobnicate"]).0, 2);
    assert_eq!(cli(&["fit", "--bogus"]).0, 2);
    assert_eq!(cli(&["fit"]).0, 2);
    assert_eq!(cli(&["fit", "--dataset", "nope"]).0, 2);
    assert_eq!(cli(&["fit", "--dataset", "beetle", "--model", "sn_regression"]).0, 2);
    assert_eq!(cli(&["fit", "--dataset", "beetle", "--skew-prior", "pc:-1"]).0, 2);
    assert_eq!(cli(&["prior", "--scale", "delta"]).0, 2);
    assert_eq!(cli(&["predict", "--dataset", "beetle", "--holdout", "1.5"]).0, 2);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("simulate"));
}

#[test]
fn data_and_numerical_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    std::fs::write(&p, "y,n,x\n1,4,1\n5,4,2\n3,4,3\n").unwrap();
    let (code, _, err) = cli(&["fit", "--data", p.to_str().unwrap(), "--response", "y", "--trials", "n", "--covariates", "x"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
    let (code, _, err) = cli(&["fit", "--data", p.to_str().unwrap(), "--response", "y", "--trials", "n", "--covariates", "z"]);
    assert_eq!(code, 1);
    assert!(err.contains("missing column 'z'"), "{err}");
}

#[test]
fn csv_fit_with_factor_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut text = String::from("dead,total,dose,group\n");
    for (i, (d, k)) in [(-1.0, 2), (-0.5, 4), (0.0, 7), (0.5, 11), (1.0, 15), (-0.8, 3), (0.2, 9), (0.9, 14)].iter().enumerate() {
        text.push_str(&format!("{k},20,{d},{}\n", ["a", "b"][i % 2]));
    }
    std::fs::write(&data, text).unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "model = \"probit\"\nseed = 3\n\n[data]\npath = \"{}\"\n\n[formula]\nresponse = \"dead\"\ntrials = \"total\"\ncovariates = [\"dose\", \"group\"]\nfactors = [\"group\"]\n\n[priors]\nbeta_precision = 0.01\n\n[inference]\nchains = 2\niterations = 1500\nwarmup = 500\n",
            data.display()
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let (code, out, err) = cli(&["fit", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("group(b)"));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let names: Vec<&str> = summary.lines().skip(1).map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(names, ["q", "dose", "group(b)"]);

    std::fs::write(&cfg, "model = \"probit\"\nunknown_key = 1\n").unwrap();
    assert_eq!(cli(&["fit", "--config", cfg.to_str().unwrap()]).0, 2);
}

#[test]
fn config_round_trips_through_toml() {
    let text = r#"
model = "sn_regression"
intercept = "quantile"
seed = 11

[data]
dataset = "wines"

[priors]
skew = "gaussian:0:100"
beta_precision = 0.001
precision_u = 1.0
precision_p = 0.01

[priors.beta.sugar]
mean = 0.0
precision = 0.5

[inference]
chains = 4
iterations = 10000
warmup = 5000
level = 0.9
"#;
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(RunConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    let p = cfg.prior_config().unwrap();
    assert_eq!(p.beta_prior("sugar").precision, 0.5);
    assert_eq!(p.beta_prior("pH").precision, 0.001);
    assert_eq!(cfg.fit_options().unwrap().level, 0.9);
    assert!(RunConfig::parse("[inference]\nwarmup = 10\niterations = 5\n").unwrap().fit_options().is_err());
}

#[test]
fn evidence_prefers_skewness_for_beetle() {
    let (code, out, err) = cli(&["evidence", "--dataset", "beetle"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("preferred: skew_probit"), "{out}");
}

#[test]
fn holdout_split_is_a_seeded_partition() {
    let (train, test) = holdout_split(297, 0.5, 3).unwrap();
    assert_eq!(test.len(), 149);
    let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..297).collect::<Vec<_>>());
    assert_eq!(holdout_split(297, 0.5, 3).unwrap(), (train, test.clone()));
    assert_ne!(holdout_split(297, 0.5, 4).unwrap().1, test);
}

#[test]
fn predict_reports_a_percentage() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let mut args = vec!["predict", "--dataset", "heart", "--holdout", "0.5", "--seed", "2", "--out", p.to_str().unwrap()];
    args.extend(SHORT);
    let (code, out, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("correct classification: ") && out.contains('%'), "{out}");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&p).unwrap()).unwrap();
    let pct = json["correct_percent"].as_f64().unwrap();
    assert!((50.0..=100.0).contains(&pct), "{pct}");
    assert_eq!(json["n_test"], 149);
}

#[test]
fn simulate_writes_replicate_records() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = cli(&["simulate", "--scenario", "large-1", "--reps", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("large-1"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("large-1_pc.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("rep,estimate,lo,hi,covered"));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("large-1_pc.json")).unwrap()).unwrap();
    assert_eq!(json["replicates"], 2);
    assert_eq!(cli(&["simulate", "--scenario", "large-9"]).0, 2);
}

#[test]
fn scenario_file_and_confounding_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(
        &cfg,
        "[[scenario]]\nname = \"tiny\"\nq = 0.5\nbeta1 = 1.0\ngamma1 = 0.0\nn_trials = 5\nn = 60\nreps = 1\niterations = 1200\nwarmup = 400\nchains = 2\n",
    )
    .unwrap();
    let (code, out, err) = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--prior", "pc:5,gaussian:0:100"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().nth(1).unwrap().contains("gaussian"));

    let (code, out, err) = cli(&["simulate", "--confounding", "0.4,0.1,-0.6667", "--reps", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("quantile") && out.contains("classical"));
    let t = std::fs::read_to_string(dir.path().join("confounding_intervals.csv")).unwrap();
    assert_eq!(t.lines().next(), Some("mode,rep,estimate,lo,hi,length"));
    assert_eq!(t.lines().count(), 3);
}

#[test]
fn datasets_list_fetch_and_export() {
    let (code, out, _) = cli(&["datasets", "list"]);
    assert_eq!(code, 0);
    assert!(out.contains("beetle") && out.contains("heart") && out.contains("wines"));

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.data");
    let bundled = skewprobit_cli::datasets::fetch_heart(&skewprobit_cli::datasets::HeartSource::Bundled, true).unwrap();
    std::fs::write(&src, &bundled.bytes).unwrap();
    let cache = dir.path().join("cache");
    let (code, out, err) = cli(&["datasets", "fetch", "--source", src.to_str().unwrap(), "--dir", cache.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("297 complete rows, 137 events"), "{out}");
    assert_eq!(std::fs::read(cache.join("processed.cleveland.data")).unwrap(), bundled.bytes);

    let (code, out, _) = cli(&["datasets", "export", "--dataset", "beetle"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("y,trials,dosage"));
    assert_eq!(out.lines().count(), 9);
}
