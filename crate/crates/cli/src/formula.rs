use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use skewprobit::models::Dataset;

use crate::error::{CliError, Result};
use crate::table::Table;

/// Column roles used to turn a table into a design.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Formula {
    pub response: String,
    #[serde(default)]
    pub trials: Option<String>,
    /// Covariates in design order.
    #[serde(default)]
    pub covariates: Vec<String>,
    /// Covariates coded as factors, as `col` or `col:Reference`.
    #[serde(default)]
    pub factors: Vec<String>,
    #[serde(default)]
    pub center: Vec<String>,
    /// Response recoded to 1 above this value and 0 otherwise.
    #[serde(default)]
    pub binarize_above: Option<f64>,
    /// Further columns that must be present for a row to be kept.
    #[serde(default)]
    pub require: Vec<String>,
}

/// A loaded dataset plus what the loader did to get there.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Zero-based indices of the source rows that were kept.
    pub kept_rows: Vec<usize>,
    pub dropped: usize,
    /// Column means subtracted by centering.
    pub centers: BTreeMap<String, f64>,
}

impl Loaded {
    /// Events in a binary or binomial response.
    pub fn events(&self) -> f64 {
        self.dataset.y().iter().sum()
    }
}

enum Term {
    Numeric { col: usize, name: String },
    Factor { col: usize, name: String, reference: Option<String> },
}

fn parse_num(raw: &str, row: usize, col: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Data(format!("row {} (line {}), column '{col}': cannot parse '{raw}' as a number", row + 1, row + 2)))
}

fn level_label(level: &str) -> String {
    match level.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 => format!("{}", v as i64),
        _ => level.to_string(),
    }
}

fn sort_levels(levels: &mut [String]) {
    let numeric: Option<Vec<f64>> = levels.iter().map(|l| l.parse::<f64>().ok()).collect();
    if numeric.is_some() {
        levels.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    } else {
        levels.sort();
    }
}

impl Formula {
    fn factor_spec(&self, name: &str) -> Option<Option<String>> {
        self.factors.iter().find_map(|f| match f.split_once(':') {
            Some((c, r)) if c == name => Some(Some(r.to_string())),
            None if f == name => Some(None),
            _ => None,
        })
    }

    fn check(&self) -> Result<()> {
        for f in &self.factors {
            let col = f.split_once(':').map_or(f.as_str(), |p| p.0);
            if !self.covariates.iter().any(|c| c == col) {
                return Err(CliError::Data(format!("factor '{col}' is not among the covariates")));
            }
        }
        for c in &self.center {
            if !self.covariates.contains(c) {
                return Err(CliError::Data(format!("centered column '{c}' is not among the covariates")));
            }
            if self.factor_spec(c).is_some() {
                return Err(CliError::Data(format!("cannot center factor '{c}'")));
            }
        }
        Ok(())
    }

    /// Builds the dataset. `binomial` selects a binomial response; without
    /// a trials column each row is a single trial.
    pub fn apply(&self, table: &Table, binomial: bool) -> Result<Loaded> {
        self.check()?;
        let resp = table.column(&self.response)?;
        let trials = self.trials.as_deref().map(|t| table.column(t)).transpose()?;
        let mut terms = Vec::with_capacity(self.covariates.len());
        for name in &self.covariates {
            let col = table.column(name)?;
            terms.push(match self.factor_spec(name) {
                Some(reference) => Term::Factor {
                    col,
                    name: name.clone(),
                    reference,
                },
                None => Term::Numeric { col, name: name.clone() },
            });
        }
        let mut used: Vec<usize> = vec![resp];
        used.extend(trials);
        used.extend(terms.iter().map(|t| match t {
            Term::Numeric { col, .. } | Term::Factor { col, .. } => *col,
        }));
        for r in &self.require {
            used.push(table.column(r)?);
        }

        let mut kept = Vec::new();
        for (i, row) in table.rows.iter().enumerate() {
            if row.iter().all(Option::is_none) {
                return Err(CliError::Data(format!("row {} (line {}): all cells are missing", i + 1, i + 2)));
            }
            if used.iter().all(|&c| row[c].is_some()) {
                kept.push(i);
            }
        }
        if kept.is_empty() {
            return Err(CliError::Data("no complete rows remain".into()));
        }
        let value = |i: usize, c: usize| table.rows[i][c].as_deref().expect("complete row");

        let mut y = Vec::with_capacity(kept.len());
        let mut n_trials = Vec::with_capacity(kept.len());
        for &i in &kept {
            let mut v = parse_num(value(i, resp), i, &self.response)?;
            if let Some(t) = self.binarize_above {
                v = if v > t { 1.0 } else { 0.0 };
            }
            y.push(v);
            if let Some(c) = trials {
                n_trials.push(parse_num(value(i, c), i, self.trials.as_deref().unwrap_or_default())?);
            }
        }

        let mut names = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut centers = BTreeMap::new();
        for term in &terms {
            match term {
                Term::Numeric { col, name } => {
                    let mut v = kept.iter().map(|&i| parse_num(value(i, *col), i, name)).collect::<Result<Vec<_>>>()?;
                    if self.center.contains(name) {
                        let mean = v.iter().sum::<f64>() / v.len() as f64;
                        v.iter_mut().for_each(|x| *x -= mean);
                        centers.insert(name.clone(), mean);
                    }
                    names.push(name.clone());
                    columns.push(v);
                }
                Term::Factor { col, name, reference } => {
                    let mut levels: Vec<String> = kept.iter().map(|&i| value(i, *col).to_string()).collect();
                    sort_levels(&mut levels);
                    levels.dedup();
                    let base = match reference {
                        Some(r) => levels
                            .iter()
                            .position(|l| l == r || level_label(l) == *r)
                            .ok_or_else(|| CliError::Data(format!("factor '{name}' has no level '{r}' (levels: {})", levels.join(", "))))?,
                        None => 0,
                    };
                    for (k, level) in levels.iter().enumerate() {
                        if k == base {
                            continue;
                        }
                        names.push(format!("{name}({})", level_label(level)));
                        columns.push(kept.iter().map(|&i| f64::from(u8::from(value(i, *col) == level))).collect());
                    }
                }
            }
        }

        let n = kept.len();
        let x = DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
        let dataset = match (binomial, trials) {
            (true, Some(_)) => Dataset::binomial(y, n_trials, x, names)?,
            (true, None) => Dataset::bernoulli(y, x, names)?,
            (false, None) => Dataset::continuous(y, x, names)?,
            (false, Some(_)) => return Err(CliError::Data("a trials column needs a binomial model".into())),
        };
        Ok(Loaded {
            dataset,
            dropped: table.n_rows() - n,
            kept_rows: kept,
            centers,
        })
    }
}

/// Reads a CSV with a header row and applies `formula`.
pub fn load_csv(path: &Path, formula: &Formula, binomial: bool) -> Result<Loaded> {
    formula.apply(&Table::read_path(path)?, binomial)
}

/// Writes `data` as CSV: response `y`, then `trials` for binomial data,
/// then one column per covariate.
pub fn write_dataset<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["y".to_string()];
    if data.n_trials().is_some() {
        header.push("trials".into());
    }
    header.extend(data.column_names().iter().cloned());
    let csv_err = |e: csv::Error| CliError::Data(format!("writing dataset: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..data.n() {
        let mut rec = vec![data.y()[i].to_string()];
        if let Some(t) = data.n_trials() {
            rec.push(t[i].to_string());
        }
        rec.extend(data.x().row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Data(format!("writing dataset: {e}")))?;
    Ok(())
}

/// The formula that reads back what [`write_dataset`] wrote.
pub fn written_formula(data: &Dataset) -> Formula {
    Formula {
        response: "y".into(),
        trials: data.n_trials().map(|_| "trials".into()),
        covariates: data.column_names().to_vec(),
        ..Formula::default()
    }
}
