use std::io::Write;
use std::path::Path;

use serde::Serialize;
use skewprobit::inference::PosteriorResult;

use crate::error::{CliError, Result};

/// Writes via a sibling temporary file and a rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))
}

pub const SUMMARY_HEADER: [&str; 4] = ["name", "posterior_mean", "ci_lo", "ci_hi"];

/// Posterior table with columns `name,posterior_mean,ci_lo,ci_hi`.
pub fn summary_csv(fit: &PosteriorResult) -> Result<Vec<u8>> {
    csv_bytes(
        &SUMMARY_HEADER,
        fit.summaries
            .iter()
            .map(|s| vec![s.name.clone(), s.mean.to_string(), s.lo.to_string(), s.hi.to_string()]),
    )
}

/// Natural-scale draws, one row per draw with a leading chain index.
pub fn samples_csv(fit: &PosteriorResult, chains: usize) -> Result<Vec<u8>> {
    let mut header = vec!["chain"];
    header.extend(fit.names.iter().map(String::as_str));
    let per_chain = fit.samples.len() / chains.max(1);
    csv_bytes(
        &header,
        fit.samples.iter().enumerate().map(|(i, row)| {
            let mut r = vec![(i / per_chain.max(1)).to_string()];
            r.extend(row.iter().map(|v| v.to_string()));
            r
        }),
    )
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data(format!("json: {e}")))?;
    s.push(b'\n');
    Ok(s)
}

/// Fixed-width text rendering of the posterior table.
pub fn render_table(fit: &PosteriorResult, level: f64) -> String {
    let width = fit.names.iter().map(String::len).max().unwrap_or(4).max(4);
    let mut s = format!(
        "{:<width$}  {:>12}  {:>12}  {:>12}\n",
        "name",
        "mean",
        format!("{:.1}% lo", 50.0 * (1.0 - level)),
        format!("{:.1}% hi", 50.0 * (1.0 + level)),
    );
    for p in &fit.summaries {
        s.push_str(&format!("{:<width$}  {:>12.4}  {:>12.4}  {:>12.4}\n", p.name, p.mean, p.lo, p.hi));
    }
    s
}
