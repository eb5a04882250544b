use std::io::Read;
use std::path::Path;

use crate::error::{CliError, Result};

/// Cell tokens read as missing.
pub const MISSING_TOKENS: [&str; 3] = ["", "NA", "?"];

/// Raw string table; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

fn cell(raw: &str) -> Option<String> {
    let t = raw.trim();
    (!MISSING_TOKENS.contains(&t)).then(|| t.to_string())
}

impl Table {
    /// Reads CSV with a header row.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Data(format!("header: {e}")))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        Self::collect(columns, rdr)
    }

    /// Reads headerless CSV, naming the columns from `columns`.
    pub fn from_reader_headerless<R: Read>(reader: R, columns: &[&str]) -> Result<Self> {
        let rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        Self::collect(columns.iter().map(|c| c.to_string()).collect(), rdr)
    }

    fn collect<R: Read>(columns: Vec<String>, mut rdr: csv::Reader<R>) -> Result<Self> {
        if columns.is_empty() || columns.iter().all(|c| c.is_empty()) {
            return Err(CliError::Data("header row is empty".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Data(format!("row {}: {e}", i + 1)))?;
            if rec.len() != columns.len() {
                return Err(CliError::Data(format!(
                    "row {}: expected {} fields, found {}",
                    i + 1,
                    columns.len(),
                    rec.len()
                )));
            }
            rows.push(rec.iter().map(cell).collect());
        }
        Ok(Self { columns, rows })
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        Self::from_reader(file).map_err(|e| match e {
            CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| {
            CliError::Data(format!(
                "missing column '{name}' (available: {})",
                self.columns.join(", ")
            ))
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}
