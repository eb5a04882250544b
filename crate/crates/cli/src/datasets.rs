use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::formula::{Formula, Loaded};
use crate::table::Table;

/// Environment variable naming the dataset cache directory.
pub const DATA_DIR_ENV: &str = "SKEWPROBIT_DATA_DIR";
/// Environment variable naming a wines CSV.
pub const WINES_ENV: &str = "SKEWPROBIT_WINES";

pub const HEART_URL: &str = "https://archive.ics.uci.edu/ml/machine-learning-databases/heart-disease/processed.cleveland.data";
pub const HEART_FILE: &str = "processed.cleveland.data";
pub const HEART_SHA256: &str = "e70128b9dda14ce9dd8e5e4e9fca9c5297b13cbeb2cb63de8846f07fc595e4c0";
pub const HEART_ROWS: usize = 297;
pub const HEART_EVENTS: usize = 137;
pub const HEART_COLUMNS: [&str; 14] = [
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach", "exang", "oldpeak", "slope", "ca", "thal", "num",
];

const BEETLE_CSV: &str = include_str!("../data/beetle.csv");
const HEART_BUNDLED: &[u8] = include_bytes!("../data/processed.cleveland.data");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedDataset {
    Beetle,
    Heart,
    Wines,
}

impl FromStr for NamedDataset {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beetle" => Ok(Self::Beetle),
            "heart" | "heart_cleveland" => Ok(Self::Heart),
            "wines" => Ok(Self::Wines),
            other => Err(CliError::Usage(format!("unknown dataset '{other}' (expected beetle, heart or wines)"))),
        }
    }
}

impl std::fmt::Display for NamedDataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Beetle => "beetle",
            Self::Heart => "heart",
            Self::Wines => "wines",
        })
    }
}

/// Where the heart file comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeartSource {
    Bundled,
    Path(PathBuf),
    Url(String),
}

impl FromStr for HeartSource {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(if s == "bundled" {
            Self::Bundled
        } else if s.starts_with("http://") || s.starts_with("https://") {
            Self::Url(s.to_string())
        } else {
            Self::Path(PathBuf::from(s))
        })
    }
}

impl std::fmt::Display for HeartSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Bundled => f.write_str("bundled"),
            Self::Path(p) => write!(f, "{}", p.display()),
            Self::Url(u) => f.write_str(u),
        }
    }
}

impl HeartSource {
    /// The cached copy if one exists, else the bundled one.
    pub fn default_source() -> Self {
        match cache_dir().map(|d| d.join(HEART_FILE)) {
            Some(p) if p.is_file() => Self::Path(p),
            _ => Self::Bundled,
        }
    }

    pub fn bytes(&self) -> Result<Vec<u8>> {
        match self {
            Self::Bundled => Ok(HEART_BUNDLED.to_vec()),
            Self::Path(p) => std::fs::read(p).map_err(|e| CliError::io(p, e)),
            Self::Url(u) => download(u),
        }
    }
}

/// The cache directory from the environment, if set.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn download(url: &str) -> Result<Vec<u8>> {
    let resp = ureq::get(url)
        .timeout(std::time::Duration::from_secs(60))
        .call()
        .map_err(|e| CliError::Fetch(format!("{url}: {e}")))?;
    let mut buf = Vec::new();
    std::io::Read::read_to_end(&mut resp.into_reader(), &mut buf).map_err(|e| CliError::Fetch(format!("{url}: {e}")))?;
    Ok(buf)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Response, covariates and complete-case columns for the heart data.
pub fn heart_formula() -> Formula {
    Formula {
        response: "num".into(),
        trials: None,
        covariates: ["sex", "cp", "trestbps", "slope", "ca"].map(String::from).to_vec(),
        factors: vec!["cp".into(), "slope".into()],
        center: vec!["trestbps".into(), "ca".into()],
        binarize_above: Some(0.0),
        require: vec!["thal".into()],
    }
}

pub fn beetle_formula() -> Formula {
    Formula {
        response: "killed".into(),
        trials: Some("total".into()),
        covariates: vec!["dosage".into()],
        center: vec!["dosage".into()],
        ..Formula::default()
    }
}

/// Column contract for a user-supplied wines CSV.
pub fn wines_formula() -> Formula {
    Formula {
        response: "acidity".into(),
        trials: None,
        covariates: vec!["wine".into(), "sugar".into(), "pH".into()],
        factors: vec!["wine:Barolo".into()],
        center: vec!["sugar".into(), "pH".into()],
        ..Formula::default()
    }
}

pub fn beetle_table() -> Table {
    Table::from_reader(BEETLE_CSV.as_bytes()).expect("bundled beetle data")
}

/// A materialized heart dataset with its provenance.
#[derive(Debug, Clone)]
pub struct HeartData {
    pub loaded: Loaded,
    pub sha256: String,
    pub bytes: Vec<u8>,
}

/// Parses and validates heart bytes: 297 complete rows with 137 events,
/// and the reference checksum when `verify_checksum` is set.
pub fn heart_from_bytes(bytes: Vec<u8>, verify_checksum: bool) -> Result<HeartData> {
    let wrap = |e: CliError| CliError::Validation {
        check: "parse",
        detail: e.to_string(),
    };
    let table = Table::from_reader_headerless(bytes.as_slice(), &HEART_COLUMNS).map_err(wrap)?;
    let loaded = heart_formula().apply(&table, true).map_err(wrap)?;
    if loaded.dataset.n() != HEART_ROWS {
        return Err(CliError::Validation {
            check: "row count",
            detail: format!("expected {HEART_ROWS} complete rows, found {}", loaded.dataset.n()),
        });
    }
    let events = loaded.events();
    if events != HEART_EVENTS as f64 {
        return Err(CliError::Validation {
            check: "event count",
            detail: format!("expected {HEART_EVENTS} events, found {events}"),
        });
    }
    let sha256 = sha256_hex(&bytes);
    if verify_checksum && sha256 != HEART_SHA256 {
        return Err(CliError::Validation {
            check: "checksum",
            detail: format!("sha256 {sha256} differs from {HEART_SHA256}"),
        });
    }
    Ok(HeartData { loaded, sha256, bytes })
}

pub fn fetch_heart(source: &HeartSource, verify_checksum: bool) -> Result<HeartData> {
    heart_from_bytes(source.bytes()?, verify_checksum)
}

/// Resolves the wines CSV from an explicit path, then the environment,
/// then the cache directory.
pub fn wines_path(explicit: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(WINES_ENV).filter(|v| !v.is_empty()) {
        return Ok(PathBuf::from(p));
    }
    if let Some(p) = cache_dir().map(|d| d.join("wines.csv")).filter(|p| p.is_file()) {
        return Ok(p);
    }
    Err(CliError::Usage(format!(
        "the wines data are not bundled; pass --wines PATH or set {WINES_ENV} (columns: wine, acidity, sugar, pH)"
    )))
}

/// Inputs needed to materialize a named dataset.
#[derive(Debug, Clone)]
pub struct Sources {
    pub heart: Option<HeartSource>,
    pub verify_checksum: bool,
    pub wines: Option<PathBuf>,
}

impl Default for Sources {
    fn default() -> Self {
        Self {
            heart: None,
            verify_checksum: true,
            wines: None,
        }
    }
}

impl NamedDataset {
    pub fn formula(self) -> Formula {
        match self {
            Self::Beetle => beetle_formula(),
            Self::Heart => heart_formula(),
            Self::Wines => wines_formula(),
        }
    }

    pub fn is_binomial(self) -> bool {
        !matches!(self, Self::Wines)
    }

    pub fn load(self, sources: &Sources) -> Result<Loaded> {
        match self {
            Self::Beetle => beetle_formula().apply(&beetle_table(), true),
            Self::Heart => {
                let src = sources.heart.clone().unwrap_or_else(HeartSource::default_source);
                Ok(fetch_heart(&src, sources.verify_checksum)?.loaded)
            }
            Self::Wines => {
                let path = wines_path(sources.wines.as_deref())?;
                crate::formula::load_csv(&path, &wines_formula(), false)
            }
        }
    }
}
