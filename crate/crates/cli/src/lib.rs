//! Pipeline commands behind the `featrend` binary.

pub mod config;
pub mod scan;
pub mod summary;
pub mod svg;
pub mod trends;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use featrend_core::history::{read_history, HistoryError, RepositoryHistory};
use featrend_miner::MineError;
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: no such file or directory")]
    PathNotFound(PathBuf),
    #[error("input mismatch: {0}")]
    InputMismatch(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error("{path}: {source}")]
    History { path: PathBuf, source: HistoryError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A problem that did not stop the command; printed as `warning<TAB>source<TAB>message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub source: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clean = |s: &str| s.replace(['\t', '\n'], " ");
        write!(f, "warning\t{}\t{}", clean(&self.source), clean(&self.message))
    }
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(content.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn load_history(path: &Path) -> Result<RepositoryHistory, CliError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::PathNotFound(path.to_path_buf()),
        _ => CliError::Io { path: path.to_path_buf(), source: e },
    })?;
    read_history(std::io::BufReader::new(file)).map_err(|source| CliError::History { path: path.to_path_buf(), source })
}

/// Ratios and other reals in CSV output.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.6}")
}

/// Percentages are shown without decimals, next to the raw count.
pub fn fmt_pct(v: f64) -> String {
    format!("{v:.0}")
}
