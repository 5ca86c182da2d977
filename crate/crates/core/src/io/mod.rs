//! Dataset bundles on disk and result files.
//!
//! A bundle is a directory of CSV files plus `meta.toml`:
//!
//! | file | columns |
//! |---|---|
//! | `resources.csv` | `name,carrier,e_op,gwp_op,avail` (empty `avail` = unlimited) |
//! | `technologies.csv` | `name,e_constr,gwp_constr,lifetime,f_min,f_max` (`inf` allowed) |
//! | `conversion.csv` | `technology,carrier,coefficient` |
//! | `storage.csv` | `name,carrier,eff_in,eff_out,e_constr,gwp_constr,lifetime,f_max` |
//! | `demands.csv` | `name,carrier,annual` |
//! | `profiles.csv` | `demand,td,hour,share` (hour 1..=24) |
//! | `cpt.csv` | `technology,td,hour,cpt` |
//! | `typical_days.csv` | `id,weight` |
//! | `shares.csv` (optional) | `name,carrier,relation,fraction,technologies` (`;`-separated) |
//! | `uncertain.csv` (optional) | `path,kind,lo,hi` |
//!
//! `meta.toml` holds `name`, `t_op`, a free `[units]` table and
//! `[categories]` mapping resource names to category tags.

mod bundle;
mod report;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::ValidationError;

pub use bundle::{load, save, Dataset, Meta, OPTIONAL_FILES, REQUIRED_FILES};
pub use report::{
    read_run_report, write_indices_csv, write_mix_csv, write_pdf_csv, write_summary_csv, RunReport, SCHEMA_VERSION,
};

/// One problem in one input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub file: String,
    /// 1-based; `None` when the problem is not tied to a line.
    pub line: Option<u64>,
    /// 1-based field index.
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
            if let Some(c) = self.column {
                write!(f, ":{c}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

fn list(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("\n  {i}")).collect()
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing file(s) in {}: {}", .dir.display(), .files.join(", "))]
    MissingFile { dir: PathBuf, files: Vec<String> },
    #[error("{} problem(s) in dataset:{}", .0.len(), list(.0))]
    Parse(Vec<Issue>),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}
