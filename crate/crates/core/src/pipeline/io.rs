//! Output files: atomic writes, TSV reading and stage diagnostics.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;

/// Write `path` through a temporary sibling and rename it into place, so a
/// crash never leaves a half-written output behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), PipelineError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let io_err = |e: io::Error| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut out = BufWriter::new(File::create(&tmp)?);
        fill(&mut out)?;
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

/// Read a TSV file with a fixed header, calling `row` on every data line's
/// columns. Errors name the file and line.
pub fn read_tsv<T>(
    path: &Path,
    header: &[&str],
    mut row: impl FnMut(&[&str]) -> Result<T, String>,
) -> Result<Vec<T>, PipelineError> {
    let file = File::open(path).map_err(|_| PipelineError::MissingInput(path.to_path_buf()))?;
    let bad = |line: usize, message: String| PipelineError::Intermediate {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let cols: Vec<&str> = line.split('\t').collect();
        if i == 0 {
            if cols != header {
                return Err(bad(1, format!("expected header {:?}", header.join("\t"))));
            }
            continue;
        }
        if cols.len() != header.len() {
            return Err(bad(i + 1, format!("expected {} columns, found {}", header.len(), cols.len())));
        }
        out.push(row(&cols).map_err(|m| bad(i + 1, m))?);
    }
    Ok(out)
}

pub fn parse_col<T: std::str::FromStr>(value: &str, name: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad {name} {value:?}"))
}

/// What a stage recorded about its run. Stored as JSON next to its outputs;
/// `params` doubles as the cache key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: String,
    pub language: Option<String>,
    pub params: BTreeMap<String, String>,
    pub tallies: BTreeMap<String, u64>,
}

impl StageDiagnostics {
    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        let json = serde_json::to_string_pretty(self).expect("diagnostics serialize");
        write_atomic(path, |w| writeln!(w, "{json}"))
    }

    pub fn read(path: &Path) -> Option<Self> {
        let text = fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }
}
