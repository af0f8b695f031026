//! File formats: interval dataset CSV, fit result JSON, study config JSON,
//! summary and trace CSVs. Every file is written to a temporary sibling and
//! renamed into place, so a failed write never leaves a partial file.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use gecens::{InspectionSchedule, IntervalDataset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl IoError {
    fn io(path: &Path, source: io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl ToString) -> Self {
        IoError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| IoError::io(path, e))?;
    tmp.write_all(contents).map_err(|e| IoError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetRow {
    interval: usize,
    t_lower: f64,
    t_upper: f64,
    failures: u64,
    removals: u64,
}

/// CSV with header `interval,t_lower,t_upper,failures,removals`.
pub fn dataset_to_csv(data: &IntervalDataset, schedule: &InspectionSchedule) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, ((lower, upper), (x, r))) in schedule.intervals().zip(data.counts()).enumerate() {
        w.serialize(DatasetRow {
            interval: i + 1,
            t_lower: lower,
            t_upper: upper,
            failures: x,
            removals: r,
        })
        .expect("in-memory CSV write");
    }
    w.into_inner().expect("in-memory CSV flush")
}

/// Parse and validate a dataset CSV: rows numbered `1..=m` in order,
/// contiguous intervals starting at 0, strictly increasing times, and a
/// positive total `n = Σ x_i + r_i`.
pub fn dataset_from_csv<R: Read>(
    reader: R,
    path: &Path,
) -> Result<(IntervalDataset, InspectionSchedule), IoError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| IoError::format(path, e))?.clone();
    let expected = ["interval", "t_lower", "t_upper", "failures", "removals"];
    if header.iter().ne(expected.iter().copied()) {
        return Err(IoError::format(
            path,
            format!("expected header {}", expected.join(",")),
        ));
    }
    let mut times = Vec::new();
    let mut failures = Vec::new();
    let mut removals = Vec::new();
    let mut prev_upper = 0.0;
    for (k, row) in rdr.deserialize::<DatasetRow>().enumerate() {
        let row = row.map_err(|e| IoError::format(path, e))?;
        if row.interval != k + 1 {
            return Err(IoError::format(
                path,
                format!("row {} has interval {}", k + 1, row.interval),
            ));
        }
        if row.t_lower != prev_upper {
            return Err(IoError::format(
                path,
                format!(
                    "interval {} starts at {} but the previous ends at {}",
                    row.interval, row.t_lower, prev_upper
                ),
            ));
        }
        prev_upper = row.t_upper;
        times.push(row.t_upper);
        failures.push(row.failures);
        removals.push(row.removals);
    }
    let schedule = InspectionSchedule::new(times).map_err(|e| IoError::format(path, e))?;
    let data = IntervalDataset::new(failures, removals).map_err(|e| IoError::format(path, e))?;
    Ok((data, schedule))
}

pub fn read_dataset(path: &Path) -> Result<(IntervalDataset, InspectionSchedule), IoError> {
    let file = fs::File::open(path).map_err(|e| IoError::io(path, e))?;
    dataset_from_csv(file, path)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::format(path, e))
}

/// Parse `1.5,2,3.25` into numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("`{}`: {e}", t.trim()))
        })
        .collect()
}
