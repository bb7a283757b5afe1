//! Reading prediction dumps and writing reports.
//!
//! Three input formats are understood, chosen by file extension:
//!
//! * `.npy`: a float array of shape `(instances, samples, classes)` (or
//!   `(samples, classes)` for a single instance). No labels.
//! * `.jsonl`: one object per line,
//!   `{"id": "...", "probs": [[p0, ..., pC-1], ...], "label": k}` where
//!   `label` is optional and the number of samples may vary per line.
//! * `.csv`: header `instance_id,sample_idx,label,p0,...,p{C-1}`, one row
//!   per sample, `label` possibly empty.
//!
//! Every probability row is validated with [`INGEST_TOLERANCE`] and
//! renormalized.

mod csv_file;
mod jsonl;
pub mod npy;
pub mod report;

use std::path::Path;

pub use csv_file::{parse_csv, read_csv, write_csv};
pub use jsonl::{parse_jsonl, read_jsonl, write_jsonl};
pub use npy::{read_npy, write_npy, write_npy_file, Dtype, NpyArray};
pub use report::{write_report, Cell, Report, ReportFormat};

use crate::error::{CredalError, IngestError, Result};
use crate::types::{LabeledBatch, PredictionSet, ProbabilityVector, INGEST_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Npy,
    Jsonl,
    Csv,
}

impl SourceFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "npy" => Some(SourceFormat::Npy),
            "jsonl" | "ndjson" => Some(SourceFormat::Jsonl),
            "csv" => Some(SourceFormat::Csv),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::Npy => "npy",
            SourceFormat::Jsonl => "jsonl",
            SourceFormat::Csv => "csv",
        }
    }
}

/// A parsed prediction file.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionFile {
    pub batch: LabeledBatch,
    pub format: SourceFormat,
    pub dtype: Dtype,
}

/// Reads a prediction file, picking the parser from the extension.
pub fn read_predictions(path: &Path) -> Result<PredictionFile> {
    let format = SourceFormat::from_path(path).ok_or_else(|| {
        CredalError::Ingest(IngestError::MalformedLine {
            line: 0,
            reason: format!(
                "unrecognized extension on {} (expected .npy, .jsonl or .csv)",
                path.display()
            ),
        })
    })?;
    let (batch, dtype) = match format {
        SourceFormat::Npy => {
            let arr = read_npy(path)?;
            (batch_from_npy(&arr)?, arr.dtype)
        }
        SourceFormat::Jsonl => (read_jsonl(path)?, Dtype::F64),
        SourceFormat::Csv => (read_csv(path)?, Dtype::F64),
    };
    Ok(PredictionFile {
        batch,
        format,
        dtype,
    })
}

/// Validates every row of an NPY array into an unlabeled batch with ids
/// `"0"`, `"1"`, ...
pub fn batch_from_npy(arr: &NpyArray) -> Result<LabeledBatch> {
    let [instances, samples, _] = arr.shape;
    if instances == 0 || samples == 0 {
        return Err(IngestError::NoInstances.into());
    }
    let mut sets = Vec::with_capacity(instances);
    for i in 0..instances {
        let rows = (0..samples)
            .map(|n| {
                ProbabilityVector::new(arr.row(i, n).to_vec(), INGEST_TOLERANCE).map_err(|e| {
                    IngestError::InvalidProbabilityAt {
                        offset: arr.row_offset(i, n),
                        instance: i,
                        sample: n,
                        reason: e.to_string(),
                    }
                    .into()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        sets.push(PredictionSet::new(rows)?);
    }
    LabeledBatch::new((0..instances).map(|i| i.to_string()).collect(), sets, None)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CredalError + '_ {
    move |source| CredalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Collects optional per-instance labels; all or nothing.
fn collect_labels(labels: Vec<Option<usize>>) -> Result<Option<Vec<usize>>> {
    if labels.iter().all(Option::is_none) {
        Ok(None)
    } else if labels.iter().all(Option::is_some) {
        Ok(Some(labels.into_iter().flatten().collect()))
    } else {
        Err(CredalError::PartialLabels)
    }
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "Infinity".to_string()
    } else {
        "-Infinity".to_string()
    }
}
