use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{collect_labels, format_float, io_error};
use crate::error::{IngestError, Result};
use crate::types::{LabeledBatch, PredictionSet, ProbabilityVector, INGEST_TOLERANCE};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    probs: Vec<Vec<f64>>,
    #[serde(default)]
    label: Option<usize>,
}

pub fn read_jsonl(path: &Path) -> Result<LabeledBatch> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_jsonl(&text)
}

/// Parses JSON-lines prediction records; blank lines are skipped.
pub fn parse_jsonl(text: &str) -> Result<LabeledBatch> {
    let mut ids = Vec::new();
    let mut sets = Vec::new();
    let mut labels = Vec::new();
    let mut classes = None;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(raw).map_err(|e| IngestError::MalformedLine {
            line,
            reason: e.to_string(),
        })?;
        if record.probs.is_empty() {
            return Err(IngestError::MalformedLine {
                line,
                reason: "\"probs\" has no samples".into(),
            }
            .into());
        }
        let mut samples = Vec::with_capacity(record.probs.len());
        for row in record.probs {
            let expected = *classes.get_or_insert(row.len());
            if row.len() != expected {
                return Err(IngestError::InconsistentC {
                    line,
                    expected,
                    found: row.len(),
                }
                .into());
            }
            let p = ProbabilityVector::new(row, INGEST_TOLERANCE).map_err(|e| {
                IngestError::InvalidProbability {
                    line,
                    reason: e.to_string(),
                }
            })?;
            samples.push(p);
        }
        if let (Some(label), Some(c)) = (record.label, classes) {
            if label >= c {
                return Err(IngestError::MalformedLine {
                    line,
                    reason: format!("label {label} out of range for {c} classes"),
                }
                .into());
            }
        }
        ids.push(record.id);
        sets.push(PredictionSet::new(samples)?);
        labels.push(record.label);
    }
    if sets.is_empty() {
        return Err(IngestError::NoInstances.into());
    }
    LabeledBatch::new(ids, sets, collect_labels(labels)?)
}

/// Serializes a batch as JSON lines with round-trip float formatting.
pub fn write_jsonl(batch: &LabeledBatch) -> String {
    let mut out = String::new();
    for (i, (id, set)) in batch.ids().iter().zip(batch.instances()).enumerate() {
        out.push_str("{\"id\":");
        out.push_str(&serde_json::to_string(id).expect("string serializes"));
        out.push_str(",\"probs\":[");
        for (n, sample) in set.samples().iter().enumerate() {
            if n > 0 {
                out.push(',');
            }
            out.push('[');
            for (k, &p) in sample.as_slice().iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&format_float(p));
            }
            out.push(']');
        }
        out.push(']');
        if let Some(labels) = batch.labels() {
            let _ = write!(out, ",\"label\":{}", labels[i]);
        }
        out.push_str("}\n");
    }
    out
}
