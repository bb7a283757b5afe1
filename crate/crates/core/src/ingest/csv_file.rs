use std::path::Path;

use super::{collect_labels, format_float, io_error};
use crate::error::{IngestError, Result};
use crate::types::{LabeledBatch, PredictionSet, ProbabilityVector, INGEST_TOLERANCE};

pub fn read_csv(path: &Path) -> Result<LabeledBatch> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_csv(&text)
}

struct Instance {
    id: String,
    label: Option<usize>,
    rows: Vec<Option<ProbabilityVector>>,
}

/// Parses long-format CSV: one row per `(instance, sample)`.
///
/// Instances appear in order of first occurrence; within an instance the
/// `sample_idx` values must cover `0..N` exactly once each.
pub fn parse_csv(text: &str) -> Result<LabeledBatch> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| IngestError::HeaderMismatch(e.to_string()))?
        .clone();
    let classes = check_header(&header)?;

    let mut instances: Vec<Instance> = Vec::new();
    let mut position = std::collections::HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::MalformedLine {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let malformed = |reason: String| IngestError::MalformedLine { line, reason };
        if record.len() != classes + 3 {
            return Err(IngestError::InconsistentC {
                line,
                expected: classes,
                found: record.len().saturating_sub(3),
            }
            .into());
        }
        let id = record[0].to_string();
        let sample: usize = record[1]
            .parse()
            .map_err(|_| malformed(format!("bad sample_idx {:?}", &record[1])))?;
        let label = match &record[2] {
            "" => None,
            s => {
                let label: usize = s
                    .parse()
                    .map_err(|_| malformed(format!("bad label {s:?}")))?;
                if label >= classes {
                    return Err(malformed(format!(
                        "label {label} out of range for {classes} classes"
                    ))
                    .into());
                }
                Some(label)
            }
        };
        let values = (3..record.len())
            .map(|k| {
                record[k]
                    .parse::<f64>()
                    .map_err(|_| malformed(format!("bad probability {:?}", &record[k])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = ProbabilityVector::new(values, INGEST_TOLERANCE).map_err(|e| {
            IngestError::InvalidProbability {
                line,
                reason: e.to_string(),
            }
        })?;

        let slot = *position.entry(id.clone()).or_insert_with(|| {
            instances.push(Instance {
                id: id.clone(),
                label,
                rows: Vec::new(),
            });
            instances.len() - 1
        });
        let inst = &mut instances[slot];
        if inst.label != label {
            return Err(
                malformed(format!("label differs between samples of instance {id:?}")).into(),
            );
        }
        if inst.rows.len() <= sample {
            inst.rows.resize(sample + 1, None);
        }
        if inst.rows[sample].is_some() {
            return Err(IngestError::DuplicateSample {
                instance: id,
                sample,
            }
            .into());
        }
        inst.rows[sample] = Some(p);
    }

    if instances.is_empty() {
        return Err(IngestError::NoInstances.into());
    }
    let mut ids = Vec::with_capacity(instances.len());
    let mut sets = Vec::with_capacity(instances.len());
    let mut labels = Vec::with_capacity(instances.len());
    for inst in instances {
        let mut samples = Vec::with_capacity(inst.rows.len());
        for (sample, row) in inst.rows.into_iter().enumerate() {
            samples.push(row.ok_or_else(|| IngestError::MissingSample {
                instance: inst.id.clone(),
                sample,
            })?);
        }
        ids.push(inst.id);
        sets.push(PredictionSet::new(samples)?);
        labels.push(inst.label);
    }
    LabeledBatch::new(ids, sets, collect_labels(labels)?)
}

fn check_header(header: &::csv::StringRecord) -> Result<usize, IngestError> {
    let fixed = ["instance_id", "sample_idx", "label"];
    for (i, want) in fixed.iter().enumerate() {
        if header.get(i) != Some(want) {
            return Err(IngestError::HeaderMismatch(format!(
                "column {i} should be {want:?}, found {:?}",
                header.get(i).unwrap_or("")
            )));
        }
    }
    let classes = header.len().saturating_sub(3);
    if classes < 2 {
        return Err(IngestError::HeaderMismatch(
            "need at least two probability columns".into(),
        ));
    }
    for k in 0..classes {
        let want = format!("p{k}");
        if header.get(k + 3) != Some(want.as_str()) {
            return Err(IngestError::HeaderMismatch(format!(
                "column {} should be {want:?}, found {:?}",
                k + 3,
                header.get(k + 3).unwrap_or("")
            )));
        }
    }
    Ok(classes)
}

/// Serializes a batch in the long CSV layout.
pub fn write_csv(batch: &LabeledBatch) -> String {
    let mut out = String::from("instance_id,sample_idx,label");
    for k in 0..batch.classes() {
        out.push_str(&format!(",p{k}"));
    }
    out.push('\n');
    for (i, (id, set)) in batch.ids().iter().zip(batch.instances()).enumerate() {
        let label = batch.labels().map(|l| l[i].to_string()).unwrap_or_default();
        for (n, sample) in set.samples().iter().enumerate() {
            out.push_str(&format!("{},{n},{label}", csv_field(id)));
            for &p in sample.as_slice() {
                out.push(',');
                out.push_str(&format_float(p));
            }
            out.push('\n');
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
