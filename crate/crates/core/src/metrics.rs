//! OOD-detection and calibration metrics.
//!
//! Detection treats in-distribution scores as negatives (label 0) and
//! out-of-distribution scores as positives (label 1); a higher uncertainty
//! score is a stronger OOD vote.

use serde::Serialize;

use crate::error::{CredalError, Result};
use crate::types::ProbabilityVector;

/// Default number of equal-width confidence bins for ECE.
pub const DEFAULT_ECE_BINS: usize = 15;

/// Floor applied to the label probability before taking its log.
pub const NLL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionReport {
    pub auroc: f64,
    pub auprc: f64,
    pub n_id: usize,
    pub n_ood: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub ece: f64,
    /// Mean negative log-likelihood in nats.
    pub nll: f64,
    pub accuracy: f64,
    pub bins: usize,
}

fn check_scores(id_scores: &[f64], ood_scores: &[f64]) -> Result<()> {
    if id_scores.is_empty() || ood_scores.is_empty() {
        return Err(CredalError::EmptyInput);
    }
    for (index, &value) in id_scores.iter().chain(ood_scores).enumerate() {
        if !value.is_finite() {
            return Err(CredalError::NonFiniteScore { index, value });
        }
    }
    Ok(())
}

/// Scores sorted ascending, each tagged with whether it is OOD.
fn pooled(id_scores: &[f64], ood_scores: &[f64]) -> Vec<(f64, bool)> {
    let mut all: Vec<(f64, bool)> = id_scores
        .iter()
        .map(|&s| (s, false))
        .chain(ood_scores.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all
}

/// Splits sorted scores into runs of equal value.
fn tie_groups(sorted: &[(f64, bool)]) -> impl Iterator<Item = &[(f64, bool)]> {
    sorted.chunk_by(|a, b| a.0 == b.0)
}

/// Probability that a random OOD score exceeds a random ID score, ties
/// counting one half (Mann-Whitney statistic from average ranks).
pub fn auroc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    check_scores(id_scores, ood_scores)?;
    let sorted = pooled(id_scores, ood_scores);
    // Twice the rank sum of the positives, kept integral.
    let mut doubled_rank_sum: u128 = 0;
    let mut start = 1u128;
    for group in tie_groups(&sorted) {
        let end = start + group.len() as u128 - 1;
        let positives = group.iter().filter(|(_, ood)| *ood).count() as u128;
        doubled_rank_sum += positives * (start + end);
        start = end + 1;
    }
    let n_pos = ood_scores.len() as u128;
    let n_neg = id_scores.len() as u128;
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Ok(doubled_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// Average precision with OOD as the positive class.
///
/// Scores are visited in descending order; a run of tied scores forms one
/// threshold and its precision is taken after the whole run is included.
pub fn auprc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    check_scores(id_scores, ood_scores)?;
    let mut sorted = pooled(id_scores, ood_scores);
    sorted.reverse();
    let n_pos = ood_scores.len() as f64;
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut ap = 0.0;
    for group in tie_groups(&sorted) {
        let positives = group.iter().filter(|(_, ood)| *ood).count();
        tp += positives;
        seen += group.len();
        if positives > 0 {
            ap += positives as f64 * (tp as f64 / seen as f64);
        }
    }
    // Divide once at the end so a perfect ranking gives exactly 1.
    Ok(ap / n_pos)
}

pub fn detection_report(id_scores: &[f64], ood_scores: &[f64]) -> Result<DetectionReport> {
    Ok(DetectionReport {
        auroc: auroc(id_scores, ood_scores)?,
        auprc: auprc(id_scores, ood_scores)?,
        n_id: id_scores.len(),
        n_ood: ood_scores.len(),
    })
}

fn check_labels(predictions: &[ProbabilityVector], labels: &[usize]) -> Result<()> {
    if predictions.len() != labels.len() {
        return Err(CredalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(CredalError::EmptyInput);
    }
    for (p, &label) in predictions.iter().zip(labels) {
        if label >= p.len() {
            return Err(CredalError::LabelOutOfRange {
                label,
                classes: p.len(),
            });
        }
    }
    Ok(())
}

/// Bin (1-based) of a confidence among `bins` equal-width bins over (0, 1].
fn confidence_bin(confidence: f64, bins: usize) -> usize {
    let g = bins as f64;
    let mut b = (confidence * g).ceil() as usize;
    // Undo a rounding overshoot such as 0.8 * 15 = 12.000000000000002.
    if b > 1 && (b - 1) as f64 / g >= confidence {
        b -= 1;
    }
    b.clamp(1, bins)
}

/// Expected calibration error over `bins` equal-width confidence bins.
pub fn ece(predictions: &[ProbabilityVector], labels: &[usize], bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(CredalError::InvalidBins);
    }
    check_labels(predictions, labels)?;
    let mut count = vec![0usize; bins];
    let mut correct = vec![0usize; bins];
    let mut confidence = vec![0.0; bins];
    for (p, &label) in predictions.iter().zip(labels) {
        let predicted = p.argmax();
        let conf = p[predicted];
        let b = confidence_bin(conf, bins) - 1;
        count[b] += 1;
        confidence[b] += conf;
        if predicted == label {
            correct[b] += 1;
        }
    }
    let n = predictions.len() as f64;
    Ok((0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| {
            let size = count[b] as f64;
            (size / n) * (correct[b] as f64 / size - confidence[b] / size).abs()
        })
        .sum())
}

/// Mean of `-ln max(p_label, 1e-12)`.
pub fn nll(predictions: &[ProbabilityVector], labels: &[usize]) -> Result<f64> {
    check_labels(predictions, labels)?;
    let total: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(p, &label)| -p[label].max(NLL_FLOOR).ln())
        .sum();
    Ok(total / predictions.len() as f64)
}

/// Fraction of argmax predictions equal to the label.
pub fn accuracy(predictions: &[ProbabilityVector], labels: &[usize]) -> Result<f64> {
    check_labels(predictions, labels)?;
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, &label)| p.argmax() == label)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

pub fn calibration_report(
    predictions: &[ProbabilityVector],
    labels: &[usize],
    bins: usize,
) -> Result<CalibrationReport> {
    Ok(CalibrationReport {
        ece: ece(predictions, labels, bins)?,
        nll: nll(predictions, labels)?,
        accuracy: accuracy(predictions, labels)?,
        bins,
    })
}
