//! Domain types shared by every module.
//!
//! Conventions: entropies are in bits (log base 2), negative log-likelihood
//! is in nats, `0 * log 0 = 0`, and class indices are 0-based.

use std::collections::BTreeMap;

use crate::error::{CredalError, Result};

/// Simplex tolerance for vectors computed inside the toolkit.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Simplex tolerance for vectors read from files (float32 dumps drift).
pub const INGEST_TOLERANCE: f64 = 1e-6;

/// Tolerance used when checking `sum(lower) <= 1 <= sum(upper)`.
pub const PROPER_TOLERANCE: f64 = 1e-9;

/// Default membership tolerance for [`IntervalSystem::contains`].
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

// Sums closer to 1 than this are left untouched so validation is idempotent.
const EXACT_SUM_SLACK: f64 = 1e-12;

/// A point on the probability simplex over `C >= 2` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates `values`, renormalizing when the sum is within `tolerance` of 1.
    pub fn new(values: Vec<f64>, tolerance: f64) -> Result<Self> {
        validate_probability_vector(values, tolerance)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest entry, ties resolved to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    /// Largest entry.
    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl AsRef<[f64]> for ProbabilityVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Index of the largest value, ties resolved to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Checks that `values` is a probability vector.
///
/// Entries must be finite and non-negative, there must be at least two of
/// them, and their sum must lie within `tolerance` of 1. A sum that deviates
/// by more than `1e-12` is corrected by dividing every entry by the sum.
pub fn validate_probability_vector(
    mut values: Vec<f64>,
    tolerance: f64,
) -> Result<ProbabilityVector> {
    if values.len() < 2 {
        return Err(CredalError::DimensionTooSmall(values.len()));
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(CredalError::NonFiniteEntry { index, value });
        }
        if value < 0.0 {
            return Err(CredalError::NegativeEntry { index, value });
        }
    }
    let sum: f64 = values.iter().sum();
    let deviation = (sum - 1.0).abs();
    if deviation > tolerance.max(EXACT_SUM_SLACK) {
        return Err(CredalError::SumOutOfTolerance { sum, tolerance });
    }
    if deviation > EXACT_SUM_SLACK {
        for v in &mut values {
            *v /= sum;
        }
    }
    Ok(ProbabilityVector(values))
}

/// The samples `{p_1, ..., p_N}` collected for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    classes: usize,
    samples: Vec<ProbabilityVector>,
}

impl PredictionSet {
    pub fn new(samples: Vec<ProbabilityVector>) -> Result<Self> {
        let first = samples.first().ok_or(CredalError::EmptyPredictionSet)?;
        let classes = first.len();
        for s in &samples {
            if s.len() != classes {
                return Err(CredalError::DimensionMismatch {
                    expected: classes,
                    found: s.len(),
                });
            }
        }
        Ok(Self { classes, samples })
    }

    /// Validates raw rows with the given simplex tolerance.
    pub fn from_rows<I>(rows: I, tolerance: f64) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let samples = rows
            .into_iter()
            .map(|row| ProbabilityVector::new(row, tolerance))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[ProbabilityVector] {
        &self.samples
    }

    /// Returns a copy with one more sample.
    pub fn with_sample(&self, sample: ProbabilityVector) -> Result<Self> {
        let mut samples = self.samples.clone();
        samples.push(sample);
        Self::new(samples)
    }
}

/// Per-class bounds `[lower_k, upper_k]` describing a credal set.
///
/// Construction only checks `0 <= lower_k <= upper_k <= 1`; properness is
/// checked by [`IntervalSystem::is_proper`] and by the operations needing it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSystem {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl IntervalSystem {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(CredalError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.len() < 2 {
            return Err(CredalError::DimensionTooSmall(lower.len()));
        }
        for (index, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            let ordered = l.is_finite() && u.is_finite() && 0.0 <= l && l <= u && u <= 1.0;
            if !ordered {
                return Err(CredalError::InvalidBounds {
                    index,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Zero-width intervals at `p`.
    pub fn point(p: &ProbabilityVector) -> Self {
        Self {
            lower: p.as_slice().to_vec(),
            upper: p.as_slice().to_vec(),
        }
    }

    /// `[0, 1]` for every class.
    pub fn vacuous(classes: usize) -> Result<Self> {
        Self::new(vec![0.0; classes], vec![1.0; classes])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn classes(&self) -> usize {
        self.lower.len()
    }

    pub fn lower_sum(&self) -> f64 {
        self.lower.iter().sum()
    }

    pub fn upper_sum(&self) -> f64 {
        self.upper.iter().sum()
    }

    pub fn width_sum(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).sum()
    }

    /// `sum(lower) <= 1 <= sum(upper)` up to [`PROPER_TOLERANCE`].
    pub fn is_proper(&self) -> bool {
        self.is_proper_within(PROPER_TOLERANCE)
    }

    pub fn is_proper_within(&self, tolerance: f64) -> bool {
        self.lower_sum() <= 1.0 + tolerance && self.upper_sum() >= 1.0 - tolerance
    }

    pub(crate) fn ensure_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(CredalError::ImproperIntervals {
                lower_sum: self.lower_sum(),
                upper_sum: self.upper_sum(),
            })
        }
    }
}

/// Total, aleatoric and epistemic uncertainty in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyTriple {
    pub tu: f64,
    pub au: f64,
    pub eu: f64,
}

impl UncertaintyTriple {
    /// `eu` is set to `tu - au`.
    pub fn new(tu: f64, au: f64) -> Self {
        Self {
            tu,
            au,
            eu: tu - au,
        }
    }
}

/// Many instances over a shared class count, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    classes: usize,
    ids: Vec<String>,
    instances: Vec<PredictionSet>,
    labels: Option<Vec<usize>>,
}

impl LabeledBatch {
    pub fn new(
        ids: Vec<String>,
        instances: Vec<PredictionSet>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let classes = instances.first().map(PredictionSet::classes).unwrap_or(0);
        if ids.len() != instances.len() {
            return Err(CredalError::LengthMismatch {
                predictions: instances.len(),
                labels: ids.len(),
            });
        }
        for inst in &instances {
            if inst.classes() != classes {
                return Err(CredalError::DimensionMismatch {
                    expected: classes,
                    found: inst.classes(),
                });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != instances.len() {
                return Err(CredalError::LengthMismatch {
                    predictions: instances.len(),
                    labels: labels.len(),
                });
            }
            if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
                return Err(CredalError::LabelOutOfRange { label, classes });
            }
        }
        Ok(Self {
            classes,
            ids,
            instances,
            labels,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn instances(&self) -> &[PredictionSet] {
        &self.instances
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }
}

/// Bitmask over class indices; bit `k` set means class `k` is in the subset.
pub type SubsetMask = u32;

/// Möbius masses of a lower probability, stored sparsely by subset bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct MassAssignment {
    classes: usize,
    masses: BTreeMap<SubsetMask, f64>,
}

impl MassAssignment {
    pub(crate) fn new(classes: usize, masses: BTreeMap<SubsetMask, f64>) -> Self {
        Self { classes, masses }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Mass of the subset given by `mask`; dropped (near-zero) masses read as 0.
    pub fn mass(&self, mask: SubsetMask) -> f64 {
        self.masses.get(&mask).copied().unwrap_or(0.0)
    }

    /// Mass of the subset listing the given class indices.
    pub fn mass_of(&self, classes: &[usize]) -> f64 {
        self.mass(classes.iter().fold(0, |m, &k| m | (1 << k)))
    }

    /// Non-negligible masses in ascending bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, f64)> + '_ {
        self.masses.iter().map(|(&k, &v)| (k, v))
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }
}
