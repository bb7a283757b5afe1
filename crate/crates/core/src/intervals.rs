//! Interval extraction, credal-set membership, tightening and the
//! intersection probability.

use crate::error::{CredalError, Result};
use crate::types::{IntervalSystem, PredictionSet, ProbabilityVector, DEFAULT_TOLERANCE};

/// Per-class minimum and maximum over the samples.
///
/// The result is always proper: the sum of the minima is bounded by the sum
/// of any single sample, which is 1, and likewise for the maxima.
pub fn extract_intervals(preds: &PredictionSet) -> IntervalSystem {
    let classes = preds.classes();
    let mut lower = vec![f64::INFINITY; classes];
    let mut upper = vec![f64::NEG_INFINITY; classes];
    for sample in preds.samples() {
        for (k, &p) in sample.as_slice().iter().enumerate() {
            lower[k] = lower[k].min(p);
            upper[k] = upper[k].max(p);
        }
    }
    // Validated samples can exceed 1 by an ulp after renormalization.
    for u in &mut upper {
        *u = u.min(1.0);
    }
    for (l, u) in lower.iter_mut().zip(&upper) {
        *l = l.min(*u);
    }
    IntervalSystem::new(lower, upper).expect("min/max of simplex points are ordered bounds")
}

/// `sum(lower) <= 1 <= sum(upper)`, up to [`crate::types::PROPER_TOLERANCE`].
pub fn is_proper(intervals: &IntervalSystem) -> bool {
    intervals.is_proper()
}

/// True iff every `p_k` lies in `[lower_k - tolerance, upper_k + tolerance]`.
pub fn contains(intervals: &IntervalSystem, p: &ProbabilityVector, tolerance: f64) -> Result<bool> {
    if p.len() != intervals.classes() {
        return Err(CredalError::DimensionMismatch {
            expected: intervals.classes(),
            found: p.len(),
        });
    }
    Ok(p.as_slice()
        .iter()
        .zip(intervals.lower().iter().zip(intervals.upper()))
        .all(|(&x, (&l, &u))| x >= l - tolerance && x <= u + tolerance))
}

/// Shrinks each bound to the value actually attained inside the credal set.
///
/// `lower'_k = max(lower_k, 1 - sum_{j != k} upper_j)` and
/// `upper'_k = min(upper_k, 1 - sum_{j != k} lower_j)`. The induced credal
/// set does not change.
pub fn tighten(intervals: &IntervalSystem) -> Result<IntervalSystem> {
    intervals.ensure_proper()?;
    let lower_sum = intervals.lower_sum();
    let upper_sum = intervals.upper_sum();
    let (lower, upper): (Vec<f64>, Vec<f64>) = intervals
        .lower()
        .iter()
        .zip(intervals.upper())
        .map(|(&l, &u)| {
            let new_l = l.max(1.0 - (upper_sum - u)).clamp(0.0, 1.0);
            let new_u = u.min(1.0 - (lower_sum - l)).clamp(0.0, 1.0);
            // Keep the bounds ordered under rounding; both stay inside [l, u].
            let new_l = new_l.min(u);
            let new_u = new_u.max(l);
            if new_l > new_u {
                let mid = 0.5 * (new_l + new_u);
                (mid, mid)
            } else {
                (new_l, new_u)
            }
        })
        .unzip();
    IntervalSystem::new(lower, upper)
}

/// The intersection probability together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionProbability {
    pub probability: ProbabilityVector,
    /// The common interpolation factor between lower and upper bounds.
    pub alpha: f64,
    /// Set when the computed factor fell outside `[0, 1]` and was clamped.
    pub alpha_clamped: bool,
}

/// `p*_k = lower_k + alpha * (upper_k - lower_k)` with the single `alpha`
/// that makes `p*` sum to one.
pub fn intersection_probability(intervals: &IntervalSystem) -> Result<ProbabilityVector> {
    intersection_probability_detailed(intervals).map(|r| r.probability)
}

pub fn intersection_probability_detailed(
    intervals: &IntervalSystem,
) -> Result<IntersectionProbability> {
    intervals.ensure_proper()?;
    let width = intervals.width_sum();
    if width == 0.0 {
        // Single-point credal set.
        let probability = ProbabilityVector::new(intervals.lower().to_vec(), DEFAULT_TOLERANCE)?;
        return Ok(IntersectionProbability {
            probability,
            alpha: 0.0,
            alpha_clamped: false,
        });
    }
    let raw_alpha = (1.0 - intervals.lower_sum()) / width;
    let alpha = raw_alpha.clamp(0.0, 1.0);
    let values = intervals
        .lower()
        .iter()
        .zip(intervals.upper())
        .map(|(&l, &u)| l + alpha * (u - l))
        .collect();
    Ok(IntersectionProbability {
        probability: ProbabilityVector::new(values, DEFAULT_TOLERANCE)?,
        alpha,
        alpha_clamped: alpha != raw_alpha,
    })
}
