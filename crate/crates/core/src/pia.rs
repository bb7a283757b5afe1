//! Probability interval approximation: coarsen a `C`-class interval system
//! to `J` pseudo-classes.
//!
//! Classes are ranked by the intersection probability (descending, ties by
//! ascending index). The top `J - 1` keep their bounds; the rest are merged
//! into one pseudo-class whose bounds are
//!
//! ```text
//! lower = max(sum_{merged} lower_i, 1 - sum_{kept} upper_j)
//! upper = min(sum_{merged} upper_i, 1 - sum_{kept} lower_j)
//! ```
//!
//! These bounds hold for the merged mass of every distribution in the
//! original credal set. [`MergeRule::Literal`] instead reproduces the
//! published formulas, which compare the complement expressions against the
//! kept-class sums; it is provided for comparison only and its output need
//! not be a valid or proper system.

use crate::error::{CredalError, Result};
use crate::types::{IntervalSystem, ProbabilityVector};

/// How the merged pseudo-class bounds are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeRule {
    #[default]
    Coherent,
    Literal,
}

/// A reduced interval system and the classes behind each pseudo-class.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedIntervals {
    pub intervals: IntervalSystem,
    /// Original indices of the first `J - 1` reduced classes, in order.
    pub kept: Vec<usize>,
    /// Original indices merged into the last reduced class, in rank order.
    pub merged: Vec<usize>,
}

impl ReducedIntervals {
    /// Maps a distribution over the original classes onto the reduced ones.
    pub fn coarsen(&self, p: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.kept.iter().map(|&k| p[k]).collect();
        out.push(self.merged.iter().map(|&k| p[k]).sum());
        out
    }
}

/// Reduces `intervals` to `j` classes using the ranking given by `pstar`.
pub fn approximate_intervals(
    intervals: &IntervalSystem,
    pstar: &ProbabilityVector,
    j: usize,
    rule: MergeRule,
) -> Result<ReducedIntervals> {
    let classes = intervals.classes();
    if j < 2 || j > classes {
        return Err(CredalError::InvalidJ { j, classes });
    }
    if pstar.len() != classes {
        return Err(CredalError::DimensionMismatch {
            expected: classes,
            found: pstar.len(),
        });
    }
    intervals.ensure_proper()?;

    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| pstar[b].total_cmp(&pstar[a]));
    let (kept, merged) = order.split_at(j - 1);

    let lower = intervals.lower();
    let upper = intervals.upper();
    let kept_lower: f64 = kept.iter().map(|&k| lower[k]).sum();
    let kept_upper: f64 = kept.iter().map(|&k| upper[k]).sum();
    let merged_lower: f64 = merged.iter().map(|&k| lower[k]).sum();
    let merged_upper: f64 = merged.iter().map(|&k| upper[k]).sum();

    let (group_lower, group_upper) = match rule {
        MergeRule::Coherent => {
            let l = merged_lower.max(1.0 - kept_upper).clamp(0.0, 1.0);
            let u = merged_upper.min(1.0 - kept_lower).clamp(0.0, 1.0);
            (l.min(u), u)
        }
        MergeRule::Literal => (
            (1.0 - merged_upper).max(kept_lower).clamp(0.0, 1.0),
            (1.0 - merged_lower).min(kept_upper).clamp(0.0, 1.0),
        ),
    };

    let mut r_lower: Vec<f64> = kept.iter().map(|&k| lower[k]).collect();
    let mut r_upper: Vec<f64> = kept.iter().map(|&k| upper[k]).collect();
    r_lower.push(group_lower);
    r_upper.push(group_upper);

    Ok(ReducedIntervals {
        intervals: IntervalSystem::new(r_lower, r_upper)?,
        kept: kept.to_vec(),
        merged: merged.to_vec(),
    })
}

/// Suggested `J` for a class count: none below 21 classes, 20 up to a few
/// hundred classes, 50 beyond.
pub fn default_reduction(classes: usize) -> Option<usize> {
    match classes {
        0..=20 => None,
        21..=500 => Some(20),
        _ => Some(50),
    }
}
