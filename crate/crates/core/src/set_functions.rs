//! Lower probability of events, its Möbius masses and the generalized
//! Hartley (non-specificity) measure.

use std::collections::BTreeMap;

use crate::error::{CredalError, Result};
use crate::types::{IntervalSystem, MassAssignment, SubsetMask};

/// Largest class count accepted by the subset-enumerating functions.
pub const DEFAULT_GH_MAX_CLASSES: usize = 20;

const MASS_DROP: f64 = 1e-12;

/// `nu(A) = max(sum_{k in A} lower_k, 1 - sum_{k not in A} upper_k)`, with
/// `nu(empty) = 0` and `nu(all) = 1`.
pub fn lower_probability(intervals: &IntervalSystem, subset: &[usize]) -> Result<f64> {
    let classes = intervals.classes();
    let mut member = vec![false; classes];
    for &k in subset {
        if k >= classes {
            return Err(CredalError::IndexOutOfRange { index: k, classes });
        }
        member[k] = true;
    }
    let size = member.iter().filter(|&&m| m).count();
    if size == 0 {
        return Ok(0.0);
    }
    if size == classes {
        return Ok(1.0);
    }
    let inside: f64 = (0..classes)
        .filter(|&k| member[k])
        .map(|k| intervals.lower()[k])
        .sum();
    let outside: f64 = (0..classes)
        .filter(|&k| !member[k])
        .map(|k| intervals.upper()[k])
        .sum();
    Ok(inside.max(1.0 - outside))
}

fn check_size(intervals: &IntervalSystem, limit: usize) -> Result<()> {
    let classes = intervals.classes();
    if classes > limit || classes >= SubsetMask::BITS as usize {
        return Err(CredalError::TooManyClasses { classes, limit });
    }
    Ok(())
}

/// `nu` for every subset, indexed by bitmask.
fn capacity_table(intervals: &IntervalSystem) -> Vec<f64> {
    let classes = intervals.classes();
    let full = (1usize << classes) - 1;
    let mut lower_sum = vec![0.0; full + 1];
    let mut upper_sum = vec![0.0; full + 1];
    for mask in 1..=full {
        let bit = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        lower_sum[mask] = lower_sum[rest] + intervals.lower()[bit];
        upper_sum[mask] = upper_sum[rest] + intervals.upper()[bit];
    }
    let mut nu: Vec<f64> = (0..=full)
        .map(|mask| lower_sum[mask].max(1.0 - upper_sum[full ^ mask]))
        .collect();
    nu[0] = 0.0;
    nu[full] = 1.0;
    nu
}

/// Dense Möbius transform `m(B) = sum_{A subset of B} (-1)^{|B \ A|} nu(A)`,
/// computed in place one bit at a time.
fn dense_masses(intervals: &IntervalSystem) -> Vec<f64> {
    let classes = intervals.classes();
    let mut m = capacity_table(intervals);
    for bit in 0..classes {
        let step = 1usize << bit;
        for mask in 0..m.len() {
            if mask & step != 0 {
                m[mask] -= m[mask ^ step];
            }
        }
    }
    m
}

/// Möbius masses of the lower probability over all `2^C` subsets.
///
/// Masses smaller than `1e-12` in magnitude are dropped.
pub fn mobius_masses(intervals: &IntervalSystem, max_classes: usize) -> Result<MassAssignment> {
    check_size(intervals, max_classes)?;
    let masses: BTreeMap<SubsetMask, f64> = dense_masses(intervals)
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.abs() >= MASS_DROP)
        .map(|(mask, m)| (mask as SubsetMask, m))
        .collect();
    Ok(MassAssignment::new(intervals.classes(), masses))
}

/// `GH = sum_B m(B) log2 |B|` in bits.
pub fn generalized_hartley(intervals: &IntervalSystem, max_classes: usize) -> Result<f64> {
    let masses = mobius_masses(intervals, max_classes)?;
    Ok(hartley_of(&masses))
}

/// Generalized Hartley measure of an existing mass assignment.
pub fn hartley_of(masses: &MassAssignment) -> f64 {
    masses
        .iter()
        .filter(|(mask, _)| mask.count_ones() > 1)
        .map(|(mask, m)| m * f64::from(mask.count_ones()).log2())
        .sum()
}
