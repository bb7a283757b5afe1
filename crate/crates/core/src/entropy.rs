//! Shannon entropy, the model-averaging baseline decomposition, and the
//! upper/lower entropy of a credal set.
//!
//! The upper entropy is solved exactly by water-filling: the maximizer over
//! `{p : sum p = 1, lower <= p <= upper}` is `p_k = clamp(c, lower_k, upper_k)`
//! for the level `c` at which the clamped values sum to one.
//!
//! The lower entropy is a concave minimization, so its minimum sits on a
//! vertex of the polytope. Every vertex has at most one coordinate strictly
//! inside its bounds. Small systems are solved by enumerating those
//! candidates; larger ones fall back to a greedy mass-concentration search,
//! polished by pairwise mass exchanges, whose result is flagged as heuristic.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CredalError, Result};
use crate::types::{
    IntervalSystem, PredictionSet, ProbabilityVector, UncertaintyTriple, DEFAULT_TOLERANCE,
};

const BISECTION_TOLERANCE: f64 = 1e-12;
const BISECTION_MAX_ITERATIONS: usize = 200;
const VERTEX_SLACK: f64 = 1e-12;
/// Smallest entropy decrease a mass exchange must achieve to be taken.
const EXCHANGE_GAIN: f64 = 1e-14;

/// `-x log2 x` with `0 log 0 = 0`.
#[inline]
pub(crate) fn entropy_term(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.log2()
    } else {
        0.0
    }
}

fn entropy_of(values: &[f64]) -> f64 {
    values.iter().map(|&x| entropy_term(x)).sum()
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_of(p.as_slice())
}

/// Element-wise mean of the samples.
pub fn average_prediction(preds: &PredictionSet) -> ProbabilityVector {
    let n = preds.len() as f64;
    let mut mean = vec![0.0; preds.classes()];
    for sample in preds.samples() {
        for (m, &p) in mean.iter_mut().zip(sample.as_slice()) {
            *m += p;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    ProbabilityVector::new(mean, DEFAULT_TOLERANCE)
        .expect("mean of simplex points is a simplex point")
}

/// Entropy of the mean (total) and mean entropy (aleatoric).
pub fn baseline_decomposition(preds: &PredictionSet) -> UncertaintyTriple {
    let tu = shannon_entropy(&average_prediction(preds));
    let au = preds.samples().iter().map(shannon_entropy).sum::<f64>() / preds.len() as f64;
    UncertaintyTriple::new(tu, au)
}

/// How an entropy bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    WaterFilling,
    VertexEnumeration,
    /// Best of several greedy fills; an upper estimate of the true minimum.
    Greedy,
}

impl SolveMethod {
    pub fn is_exact(self) -> bool {
        !matches!(self, SolveMethod::Greedy)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::WaterFilling => "water-filling",
            SolveMethod::VertexEnumeration => "exact",
            SolveMethod::Greedy => "heuristic",
        }
    }
}

/// An optimal (or, for [`SolveMethod::Greedy`], best found) entropy value and
/// the distribution attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBound {
    pub value: f64,
    pub argument: ProbabilityVector,
    pub method: SolveMethod,
}

/// Maximum entropy over the credal set.
pub fn upper_entropy(intervals: &IntervalSystem) -> Result<EntropyBound> {
    intervals.ensure_proper()?;
    let level = water_level(intervals.lower(), intervals.upper())?;
    let values: Vec<f64> = intervals
        .lower()
        .iter()
        .zip(intervals.upper())
        .map(|(&l, &u)| level.clamp(l, u))
        .collect();
    let argument = ProbabilityVector::new(values, DEFAULT_TOLERANCE)?;
    Ok(EntropyBound {
        value: shannon_entropy(&argument),
        argument,
        method: SolveMethod::WaterFilling,
    })
}

fn level_sum(level: f64, lower: &[f64], upper: &[f64]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| level.clamp(l, u))
        .sum()
}

/// Finds `c` with `sum_k clamp(c, lower_k, upper_k) = 1`.
fn water_level(lower: &[f64], upper: &[f64]) -> Result<f64> {
    let mut lo = lower.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if level_sum(lo, lower, upper) >= 1.0 - BISECTION_TOLERANCE {
        return Ok(lo);
    }
    if level_sum(hi, lower, upper) <= 1.0 + BISECTION_TOLERANCE {
        return Ok(hi);
    }
    for _ in 0..BISECTION_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let s = level_sum(mid, lower, upper);
        if (s - 1.0).abs() <= BISECTION_TOLERANCE {
            return Ok(polish_level(mid, lower, upper));
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if s < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(CredalError::NoConvergence {
        iterations: BISECTION_MAX_ITERATIONS,
    })
}

/// Solves the level exactly on the linear piece containing `level`.
fn polish_level(level: f64, lower: &[f64], upper: &[f64]) -> f64 {
    let mut pinned = 0.0;
    let mut free = 0usize;
    for (&l, &u) in lower.iter().zip(upper) {
        if level <= l {
            pinned += l;
        } else if level >= u {
            pinned += u;
        } else {
            free += 1;
        }
    }
    if free == 0 {
        return level;
    }
    let exact = (1.0 - pinned) / free as f64;
    let err = |c: f64| (level_sum(c, lower, upper) - 1.0).abs();
    if err(exact) <= err(level) {
        exact
    } else {
        level
    }
}

/// Settings for [`lower_entropy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LowerEntropyOptions {
    /// Systems with at most this many classes are solved by enumeration.
    pub exact_threshold: usize,
    /// Random fill orders tried by the greedy search, on top of the three
    /// fixed orders.
    pub random_orders: usize,
    pub seed: u64,
}

impl Default for LowerEntropyOptions {
    fn default() -> Self {
        Self {
            exact_threshold: 16,
            random_orders: 8,
            seed: 0,
        }
    }
}

/// Minimum entropy over the credal set.
pub fn lower_entropy(
    intervals: &IntervalSystem,
    options: &LowerEntropyOptions,
) -> Result<EntropyBound> {
    intervals.ensure_proper()?;
    if intervals.classes() <= options.exact_threshold {
        if let Some(bound) = enumerate_vertices(intervals)? {
            return Ok(bound);
        }
    }
    greedy_lower_entropy(intervals, options)
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    values: Vec<f64>,
}

impl Candidate {
    /// Orders by value, then lexicographically by argument.
    fn better_than(&self, other: &Candidate) -> bool {
        match self.value.partial_cmp(&other.value) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) | None => false,
            Some(Ordering::Equal) => lexicographic(&self.values, &other.values) == Ordering::Less,
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn keep_best(best: &mut Option<Candidate>, candidate: Candidate) {
    match best {
        Some(b) if !candidate.better_than(b) => {}
        _ => *best = Some(candidate),
    }
}

/// Exact minimum by enumerating every candidate vertex: one slack class `i`,
/// every other class pinned at its lower or upper bound, and
/// `p_i = 1 - sum(others)` kept when it respects its own bounds.
fn enumerate_vertices(intervals: &IntervalSystem) -> Result<Option<EntropyBound>> {
    let lower = intervals.lower();
    let upper = intervals.upper();
    let c = intervals.classes();
    let mut best: Option<Candidate> = None;

    for slack in 0..c {
        let others: Vec<usize> = (0..c).filter(|&k| k != slack).collect();
        // Split the pinned classes in two halves; each half's mass and
        // entropy for every pin pattern are tabulated once.
        let low_bits = others.len() / 2;
        let (low, high) = others.split_at(low_bits);
        let (low_mass, low_entropy) = pin_tables(low, lower, upper);
        let (high_mass, high_entropy) = pin_tables(high, lower, upper);
        let low_mask = (1usize << low_bits) - 1;

        for mask in 0..(1usize << others.len()) {
            let lo = mask & low_mask;
            let hi = mask >> low_bits;
            let rest = low_mass[lo] + high_mass[hi];
            let slack_value = 1.0 - rest;
            if slack_value < lower[slack] - VERTEX_SLACK
                || slack_value > upper[slack] + VERTEX_SLACK
            {
                continue;
            }
            let value =
                low_entropy[lo] + high_entropy[hi] + entropy_term(slack_value.clamp(0.0, 1.0));
            if let Some(b) = &best {
                if value > b.value {
                    continue;
                }
            }
            let mut values = vec![0.0; c];
            for (bit, &k) in others.iter().enumerate() {
                values[k] = if mask >> bit & 1 == 1 {
                    upper[k]
                } else {
                    lower[k]
                };
            }
            values[slack] = slack_value.clamp(0.0, 1.0);
            keep_best(&mut best, Candidate { value, values });
        }
    }

    best.map(|b| {
        Ok(EntropyBound {
            value: b.value,
            argument: ProbabilityVector::new(b.values, DEFAULT_TOLERANCE)?,
            method: SolveMethod::VertexEnumeration,
        })
    })
    .transpose()
}

/// Mass and entropy of each pin pattern over `classes` (bit set = upper).
fn pin_tables(classes: &[usize], lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let size = 1usize << classes.len();
    let mut mass = Vec::with_capacity(size);
    let mut entropy = Vec::with_capacity(size);
    for mask in 0..size {
        let mut m = 0.0;
        let mut h = 0.0;
        for (bit, &k) in classes.iter().enumerate() {
            let v = if mask >> bit & 1 == 1 {
                upper[k]
            } else {
                lower[k]
            };
            m += v;
            h += entropy_term(v);
        }
        mass.push(m);
        entropy.push(h);
    }
    (mass, entropy)
}

/// Local descent over pairwise exchanges: move mass from `a` to `b` until
/// `a` reaches its lower bound or `b` its upper bound. Entropy is concave
/// along such a segment, so only its far end needs checking.
fn exchange_descent(values: &mut [f64], lower: &[f64], upper: &[f64]) {
    let c = values.len();
    let mut budget = 50 * c;
    loop {
        let mut moved = false;
        for a in 0..c {
            for b in 0..c {
                let give = values[a] - lower[a];
                let room = upper[b] - values[b];
                if a == b || give <= 0.0 || room <= 0.0 {
                    continue;
                }
                let t = give.min(room);
                let before = entropy_term(values[a]) + entropy_term(values[b]);
                let (na, nb) = if give <= room {
                    (lower[a], values[b] + t)
                } else {
                    (values[a] - t, upper[b])
                };
                if entropy_term(na) + entropy_term(nb) < before - EXCHANGE_GAIN {
                    values[a] = na;
                    values[b] = nb;
                    moved = true;
                    budget -= 1;
                    if budget == 0 {
                        return;
                    }
                }
            }
        }
        if !moved {
            return;
        }
    }
}

/// Starts from the lower bounds and pours the remaining mass into classes
/// in several orders, filling each to its upper bound, then improves each
/// fill by pairwise exchanges; keeps the best result.
fn greedy_lower_entropy(
    intervals: &IntervalSystem,
    options: &LowerEntropyOptions,
) -> Result<EntropyBound> {
    let lower = intervals.lower();
    let upper = intervals.upper();
    let c = intervals.classes();

    let sorted_desc = |key: &dyn Fn(usize) -> f64| {
        let mut order: Vec<usize> = (0..c).collect();
        // Stable sort keeps ascending index among ties.
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
        order
    };
    let mut orders = vec![
        sorted_desc(&|k| upper[k]),
        sorted_desc(&|k| upper[k] - lower[k]),
        sorted_desc(&|k| lower[k]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for _ in 0..options.random_orders {
        let mut order: Vec<usize> = (0..c).collect();
        order.shuffle(&mut rng);
        orders.push(order);
    }

    let remaining = 1.0 - intervals.lower_sum();
    let mut best: Option<Candidate> = None;
    for order in &orders {
        let mut values = lower.to_vec();
        let mut left = remaining;
        for &k in order {
            if left <= 0.0 {
                break;
            }
            let add = (upper[k] - lower[k]).min(left);
            values[k] += add;
            left -= add;
        }
        exchange_descent(&mut values, lower, upper);
        let value = entropy_of(&values);
        keep_best(&mut best, Candidate { value, values });
    }

    let best = best.expect("at least three fill orders");
    Ok(EntropyBound {
        value: best.value,
        argument: ProbabilityVector::new(best.values, DEFAULT_TOLERANCE)?,
        method: SolveMethod::Greedy,
    })
}

/// Upper and lower entropy with the bounds that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalDecomposition {
    pub triple: UncertaintyTriple,
    pub upper: EntropyBound,
    pub lower: EntropyBound,
}

/// Total uncertainty is the upper entropy, aleatoric the lower entropy.
pub fn credal_decomposition(
    intervals: &IntervalSystem,
    options: &LowerEntropyOptions,
) -> Result<UncertaintyTriple> {
    credal_decomposition_detailed(intervals, options).map(|d| d.triple)
}

pub fn credal_decomposition_detailed(
    intervals: &IntervalSystem,
    options: &LowerEntropyOptions,
) -> Result<CredalDecomposition> {
    let upper = upper_entropy(intervals)?;
    let lower = lower_entropy(intervals, options)?;
    Ok(CredalDecomposition {
        triple: UncertaintyTriple::new(upper.value, lower.value),
        upper,
        lower,
    })
}
