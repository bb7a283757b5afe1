//! Fixtures shared by the benchmarks.

use credal_core::synth::{generate, SynthConfig};
use credal_core::{extract_intervals, IntervalSystem, PredictionSet};

/// `count` high-disagreement prediction sets with `samples` samples over
/// `classes` classes.
pub fn prediction_sets(classes: usize, samples: usize, count: usize) -> Vec<PredictionSet> {
    let config = SynthConfig {
        classes,
        samples,
        n_id: 1,
        n_ood: count,
        seed: 42,
        ..Default::default()
    };
    generate(&config).ood.instances().to_vec()
}

pub fn interval_systems(classes: usize, samples: usize, count: usize) -> Vec<IntervalSystem> {
    prediction_sets(classes, samples, count)
        .iter()
        .map(extract_intervals)
        .collect()
}
