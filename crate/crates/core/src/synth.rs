//! Synthetic in-distribution / out-of-distribution prediction sets.
//!
//! In-distribution instances have a reference class `k`; every sample is a
//! Dirichlet draw concentrated around a sharp point with mass `id_peak` on
//! `k`, so the samples agree. Out-of-distribution samples are independent
//! draws from a symmetric Dirichlet with a small parameter, so they are
//! individually confident but disagree with each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::types::{LabeledBatch, PredictionSet, ProbabilityVector, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub samples: usize,
    pub n_id: usize,
    pub n_ood: usize,
    /// Probability of the reference class in the in-distribution centre.
    pub id_peak: f64,
    /// Dirichlet concentration around the in-distribution centre.
    pub id_concentration: f64,
    /// Symmetric Dirichlet parameter for out-of-distribution samples.
    pub ood_alpha: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 10,
            samples: 5,
            n_id: 500,
            n_ood: 500,
            id_peak: 0.9,
            id_concentration: 200.0,
            ood_alpha: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// `key=value` pairs describing the generator, in a fixed order.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        vec![
            ("classes", self.classes.to_string()),
            ("samples", self.samples.to_string()),
            ("n_id", self.n_id.to_string()),
            ("n_ood", self.n_ood.to_string()),
            ("id_peak", self.id_peak.to_string()),
            ("id_concentration", self.id_concentration.to_string()),
            ("ood_alpha", self.ood_alpha.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.classes < 2 {
            return Err("classes must be at least 2".into());
        }
        if self.samples == 0 || self.n_id == 0 || self.n_ood == 0 {
            return Err("samples, n_id and n_ood must be positive".into());
        }
        if !(self.id_peak > 0.0 && self.id_peak < 1.0) {
            return Err("id_peak must lie in (0, 1)".into());
        }
        if !(self.id_concentration > 0.0 && self.ood_alpha > 0.0) {
            return Err("concentrations must be positive".into());
        }
        Ok(())
    }
}

/// Labelled in-distribution batch and unlabelled out-of-distribution batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub id: LabeledBatch,
    pub ood: LabeledBatch,
}

fn dirichlet(alpha: &[f64], rng: &mut ChaCha8Rng) -> ProbabilityVector {
    loop {
        let draws: Vec<f64> = alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
            .collect();
        let sum: f64 = draws.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            let p = draws.iter().map(|d| d / sum).collect();
            return ProbabilityVector::new(p, DEFAULT_TOLERANCE).expect("normalized draw");
        }
    }
}

pub fn generate(config: &SynthConfig) -> SynthData {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let c = config.classes;
    let off_peak = (1.0 - config.id_peak) / (c - 1) as f64;

    let mut id_sets = Vec::with_capacity(config.n_id);
    let mut labels = Vec::with_capacity(config.n_id);
    for _ in 0..config.n_id {
        let k = rng.random_range(0..c);
        let alpha: Vec<f64> = (0..c)
            .map(|j| config.id_concentration * if j == k { config.id_peak } else { off_peak })
            .collect();
        let samples = (0..config.samples)
            .map(|_| dirichlet(&alpha, &mut rng))
            .collect();
        id_sets.push(PredictionSet::new(samples).expect("shared dimension"));
        labels.push(k);
    }

    let alpha = vec![config.ood_alpha; c];
    let ood_sets: Vec<PredictionSet> = (0..config.n_ood)
        .map(|_| {
            let samples = (0..config.samples)
                .map(|_| dirichlet(&alpha, &mut rng))
                .collect();
            PredictionSet::new(samples).expect("shared dimension")
        })
        .collect();

    let ids = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}-{i}")).collect();
    SynthData {
        id: LabeledBatch::new(ids("id", config.n_id), id_sets, Some(labels)).expect("valid batch"),
        ood: LabeledBatch::new(ids("ood", config.n_ood), ood_sets, None).expect("valid batch"),
    }
}
