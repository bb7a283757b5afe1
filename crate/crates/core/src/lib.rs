//! Credal-set uncertainty quantification for sampled probability predictions.
//!
//! Given the `N` probability vectors a Bayesian network or a deep ensemble
//! produces for one input, this crate
//!
//! * extracts per-class probability intervals and the credal set they induce
//!   ([`intervals`]),
//! * computes the intersection probability as a point prediction,
//! * decomposes uncertainty into total, aleatoric and epistemic parts, both
//!   the classic entropy-of-the-mean way and as upper/lower entropy over the
//!   credal set ([`entropy`]),
//! * reduces large class spaces to a few pseudo-classes ([`pia`]),
//! * computes lower probabilities, Möbius masses and the generalized
//!   Hartley measure ([`set_functions`]),
//! * scores OOD detection and calibration ([`metrics`]), and
//! * reads and writes prediction dumps and reports ([`ingest`]).
//!
//! Entropies are in bits; negative log-likelihood is in nats.

pub mod entropy;
pub mod error;
pub mod ingest;
pub mod intervals;
pub mod metrics;
pub mod pia;
pub mod set_functions;
pub mod synth;
pub mod types;

pub use entropy::{
    average_prediction, baseline_decomposition, credal_decomposition,
    credal_decomposition_detailed, lower_entropy, shannon_entropy, upper_entropy,
    CredalDecomposition, EntropyBound, LowerEntropyOptions, SolveMethod,
};
pub use error::{CredalError, IngestError, Result};
pub use intervals::{
    contains, extract_intervals, intersection_probability, intersection_probability_detailed,
    is_proper, tighten, IntersectionProbability,
};
pub use metrics::{
    accuracy, auprc, auroc, calibration_report, detection_report, ece, nll, CalibrationReport,
    DetectionReport,
};
pub use pia::{approximate_intervals, MergeRule, ReducedIntervals};
pub use set_functions::{
    generalized_hartley, lower_probability, mobius_masses, DEFAULT_GH_MAX_CLASSES,
};
pub use types::{
    validate_probability_vector, IntervalSystem, LabeledBatch, MassAssignment, PredictionSet,
    ProbabilityVector, UncertaintyTriple,
};
