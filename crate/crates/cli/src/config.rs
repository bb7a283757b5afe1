use std::fmt;
use std::str::FromStr;

use credal_core::ingest::ReportFormat;
use credal_core::metrics::DEFAULT_ECE_BINS;
use credal_core::{LowerEntropyOptions, MergeRule, DEFAULT_GH_MAX_CLASSES};

/// Which uncertainty model produces the scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Entropy of the averaged prediction and mean entropy of the samples.
    Baseline,
    /// Upper and lower entropy over the credal set.
    CredalEntropy,
    /// Generalized Hartley measure of the credal set (epistemic only).
    CredalGh,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Baseline => "baseline",
            Measure::CredalEntropy => "credal-entropy",
            Measure::CredalGh => "credal-gh",
        }
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Measure::Baseline),
            "credal-entropy" => Ok(Measure::CredalEntropy),
            "credal-gh" => Ok(Measure::CredalGh),
            other => Err(format!(
                "unknown measure {other:?} (expected baseline, credal-entropy or credal-gh)"
            )),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uncertainty {
    Total,
    Aleatoric,
    Epistemic,
}

impl Uncertainty {
    pub fn as_str(self) -> &'static str {
        match self {
            Uncertainty::Total => "tu",
            Uncertainty::Aleatoric => "au",
            Uncertainty::Epistemic => "eu",
        }
    }
}

impl FromStr for Uncertainty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tu" => Ok(Uncertainty::Total),
            "au" => Ok(Uncertainty::Aleatoric),
            "eu" => Ok(Uncertainty::Epistemic),
            other => Err(format!(
                "unknown uncertainty {other:?} (expected tu, au or eu)"
            )),
        }
    }
}

impl fmt::Display for Uncertainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn parse_merge_rule(s: &str) -> Result<MergeRule, String> {
    match s {
        "coherent" => Ok(MergeRule::Coherent),
        "literal" => Ok(MergeRule::Literal),
        other => Err(format!(
            "unknown merge rule {other:?} (expected coherent or literal)"
        )),
    }
}

fn merge_rule_name(rule: MergeRule) -> &'static str {
    match rule {
        MergeRule::Coherent => "coherent",
        MergeRule::Literal => "literal",
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub measure: Measure,
    pub uncertainty: Uncertainty,
    /// Reduce to this many classes before the credal measures, when smaller
    /// than the class count.
    pub pia_j: Option<usize>,
    pub merge_rule: MergeRule,
    pub ece_bins: usize,
    pub exact_threshold: usize,
    pub random_orders: usize,
    pub gh_max_classes: usize,
    /// Add the generalized Hartley column to `uq` reports.
    pub gh: bool,
    pub seed: u64,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lower = LowerEntropyOptions::default();
        Self {
            measure: Measure::CredalEntropy,
            uncertainty: Uncertainty::Epistemic,
            pia_j: None,
            merge_rule: MergeRule::Coherent,
            ece_bins: DEFAULT_ECE_BINS,
            exact_threshold: lower.exact_threshold,
            random_orders: lower.random_orders,
            gh_max_classes: DEFAULT_GH_MAX_CLASSES,
            gh: false,
            seed: lower.seed,
            format: ReportFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if matches!(self.pia_j, Some(j) if j < 2) {
            return Err("--pia-j must be at least 2".into());
        }
        if self.ece_bins == 0 {
            return Err("--ece-bins must be at least 1".into());
        }
        if self.measure == Measure::CredalGh && self.uncertainty != Uncertainty::Epistemic {
            return Err(
                "the credal-gh measure only provides epistemic uncertainty (--uncertainty eu)"
                    .into(),
            );
        }
        Ok(())
    }

    pub fn lower_options(&self) -> LowerEntropyOptions {
        LowerEntropyOptions {
            exact_threshold: self.exact_threshold,
            random_orders: self.random_orders,
            seed: self.seed,
        }
    }

    /// Every setting as `(key, value)`, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let format = match self.format {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        };
        [
            ("measure", self.measure.to_string()),
            ("uncertainty", self.uncertainty.to_string()),
            (
                "pia_j",
                self.pia_j.map_or("none".to_string(), |j| j.to_string()),
            ),
            ("merge_rule", merge_rule_name(self.merge_rule).to_string()),
            ("ece_bins", self.ece_bins.to_string()),
            ("exact_threshold", self.exact_threshold.to_string()),
            ("random_orders", self.random_orders.to_string()),
            ("gh_max_classes", self.gh_max_classes.to_string()),
            ("gh", self.gh.to_string()),
            ("seed", self.seed.to_string()),
            ("format", format.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (format!("config.{k}"), v))
        .collect()
    }
}
