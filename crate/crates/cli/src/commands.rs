//! The batch pipeline behind each subcommand: read predictions, wrap each
//! instance in a credal set, compute measures, aggregate metrics, and build
//! the report.

use std::path::{Path, PathBuf};

use credal_core::entropy::{
    average_prediction, baseline_decomposition, credal_decomposition_detailed,
};
use credal_core::ingest::{self, read_predictions, Cell, PredictionFile, Report, ReportFormat};
use credal_core::intervals::{
    extract_intervals, intersection_probability_detailed, IntersectionProbability,
};
use credal_core::metrics::{calibration_report, detection_report, DetectionReport};
use credal_core::pia::approximate_intervals;
use credal_core::set_functions::generalized_hartley;
use credal_core::synth::{generate, SynthConfig};
use credal_core::{
    CredalDecomposition, IntervalSystem, LabeledBatch, PredictionSet, UncertaintyTriple,
};
use rayon::prelude::*;

use crate::config::{Measure, RunConfig, Uncertainty};
use crate::error::{CliError, CliResult};

pub const TOOL_NAME: &str = "credal";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything computed for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceAnalysis {
    pub baseline: UncertaintyTriple,
    pub credal: CredalDecomposition,
    /// Class count the credal measures were computed on.
    pub reduced_classes: usize,
    pub intersection: IntersectionProbability,
    pub gh: Option<f64>,
}

/// Interval system the credal measures run on: the raw extracted bounds, or
/// their reduction when `pia_j` is below the class count. The intersection
/// probability always comes from the raw bounds.
fn measured_intervals(
    raw: &IntervalSystem,
    intersection: &IntersectionProbability,
    cfg: &RunConfig,
) -> CliResult<IntervalSystem> {
    match cfg.pia_j {
        Some(j) if j < raw.classes() => {
            Ok(approximate_intervals(raw, &intersection.probability, j, cfg.merge_rule)?.intervals)
        }
        _ => Ok(raw.clone()),
    }
}

fn hartley(intervals: &IntervalSystem, cfg: &RunConfig) -> CliResult<f64> {
    generalized_hartley(intervals, cfg.gh_max_classes).map_err(|e| match e {
        credal_core::CredalError::TooManyClasses { .. } => {
            CliError::Validation(format!("{e} (use --pia-j to reduce the class count)"))
        }
        other => other.into(),
    })
}

pub fn analyze(set: &PredictionSet, cfg: &RunConfig, with_gh: bool) -> CliResult<InstanceAnalysis> {
    let raw = extract_intervals(set);
    let intersection = intersection_probability_detailed(&raw)?;
    let measured = measured_intervals(&raw, &intersection, cfg)?;
    let credal = credal_decomposition_detailed(&measured, &cfg.lower_options())?;
    let gh = if with_gh {
        Some(hartley(&measured, cfg)?)
    } else {
        None
    };
    Ok(InstanceAnalysis {
        baseline: baseline_decomposition(set),
        credal,
        reduced_classes: measured.classes(),
        intersection,
        gh,
    })
}

fn pick(triple: &UncertaintyTriple, which: Uncertainty) -> f64 {
    match which {
        Uncertainty::Total => triple.tu,
        Uncertainty::Aleatoric => triple.au,
        Uncertainty::Epistemic => triple.eu,
    }
}

/// The configured uncertainty score of one instance.
pub fn score(set: &PredictionSet, cfg: &RunConfig) -> CliResult<f64> {
    match cfg.measure {
        Measure::Baseline => Ok(pick(&baseline_decomposition(set), cfg.uncertainty)),
        Measure::CredalEntropy | Measure::CredalGh => {
            let raw = extract_intervals(set);
            let intersection = intersection_probability_detailed(&raw)?;
            let measured = measured_intervals(&raw, &intersection, cfg)?;
            if cfg.measure == Measure::CredalGh {
                return hartley(&measured, cfg);
            }
            let d = credal_decomposition_detailed(&measured, &cfg.lower_options())?;
            Ok(pick(&d.triple, cfg.uncertainty))
        }
    }
}

/// Applies `f` to every instance in parallel; results keep input order.
fn per_instance<T, F>(batch: &LabeledBatch, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(&PredictionSet) -> CliResult<T> + Sync,
{
    batch.instances().par_iter().map(&f).collect()
}

fn base_report<I, S>(command: &str, cfg: &RunConfig, columns: I) -> Report
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut report = Report::new(columns);
    report
        .meta("tool", TOOL_NAME)
        .meta("tool_version", TOOL_VERSION)
        .meta("command", command)
        .meta("entropy_log_base", "2 (bits)")
        .meta("nll_log_base", "e (nats)");
    for (k, v) in cfg.echo() {
        report.meta(k, v);
    }
    report
}

fn describe_input(report: &mut Report, key: &str, path: &Path, file: &PredictionFile) {
    report
        .meta(format!("{key}.path"), path.display().to_string())
        .meta(format!("{key}.format"), file.format.as_str())
        .meta(format!("{key}.dtype"), file.dtype.descr())
        .meta(format!("{key}.instances"), file.batch.len().to_string())
        .meta(format!("{key}.classes"), file.batch.classes().to_string());
}

pub fn load(path: &Path) -> CliResult<PredictionFile> {
    Ok(read_predictions(path)?)
}

/// Per-instance baseline and credal decompositions plus the intersection
/// probability.
pub fn uq(path: &Path, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate().map_err(CliError::Validation)?;
    let file = load(path)?;
    let batch = &file.batch;
    let with_gh = cfg.gh || cfg.measure == Measure::CredalGh;
    let results = per_instance(batch, |set| analyze(set, cfg, with_gh))?;

    let mut columns: Vec<String> = [
        "id",
        "samples",
        "classes",
        "label",
        "reduced_classes",
        "baseline_tu",
        "baseline_au",
        "baseline_eu",
        "credal_tu",
        "credal_au",
        "credal_eu",
        "lower_entropy_method",
        "gh",
        "alpha",
        "alpha_clamped",
        "avg_argmax",
        "intersection_argmax",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    columns.extend((0..batch.classes()).map(|k| format!("intersection_p{k}")));

    let mut report = base_report("uq", cfg, columns);
    describe_input(&mut report, "input", path, &file);
    for (i, (set, a)) in batch.instances().iter().zip(&results).enumerate() {
        let mut row: Vec<Cell> = vec![
            batch.ids()[i].clone().into(),
            set.len().into(),
            set.classes().into(),
            batch.labels().map(|l| l[i]).into(),
            a.reduced_classes.into(),
            a.baseline.tu.into(),
            a.baseline.au.into(),
            a.baseline.eu.into(),
            a.credal.triple.tu.into(),
            a.credal.triple.au.into(),
            a.credal.triple.eu.into(),
            a.credal.lower.method.as_str().into(),
            a.gh.into(),
            a.intersection.alpha.into(),
            a.intersection.alpha_clamped.into(),
            average_prediction(set).argmax().into(),
            a.intersection.probability.argmax().into(),
        ];
        row.extend(
            a.intersection
                .probability
                .as_slice()
                .iter()
                .map(|&p| Cell::Float(p)),
        );
        report.push_row(row);
    }
    Ok(report)
}

/// Uncertainty scores for every instance of both files, then AUROC/AUPRC
/// with out-of-distribution as the positive class.
pub fn ood(
    id_path: &Path,
    ood_path: &Path,
    cfg: &RunConfig,
) -> CliResult<(DetectionReport, Report)> {
    cfg.validate().map_err(CliError::Validation)?;
    let id_file = load(id_path)?;
    let ood_file = load(ood_path)?;
    let id_scores = per_instance(&id_file.batch, |s| score(s, cfg))?;
    let ood_scores = per_instance(&ood_file.batch, |s| score(s, cfg))?;
    let detection = detection_report(&id_scores, &ood_scores)?;

    let mut report = base_report(
        "ood",
        cfg,
        ["measure", "uncertainty", "auroc", "auprc", "n_id", "n_ood"],
    );
    describe_input(&mut report, "id", id_path, &id_file);
    describe_input(&mut report, "ood", ood_path, &ood_file);
    report.meta("labels", "id=0 ood=1, higher score = more likely ood");
    report.push_row(vec![
        cfg.measure.as_str().into(),
        cfg.uncertainty.as_str().into(),
        detection.auroc.into(),
        detection.auprc.into(),
        detection.n_id.into(),
        detection.n_ood.into(),
    ]);
    Ok((detection, report))
}

/// Accuracy, ECE and NLL of the averaged prediction and of the intersection
/// probability, side by side.
pub fn calibrate(path: &Path, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate().map_err(CliError::Validation)?;
    let file = load(path)?;
    let batch = &file.batch;
    let labels = batch
        .labels()
        .ok_or_else(|| CliError::Validation(format!("{} has no labels", path.display())))?;
    let points = per_instance(batch, |set| {
        let raw = extract_intervals(set);
        Ok((
            average_prediction(set),
            intersection_probability_detailed(&raw)?.probability,
        ))
    })?;
    let (averaged, intersection): (Vec<_>, Vec<_>) = points.into_iter().unzip();

    let mut report = base_report(
        "calibrate",
        cfg,
        ["predictor", "accuracy", "ece", "nll", "bins", "n"],
    );
    describe_input(&mut report, "input", path, &file);
    for (name, preds) in [("averaged", &averaged), ("intersection", &intersection)] {
        let c = calibration_report(preds, labels, cfg.ece_bins)?;
        report.push_row(vec![
            name.into(),
            c.accuracy.into(),
            c.ece.into(),
            c.nll.into(),
            c.bins.into(),
            preds.len().into(),
        ]);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFormat {
    Jsonl,
    Csv,
    Npy,
}

impl std::str::FromStr for SynthFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(SynthFormat::Jsonl),
            "csv" => Ok(SynthFormat::Csv),
            "npy" => Ok(SynthFormat::Npy),
            other => Err(format!(
                "unknown synth format {other:?} (expected jsonl, csv or npy)"
            )),
        }
    }
}

impl SynthFormat {
    fn extension(self) -> &'static str {
        match self {
            SynthFormat::Jsonl => "jsonl",
            SynthFormat::Csv => "csv",
            SynthFormat::Npy => "npy",
        }
    }
}

/// Paths written by [`synth`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub id: PathBuf,
    pub ood: PathBuf,
    pub manifest: PathBuf,
}

fn write_batch(batch: &LabeledBatch, path: &Path, format: SynthFormat) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    match format {
        SynthFormat::Jsonl => std::fs::write(path, ingest::write_jsonl(batch)).map_err(io),
        SynthFormat::Csv => std::fs::write(path, ingest::write_csv(batch)).map_err(io),
        SynthFormat::Npy => {
            let samples = batch.instances()[0].len();
            let data: Vec<f64> = batch
                .instances()
                .iter()
                .flat_map(|s| {
                    s.samples()
                        .iter()
                        .flat_map(|p| p.as_slice().iter().copied())
                })
                .collect();
            Ok(ingest::write_npy_file(
                path,
                [batch.len(), samples, batch.classes()],
                &data,
            )?)
        }
    }
}

/// Writes `id.<ext>`, `ood.<ext>` and `manifest.json` (generator settings).
pub fn synth(config: &SynthConfig, out_dir: &Path, format: SynthFormat) -> CliResult<SynthOutput> {
    config.validate().map_err(CliError::Validation)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let data = generate(config);
    let ext = format.extension();
    let out = SynthOutput {
        id: out_dir.join(format!("id.{ext}")),
        ood: out_dir.join(format!("ood.{ext}")),
        manifest: out_dir.join("manifest.json"),
    };
    write_batch(&data.id, &out.id, format)?;
    write_batch(&data.ood, &out.ood, format)?;

    let mut manifest = Report::new(["file", "role", "instances", "labelled"]);
    manifest
        .meta("tool", TOOL_NAME)
        .meta("tool_version", TOOL_VERSION)
        .meta("command", "synth")
        .meta("format", ext);
    for (k, v) in config.describe() {
        manifest.meta(format!("generator.{k}"), v);
    }
    let labelled = format != SynthFormat::Npy;
    manifest.push_row(vec![
        format!("id.{ext}").into(),
        "id".into(),
        config.n_id.into(),
        labelled.into(),
    ]);
    manifest.push_row(vec![
        format!("ood.{ext}").into(),
        "ood".into(),
        config.n_ood.into(),
        false.into(),
    ]);
    ingest::write_report(&manifest, &out.manifest, ReportFormat::Json)?;
    Ok(out)
}
