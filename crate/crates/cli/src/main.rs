use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use credal_cli::commands::{self, SynthFormat};
use credal_cli::config::parse_merge_rule;
use credal_cli::{CliError, CliResult, Measure, RunConfig, Uncertainty};
use credal_core::ingest::{Report, ReportFormat};
use credal_core::synth::SynthConfig;
use credal_core::MergeRule;

#[derive(Parser)]
#[command(
    name = "credal",
    version,
    about = "Credal-set uncertainty quantification for sampled predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-instance uncertainty decompositions and intersection probability.
    Uq {
        /// Prediction file (.npy, .jsonl or .csv).
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// OOD detection AUROC/AUPRC from in- and out-of-distribution files.
    Ood {
        #[arg(long)]
        id: PathBuf,
        #[arg(long)]
        ood: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Accuracy, ECE and NLL of the averaged and intersection predictions.
    Calibrate {
        /// Labelled prediction file (.jsonl or .csv).
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic ID/OOD dataset.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 500)]
        n_id: usize,
        #[arg(long, default_value_t = 500)]
        n_ood: usize,
        #[arg(long, default_value = "jsonl")]
        format: SynthFormat,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// baseline, credal-entropy or credal-gh.
    #[arg(long, default_value = "credal-entropy")]
    measure: Measure,
    /// tu, au or eu.
    #[arg(long, default_value = "eu")]
    uncertainty: Uncertainty,
    /// Reduce to this many classes before computing credal measures.
    #[arg(long)]
    pia_j: Option<usize>,
    /// coherent or literal merged-class bounds.
    #[arg(long, default_value = "coherent", value_parser = parse_merge_rule)]
    merge_rule: MergeRule,
    #[arg(long, default_value_t = 15)]
    ece_bins: usize,
    /// Report format: json or csv.
    #[arg(long, default_value = "json")]
    format: ReportFormat,
    /// Seed for the randomized lower-entropy orderings.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest class count solved exactly for the lower entropy.
    #[arg(long, default_value_t = 16)]
    exact_threshold: usize,
    /// Random orderings tried by the lower-entropy heuristic.
    #[arg(long, default_value_t = 8)]
    random_orders: usize,
    /// Largest class count for the generalized Hartley measure.
    #[arg(long, default_value_t = 20)]
    gh_max_classes: usize,
    /// Include the generalized Hartley measure in `uq` output.
    #[arg(long)]
    gh: bool,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            measure: self.measure,
            uncertainty: self.uncertainty,
            pia_j: self.pia_j,
            merge_rule: self.merge_rule,
            ece_bins: self.ece_bins,
            exact_threshold: self.exact_threshold,
            random_orders: self.random_orders,
            gh_max_classes: self.gh_max_classes,
            gh: self.gh,
            seed: self.seed,
            format: self.format,
        }
    }

    fn setup(&self) -> CliResult<RunConfig> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Validation("--threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        Ok(self.config())
    }

    fn emit(&self, report: &Report) -> CliResult<()> {
        emit(report, self.format, self.output.as_deref())
    }
}

fn emit(report: &Report, format: ReportFormat, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => credal_core::ingest::write_report(report, path, format).map_err(Into::into),
        None => {
            print!("{}", report.render(format));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Uq { input, common } => {
            let cfg = common.setup()?;
            common.emit(&commands::uq(&input, &cfg)?)
        }
        Command::Ood { id, ood, common } => {
            let cfg = common.setup()?;
            let (_, report) = commands::ood(&id, &ood, &cfg)?;
            common.emit(&report)
        }
        Command::Calibrate { input, common } => {
            let cfg = common.setup()?;
            common.emit(&commands::calibrate(&input, &cfg)?)
        }
        Command::Synth {
            out_dir,
            classes,
            samples,
            n_id,
            n_ood,
            format,
            seed,
        } => {
            let config = SynthConfig {
                classes,
                samples,
                n_id,
                n_ood,
                seed,
                ..Default::default()
            };
            let out = commands::synth(&config, &out_dir, format)?;
            println!("{}", out.id.display());
            println!("{}", out.ood.display());
            println!("{}", out.manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
