use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stitchkit_cli::commands::{score_params_with, DegradeCategory};
use stitchkit_cli::{
    degrade, eer, evaluate, score, synthesize, DegradeOptions, EvaluateOptions, ScoreOptions, SynthesizeOptions,
    ToolkitConfig, UsageError,
};

#[derive(Parser, Debug)]
#[command(name = "stitchkit", version, about = "Fingerprint mosaicking-artifact synthesis and scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize 224x224 training pairs with ground-truth masks.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Replicas per input image.
        #[arg(long, default_value_t = 1)]
        count: u32,
        /// Doubled size/offset ranges, no augmentation.
        #[arg(long)]
        warmup: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the augmented source of each sample.
        #[arg(long)]
        debug: bool,
    },
    /// Inject patch artifacts at native resolution for EER studies.
    Degrade {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// small (1-2% offsets) or large (2-7% offsets).
        #[arg(long, value_parser = ["small", "large"])]
        category: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Score a mask file or every mask in a directory (one JSON line each).
    Score {
        #[arg(long)]
        mask: PathBuf,
        /// Patch weight.
        #[arg(long)]
        b: Option<f64>,
        /// Line weight.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare predicted masks against ground truth, matched by file name.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Equal error rate from genuine and impostor score files.
    Eer {
        #[arg(long)]
        genuine: PathBuf,
        #[arg(long)]
        impostor: PathBuf,
    },
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct RunSummary<'a> {
    command: &'a str,
    samples: usize,
    shortfall: u32,
    manifest: PathBuf,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Synthesize { input, output, seed, count, warmup, config, workers, debug } => {
            let config = ToolkitConfig::load_or_default(config.as_deref())?;
            let opts = SynthesizeOptions { input, output: output.clone(), seed, count, warmup, config, workers, debug };
            let manifest = synthesize(&opts)?;
            print_json(&RunSummary {
                command: "synthesize",
                samples: manifest.samples.len(),
                shortfall: manifest.samples.iter().map(|s| s.shortfall).sum(),
                manifest: output.join(stitchkit_cli::manifest::MANIFEST_FILE),
            })?;
        }
        Command::Degrade { input, output, category, seed, count, config, workers } => {
            let category: DegradeCategory = category.parse()?;
            let config = ToolkitConfig::load_or_default(config.as_deref())?;
            let opts = DegradeOptions { input, output: output.clone(), category, seed, count, config, workers };
            let manifest = degrade(&opts)?;
            print_json(&RunSummary {
                command: "degrade",
                samples: manifest.samples.len(),
                shortfall: manifest.samples.iter().map(|s| s.shortfall).sum(),
                manifest: output.join(stitchkit_cli::manifest::MANIFEST_FILE),
            })?;
        }
        Command::Score { mask, b, c, config } => {
            let mut config = ToolkitConfig::load_or_default(config.as_deref())?;
            config.score = score_params_with(&config.score, b, c);
            let failures = score(&ScoreOptions { mask, config }, &mut std::io::stdout().lock())?;
            if failures > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Evaluate { pred, gt, report, config } => {
            let config = ToolkitConfig::load_or_default(config.as_deref())?;
            let result = evaluate(&EvaluateOptions { pred, gt, report, config })?;
            for name in &result.excluded {
                eprintln!("warning: {name} has no counterpart; excluded");
            }
            print_json(&result.report)?;
        }
        Command::Eer { genuine, impostor } => {
            print_json(&eer(&genuine, &impostor)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
