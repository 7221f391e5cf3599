//! Command-line front end: `cfloc <verb> --config FILE [--seed N] [--out DIR]`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cfloc::harness::{load_config_with, run_verb, Scale, Verb};

#[derive(Parser)]
#[command(name = "cfloc", version, about = "Cell-free MIMO user positioning experiments")]
struct Cli {
    #[command(subcommand)]
    verb: VerbArg,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Run only this seed (replaces the configured list).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `experiment.out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill unset keys with the full-size scenario instead of desk defaults.
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum VerbArg {
    /// Dump layouts and fingerprints.
    Simulate(Common),
    /// Train both stages and write checkpoints.
    Train(Common),
    /// Evaluate checkpointed agents.
    Evaluate(Common),
    /// Reference-grid baseline RMSE.
    Baseline(Common),
    /// Run the configured sweep.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (verb, args) = match cli.verb {
        VerbArg::Simulate(a) => (Verb::Simulate, a),
        VerbArg::Train(a) => (Verb::Train, a),
        VerbArg::Evaluate(a) => (Verb::Evaluate, a),
        VerbArg::Baseline(a) => (Verb::Baseline, a),
        VerbArg::Sweep(a) => (Verb::Sweep, a),
    };
    let scale = if args.paper_scale { Scale::Paper } else { Scale::Desk };
    let mut spec = match load_config_with(&args.config, scale, std::env::vars()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = args.seed {
        spec.experiment.seeds = vec![seed];
    }
    let Some(out) = args.out.or_else(|| spec.experiment.out.clone()) else {
        eprintln!("error: no output directory (pass --out or set experiment.out)");
        return ExitCode::from(1);
    };
    match run_verb(verb, &spec, &out) {
        Ok(report) => {
            for f in report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
