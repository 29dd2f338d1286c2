use clap::{Parser, Subcommand};
use prescriptor_cli::config::ExperimentConfig;
use prescriptor_cli::{run_command, Command};
use prescriptor_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Weighted predictive prescriptions: synthetic benchmark experiments.
#[derive(Parser)]
#[command(name = "prescriptor", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write the synthetic datasets as CSV files.
    GenData(CommonArgs),
    /// True-risk convergence toward the full-information benchmark.
    Convergence(CommonArgs),
    /// Performance versus uninformative covariate dimensions.
    DimensionStudy(CommonArgs),
    /// Out-of-sample coefficient of prescriptiveness.
    Prescriptiveness(CommonArgs),
    /// Kaplan-Meier corrected versus naive prescriptions under censoring.
    CensoringStudy(CommonArgs),
    /// Linear-rule ERM against weighted prescriptions on shipment planning.
    ErmStudy(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all available).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write a generic plotting script next to the CSV.
    #[arg(long)]
    emit_plot_script: bool,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::GenData(a) => (Command::GenData, a),
        Sub::Convergence(a) => (Command::Convergence, a),
        Sub::DimensionStudy(a) => (Command::DimensionStudy, a),
        Sub::Prescriptiveness(a) => (Command::Prescriptiveness, a),
        Sub::CensoringStudy(a) => (Command::CensoringStudy, a),
        Sub::ErmStudy(a) => (Command::ErmStudy, a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }

    let run = || run_command(command, &cfg, &args.out, args.emit_plot_script);
    let result = match args.threads {
        Some(t) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: thread pool: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            pool.install(run)
        }
        None => run(),
    };

    match result {
        Ok(report) => {
            eprintln!(
                "{}: {} rows -> {}",
                command.name(),
                report.rows.len(),
                args.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Parse(_) | Error::InvalidArgument(_)
                | Error::UnknownMethod(_) | Error::DimensionMismatch(_) => {
                    ExitCode::from(EXIT_CONFIG)
                }
                _ => ExitCode::from(EXIT_NUMERICAL),
            }
        }
    }
}
