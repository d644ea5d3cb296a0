use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uq_cli::study::{run_config, with_threads};
use uq_cli::{parse, run_file, validate_file, Outcome, EXIT_INVALID, FLOOD_STUDY};

#[derive(Parser)]
#[command(name = "uq", version, about = "Run uncertainty quantification studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study file and write report.json plus CSV artifacts.
    Run {
        config: PathBuf,
        /// Output directory (overrides the study's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for model evaluations.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a study file without running it.
    Validate { config: PathBuf },
    /// Run the built-in flood study.
    FloodDemo {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "flood-demo")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn summarize(outcome: &Outcome) {
    for step in &outcome.report.steps {
        println!("{:<24} {:<24} {:>9} evaluations", step.name, step.method, step.n_evaluations);
    }
    if let Some(e) = &outcome.report.error {
        for d in &e.diagnostics {
            eprintln!("error ({}): {d}", e.kind);
        }
    }
    if let Some(dir) = &outcome.out_dir {
        println!("report: {}", dir.join("report.json").display());
    }
}

fn flood_demo(seed: u64, out: &Path, threads: Option<usize>) -> Outcome {
    let mut config = parse(FLOOD_STUDY).expect("shipped flood study parses");
    config.seed = Some(seed);
    with_threads(threads, || run_config(&config, Path::new("."), out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, threads } => {
            let outcome = run_file(&config, out.as_deref(), threads);
            summarize(&outcome);
            outcome.exit_code
        }
        Command::Validate { config } => {
            let diagnostics = validate_file(&config);
            for d in &diagnostics {
                println!("{d}");
            }
            if diagnostics.is_empty() {
                println!("ok");
                0
            } else {
                EXIT_INVALID
            }
        }
        Command::FloodDemo { seed, out, threads } => {
            let outcome = flood_demo(seed, &out, threads);
            summarize(&outcome);
            outcome.exit_code
        }
    };
    ExitCode::from(code as u8)
}
