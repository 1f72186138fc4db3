use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lel_cli::demos::{demo_config, DEMO_NAMES};
use lel_cli::{checks, init_thread_pool, run, validate_config, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "lel", version, about = "Effective-state reduction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the invariant suites only.
    Check,
    /// Run a built-in configuration.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMO_NAMES))]
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn report(config: &ExperimentConfig, out_dir: &std::path::Path) -> ExitCode {
    match run(config, out_dir) {
        Ok(summary) => {
            println!("wrote {}", out_dir.join(config.csv_path()).display());
            println!("wrote {}", out_dir.join(config.summary_path()).display());
            for (name, ok) in &summary.invariants {
                println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { config, out_dir } => {
            let raw = match fs::read_to_string(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: reading {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            match validate_config(&raw) {
                Ok(cfg) => report(&cfg, &out_dir),
                Err(errs) => fail(HarnessError::Config(errs)),
            }
        }
        Command::Demo { name, out_dir } => {
            let cfg = demo_config(&name).expect("clap restricts demo names");
            report(&cfg, &out_dir)
        }
        Command::Check => {
            let results = checks::run_checks();
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    }
}
