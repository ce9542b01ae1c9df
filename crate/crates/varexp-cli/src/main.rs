//! Config-driven experiment runner for the varexp laboratory.
//!
//! Exit codes: 0 success, 1 config error, 2 solver non-convergence
//! (artifacts still written with failure flags), 3 i/o or internal failure.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "varexp", version, about = "variable-exponent norm and extremal experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (also via VAREXP_THREADS); 0 = all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config file, reporting every problem.
    Validate { config: PathBuf },
}

fn load_config(path: &PathBuf) -> Result<config::ExperimentConfig, ExitCode> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return Err(ExitCode::from(1));
        }
    };
    match config::parse_config(&text) {
        Ok(cfg) => Ok(cfg),
        Err(err) => {
            eprint!("{err}");
            Err(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, output_dir, seed, threads } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(s) = seed {
                cfg.seed = s;
                cfg.solver.seed = s;
            }
            let threads = threads.or_else(|| {
                std::env::var("VAREXP_THREADS")
                    .ok()
                    .and_then(|v| v.parse::<usize>().ok())
            });
            if let Some(t) = threads {
                if t > 0 {
                    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                        eprintln!("thread pool setup failed: {e}");
                    }
                }
            }
            match runner::run(&cfg) {
                Ok(summary) => {
                    for (k, v) in &summary.lines {
                        println!("{k} = {v}");
                    }
                    ExitCode::from(summary.exit_code as u8)
                }
                Err(runner::RunError::Domain(e)) => {
                    eprintln!("experiment failed: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
