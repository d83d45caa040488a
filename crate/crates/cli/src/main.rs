use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use viergo_cli::config::{parse_config, ExperimentConfig};
use viergo_cli::error::CliError;
use viergo_cli::runner::{execute, Command};

/// Constant step-size SGDA/SEG chain experiments with reproducible CSV and
/// SVG artifacts.
#[derive(Parser)]
#[command(name = "viergo", version, about)]
struct Args {
    /// Path to the experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Emit SVG figures next to the CSV artifacts.
    #[arg(long, global = true)]
    svg: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one chain and report its trajectory, moments, and steady state.
    Run,
    /// Steady-state error and gap across a step-size grid.
    #[command(name = "bias-sweep")]
    BiasSweep,
    /// Replicated normalized sums of a test function (histogram data).
    Clt,
    /// Richardson-Romberg refinement over paired step sizes.
    Rr,
    /// Sampling-based checks of the declared operator parameters.
    Validate,
}

fn load_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config <path> is required".into()))?;
    let mut cfg = parse_config(path).map_err(CliError::Config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.display().to_string();
    }
    if args.svg {
        cfg.output.emit_svg = true;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();

    if let Ok(threads) = std::env::var("VIERGO_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        } else {
            eprintln!("ignoring unparsable VIERGO_THREADS={}", threads);
        }
    }

    let command = match args.command {
        Cmd::Run => Command::Run,
        Cmd::BiasSweep => Command::BiasSweep,
        Cmd::Clt => Command::Clt,
        Cmd::Rr => Command::Rr,
        Cmd::Validate => Command::Validate,
    };

    let config = match load_config(&args) {
        Ok(c) => c,
        Err(CliError::Config(errors)) => {
            for e in &errors {
                eprintln!("config error: {}", e);
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };

    match execute(command, &config) {
        Ok(manifest) => {
            let dir = PathBuf::from(&config.output.dir);
            match manifest.write(&dir) {
                Ok(path) => println!("manifest: {}", path.display()),
                Err(e) => {
                    eprintln!("error writing manifest: {}", e);
                    return ExitCode::from(1);
                }
            }
            for p in &manifest.outputs {
                println!("artifact: {}", p.display());
            }
            for (k, v) in &manifest.summary {
                println!("{} = {}", k, v);
            }
            if let Some((iteration, norm)) = manifest.divergence {
                eprintln!(
                    "chain diverged at iteration {} (norm {:e}); partial outputs carry a .partial suffix",
                    iteration, norm
                );
                return ExitCode::from(3);
            }
            if manifest.violations > 0 {
                eprintln!("{} assumption violation(s) found", manifest.violations);
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Config(errors)) => {
            for e in &errors {
                eprintln!("config error: {}", e);
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
