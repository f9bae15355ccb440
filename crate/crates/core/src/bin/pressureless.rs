use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pressureless::commands::{cmd_limits, cmd_oracle, cmd_solve, cmd_verify, Outcome};
use pressureless::config::RunConfig;
use pressureless::Error;

#[derive(Parser)]
#[command(version, about = "Entropy solutions of the damped pressureless Euler system in 1-D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample m, q, u on a grid and extract the solution measure.
    Solve(Common),
    /// Compare against sticky-particle dynamics.
    Oracle(Common),
    /// Zero-relaxation and vanishing-damping studies.
    Limits(Common),
    /// Run the verification battery; exit 1 if a check fails.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, env = "PRESSURELESS_OUT")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<Outcome, (u8, String)> {
    let (args, cmd): (&Common, fn(&RunConfig) -> pressureless::Result<Outcome>) = match &cli.command {
        Command::Solve(a) => (a, cmd_solve),
        Command::Oracle(a) => (a, cmd_oracle),
        Command::Limits(a) => (a, cmd_limits),
        Command::Verify(a) => (a, cmd_verify),
    };
    let config_error = |e: Error| (2, e.to_string());
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (2, e.to_string()))?;
    }
    let text = fs::read_to_string(&args.config)
        .map_err(|e| (2, format!("{}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text).map_err(config_error)?;
    cfg.data().map_err(config_error)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let outcome = cmd(&cfg).map_err(|e| match e {
        Error::Extraction { .. } | Error::Internal(_) => (1, e.to_string()),
        other => config_error(other),
    })?;
    fs::create_dir_all(&args.out).map_err(|e| (2, format!("{}: {e}", args.out.display())))?;
    for (name, body) in &outcome.files {
        let path = args.out.join(name);
        fs::write(&path, body).map_err(|e| (2, format!("{}: {e}", path.display())))?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
