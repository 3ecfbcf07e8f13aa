use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use equiheat_cli::{
    emit_report, run_experiment, threads_from_env, CliError, ExperimentConfig, ExperimentKind,
};

/// Run an equivariant heat-trace experiment and write its report.
#[derive(Debug, Parser)]
#[command(name = "equiheat", version)]
struct Args {
    /// trace | oscillatory | gaussian-volume | selberg | bundle-heat | probes
    kind: ExperimentKind,
    /// Flat TOML file of experiment keys.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> Result<bool, CliError> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Parse(e.to_string()))?;
    }
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let dir = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let report = run_experiment(args.kind, &cfg)?;
    for c in &report.checks {
        println!(
            "{} {}: value {:e}, target {:e}, tolerance {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tolerance
        );
    }
    for p in emit_report(&report, &dir)? {
        println!("wrote {}", p.display());
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
