use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use grounding::experiment::{run, validate, ExperimentConfig, Kind};

/// Run a grounding experiment described by a JSON config.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Experiment kind (overrides the config).
    #[arg(long)]
    kind: Option<String>,
    /// Dotted-path override, e.g. `graph.n=50`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Only check the config and print the feasibility report.
    #[arg(long)]
    validate: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(args: &Args) -> grounding::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config, &args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(kind) = &args.kind {
        cfg.kind = kind.parse::<Kind>()?;
    }
    if args.validate {
        let report = validate(&cfg);
        println!("{}", serde_json::to_string_pretty(&report)?);
        return if report.ok() {
            Ok(())
        } else {
            Err(grounding::Error::Config(format!(
                "{} violation(s)",
                report.violations.len()
            )))
        };
    }
    let manifest = run(&cfg)?;
    println!(
        "{} files written to {} (config {})",
        manifest.files.len(),
        manifest.out_dir.display(),
        &manifest.config_hash[..12]
    );
    Ok(())
}
