use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::Parser;
use fpl::config::{parse_overrides, read_config_file};
use fpl::{run_experiment, schema, Config, RunContext, EXPERIMENTS};

/// Frequency Principle laboratory.
#[derive(Debug, Parser)]
#[command(name = "fpl", version, about)]
struct Cli {
    /// synth1d, project, filter, poisson, hybrid, theory, parity, image2d or ideal
    experiment: String,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shorthand for seed=N.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG figures.
    #[arg(long)]
    svg: bool,
    /// Progress notes on stderr.
    #[arg(long, short)]
    verbose: bool,
    /// Print the experiment's keys and presets and exit.
    #[arg(long)]
    describe: bool,
    /// Config overrides: key=value or --key value.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn run(cli: Cli) -> Result<()> {
    let schema = schema(&cli.experiment).ok_or_else(|| {
        anyhow!("unknown experiment '{}' (expected one of {})", cli.experiment, EXPERIMENTS.join(", "))
    })?;
    if cli.describe {
        print!("{}", schema.describe());
        return Ok(());
    }
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => Vec::new(),
    };
    let mut overrides = parse_overrides(&cli.overrides)?;
    if let Some(s) = cli.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    let cfg = Config::resolve(schema, &file, &overrides)?;
    let out = cli.out.unwrap_or_else(|| PathBuf::from("out").join(&cli.experiment));
    let ctx = RunContext { out_dir: out.clone(), svg: cli.svg, verbose: cli.verbose };
    let manifest = run_experiment(&cfg, &ctx)?;
    println!("{}", out.join("manifest.json").display());
    println!("{}", serde_json::to_string_pretty(&manifest.summary)?);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
