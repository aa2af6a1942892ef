//! `eigenstaf`: runs one pipeline described by a JSON config and writes `report.json` plus CSV tables.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use crate::commands::Outcome;
use crate::config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {}", .0.name(), .0)]
    Numeric(#[from] eigenstaf::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eigenstaf", version, about = "Eigen-stafs, leaf charts and torus c-maps from a JSON config")]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Depth cap; overrides `depth` in the config.
    #[arg(long)]
    depth: Option<usize>,
    /// Target error; overrides `tol` in the config.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for random test functions and sample points.
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel summation in pairings (equal within the reported bounds, not bitwise).
    #[arg(long)]
    parallel: bool,
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    let io = |p: &Path, e: &dyn std::fmt::Display| CliError::Output(format!("{}: {}", p.display(), e));
    fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;
    let report = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&outcome.report).map_err(|e| io(&report, &e))?;
    text.push('\n');
    fs::write(&report, text).map_err(|e| io(&report, &e))?;
    for t in &outcome.tables {
        let path = dir.join(t.name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, &e))?;
        w.write_record(&t.header).map_err(|e| io(&path, &e))?;
        for row in &t.rows {
            w.write_record(row).map_err(|e| io(&path, &e))?;
        }
        w.flush().map_err(|e| io(&path, &e))?;
    }
    Ok(())
}

fn run(args: Args) -> Result<bool, CliError> {
    let overrides = Overrides {
        out: args.out,
        depth: args.depth,
        tol: args.tol,
        seed: args.seed,
        parallel: args.parallel,
    };
    let (cfg, base) = RunConfig::load(&args.config, &overrides)?;
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.command.name()));
    let start = Instant::now();
    let outcome = commands::run(&cfg, &base)?;
    write_outputs(&out, &outcome)?;
    eprintln!(
        "{} finished in {:.2} s, artifacts in {}",
        cfg.command.name(),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
