//! Run configuration read from JSON, with command-line overrides.

use std::path::{Path, PathBuf};

use eigenstaf::cocycle::MapSpec;
use eigenstaf::leaf::ChartSpec;
use eigenstaf::spectra::MatrixSpec;
use eigenstaf::staf::StafSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Staf,
    Variation,
    Cdf,
    Pair,
    Cocycle,
    Regularity,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Staf => "staf",
            Command::Variation => "variation",
            Command::Cdf => "cdf",
            Command::Pair => "pair",
            Command::Cocycle => "cocycle",
            Command::Regularity => "regularity",
            Command::Verify => "verify",
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_spectral_tol() -> f64 {
    eigenstaf::spectra::DEFAULT_TOL
}

fn default_seed() -> u64 {
    20240607
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Matrix given inline.
    #[serde(default)]
    pub matrix: Option<MatrixSpec>,
    /// Name of a bundled matrix: `golden`, `central3` or `split5`.
    #[serde(default)]
    pub bundle: Option<String>,
    /// Path to a JSON matrix file, relative to the config file.
    #[serde(default)]
    pub matrix_path: Option<PathBuf>,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Target truncation error for pairings, cumulative functions and cocycle solves.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Tolerance for eigenvalue clustering and chain residuals.
    #[serde(default = "default_spectral_tol")]
    pub spectral_tol: f64,
    /// Depth cap; its meaning depends on the command.
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub staf: Option<StafSpec>,
    #[serde(default)]
    pub chart: Option<ChartSpec>,
    /// Grid points for `cdf`.
    #[serde(default)]
    pub points: Option<usize>,
    /// Random test functions for `pair`.
    #[serde(default)]
    pub functions: Option<usize>,
    /// Decay rate of the random test functions for `pair`.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub map: Option<MapSpec>,
    /// Series terms used for the cocycle cross-check.
    #[serde(default)]
    pub series_terms: Option<usize>,
    /// Bundles covered by the matrix-generic checks of `verify`.
    #[serde(default)]
    pub bundles: Option<Vec<String>>,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub parallel: bool,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<(RunConfig, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!(
                "{}: line {}, column {}: {}",
                path.display(),
                e.line(),
                e.column(),
                e
            ))
        })?;
        if let Some(out) = &overrides.out {
            cfg.out = Some(out.clone());
        }
        if overrides.depth.is_some() {
            cfg.depth = overrides.depth;
        }
        if let Some(tol) = overrides.tol {
            cfg.tol = tol;
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        cfg.parallel |= overrides.parallel;
        cfg.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Config(format!("field `{}`: {}", field, msg)));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be positive");
        }
        if !(self.spectral_tol > 0.0 && self.spectral_tol.is_finite()) {
            return bad("spectral_tol", "must be positive");
        }
        if self.depth == Some(0) {
            return bad("depth", "must be at least 1");
        }
        if self.points.is_some_and(|p| p < 2) {
            return bad("points", "must be at least 2");
        }
        if self.functions == Some(0) {
            return bad("functions", "must be at least 1");
        }
        if self.rho.is_some_and(|r| !(r > 1.0)) {
            return bad("rho", "must exceed 1");
        }
        if self.series_terms == Some(0) {
            return bad("series_terms", "must be at least 1");
        }
        let sources = [self.matrix.is_some(), self.bundle.is_some(), self.matrix_path.is_some()];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return bad("matrix", "give at most one of `matrix`, `bundle`, `matrix_path`");
        }
        match self.command {
            Command::Staf | Command::Variation | Command::Pair if self.staf.is_none() => bad("staf", "required"),
            Command::Cdf | Command::Regularity if self.staf.is_none() => bad("staf", "required"),
            Command::Cocycle if self.map.is_none() => bad("map", "required"),
            _ => Ok(()),
        }
    }
}
