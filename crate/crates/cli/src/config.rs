//! Run configuration files.
//!
//! One JSON document describes a lattice sweep and, optionally, the inputs of
//! the scaling, verification and export commands. Unknown keys are rejected
//! and relative paths are taken relative to the directory of the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tfim_core::fss::CollapseOptions;
use tfim_core::io::SCHEMA_VERSION;
use tfim_core::sweep::{LambdaGrid, RefineSettings};
use tfim_core::{BondConvention, Boundary, LatticeSpec, SolverSettings};

use crate::error::CliError;

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "TFIM_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default = "periodic")]
    pub boundary: Boundary,
    #[serde(default = "unique_pairs")]
    pub bond_convention: BondConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub refine: RefineSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Write every ground-state vector here as a binary state file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fss: Option<FssSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportSection>,
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

fn unique_pairs() -> BondConvention {
    BondConvention::UniquePairs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FssSection {
    /// Output directories of completed sweeps.
    pub runs: Vec<PathBuf>,
    #[serde(default)]
    pub collapse: CollapseOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Largest chain checked against dense diagonalization.
    pub max_n: usize,
    /// Solver tolerance and residual threshold.
    pub tol: f64,
    pub lambdas: Vec<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            max_n: 12,
            tol: 1e-10,
            lambdas: vec![0.1, 0.5, 1.0, 2.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSection {
    pub runs: Vec<PathBuf>,
    #[serde(default)]
    pub collapse: CollapseOptions,
    /// Chain length used for the genuine-entanglement figure.
    #[serde(default = "fig8_chain")]
    pub fig8_chain: usize,
    /// Square side used for the genuine-entanglement figure.
    #[serde(default = "fig8_square")]
    pub fig8_square: usize,
}

fn fig8_chain() -> usize {
    16
}

fn fig8_square() -> usize {
    4
}

/// A parsed configuration together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    /// Digest of the parsed configuration, stamped on every output.
    pub hash: String,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {}",
            config.schema_version
        )));
    }
    let canonical = serde_json::to_vec(&config).expect("config serializes");
    let hash = hex::encode(&Sha256::digest(&canonical)[..8]);
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(LoadedConfig {
        config,
        base_dir,
        hash,
    })
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> Result<PathBuf, CliError> {
        self.config
            .output_dir
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| CliError::Config("output_dir: required".into()))
    }

    /// Cache directory by precedence: flag, then environment, then config.
    pub fn cache_dir(&self, overrides: &Overrides) -> Option<PathBuf> {
        if let Some(p) = &overrides.cache_dir {
            return Some(p.clone());
        }
        if let Some(p) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return Some(PathBuf::from(p));
        }
        self.config.cache_dir.as_deref().map(|p| self.resolve(p))
    }

    pub fn workers(&self, overrides: &Overrides) -> Result<usize, CliError> {
        let w = overrides
            .workers
            .or(self.config.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if w == 0 {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        Ok(w)
    }

    pub fn lattice(&self) -> Result<LatticeSpec, CliError> {
        let c = &self.config;
        let sizes = c
            .sizes
            .clone()
            .ok_or_else(|| CliError::Config("sizes: required".into()))?;
        let d = c.dimension.unwrap_or(sizes.len());
        let sizes = match sizes.len() {
            1 if d > 1 => vec![sizes[0]; d],
            n if n == d => sizes,
            n => {
                return Err(CliError::Config(format!(
                    "sizes: {n} extents given for dimension {d}"
                )))
            }
        };
        let mut spec = LatticeSpec::new(sizes, c.boundary, c.bond_convention);
        if let Some(m) = c.max_sites {
            spec = spec.with_max_sites(m);
        }
        spec.validate()
            .map_err(|e| CliError::Config(format!("lattice: {e}")))?;
        Ok(spec)
    }

    pub fn grid(&self, dimension: usize) -> Result<Vec<f64>, CliError> {
        let grid = self
            .config
            .lambda_grid
            .clone()
            .unwrap_or_else(|| LambdaGrid::default_for(dimension));
        grid.points().map_err(|e| CliError::Config(e.to_string()))
    }
}
