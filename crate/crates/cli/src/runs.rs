//! Completed sweep directories: `run.json`, `sweep.csv`, `derivative.csv`
//! and `peak.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tfim_core::fss::SizedCurve;
use tfim_core::io;
use tfim_core::sweep::{DerivativePoint, PeakEstimate};
use tfim_core::{LatticeSpec, ObservableSet, SolverSettings};

use crate::error::CliError;

pub const RUN_FILE: &str = "run.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const DERIVATIVE_FILE: &str = "derivative.csv";
pub const PEAK_FILE: &str = "peak.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub lattice: LatticeSpec,
    pub n_sites: usize,
    pub scaling_size: usize,
    pub solver: SolverSettings,
    pub grid_points: usize,
}

#[derive(Debug, Clone)]
pub struct RunData {
    pub dir: PathBuf,
    pub info: RunInfo,
    pub records: Vec<(f64, ObservableSet)>,
    pub derivative: Vec<DerivativePoint>,
    pub peak: PeakEstimate,
}

impl RunData {
    pub fn dimension(&self) -> usize {
        self.info.lattice.dimension()
    }

    pub fn size(&self) -> f64 {
        self.info.scaling_size as f64
    }

    pub fn curve(&self) -> SizedCurve {
        SizedCurve {
            size: self.size(),
            points: self.derivative.clone(),
        }
    }
}

pub fn load_run(dir: &Path) -> Result<RunData, CliError> {
    if !dir.is_dir() {
        return Err(CliError::MissingInput {
            path: dir.to_path_buf(),
            message: "run directory does not exist".into(),
        });
    }
    let info = io::read_json::<RunInfo>(&dir.join(RUN_FILE)).map_err(CliError::input)?.data;
    let records = io::read_sweep_csv(&dir.join(SWEEP_FILE)).map_err(CliError::input)?;
    let derivative = io::read_derivative_csv(&dir.join(DERIVATIVE_FILE)).map_err(CliError::input)?;
    let peak = io::read_peak_json(&dir.join(PEAK_FILE)).map_err(CliError::input)?;
    Ok(RunData {
        dir: dir.to_path_buf(),
        info,
        records,
        derivative,
        peak,
    })
}

/// Load several runs, sorted by scaling size.
pub fn load_runs(dirs: &[PathBuf]) -> Result<Vec<RunData>, CliError> {
    let mut runs = dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>, _>>()?;
    runs.sort_by(|a, b| {
        (a.dimension(), a.info.scaling_size).cmp(&(b.dimension(), b.info.scaling_size))
    });
    Ok(runs)
}
