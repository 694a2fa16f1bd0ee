use std::path::Path;

use tfim_core::io;
use tfim_core::sweep::{run_analysis, run_sweep, PeakEstimate, SweepCache, SweepPlan, SweepRecord, MIN_DERIVATIVE_POINTS};
use tracing::{info, warn};

use crate::config::{LoadedConfig, Overrides};
use crate::error::CliError;
use crate::runs::{RunInfo, DERIVATIVE_FILE, PEAK_FILE, RUN_FILE, SWEEP_FILE};

/// Partial results of a failed sweep go here instead of `sweep.csv`.
pub const PARTIAL_FILE: &str = "sweep.partial.csv";

pub fn run(cfg: &LoadedConfig, overrides: &Overrides) -> Result<(), CliError> {
    let lattice = cfg.lattice()?;
    let grid = cfg.grid(lattice.dimension())?;
    let out = cfg.output_dir()?;
    let solver = cfg.config.solver.clone();
    solver
        .validate()
        .map_err(|e| CliError::Config(format!("solver: {e}")))?;

    let n = lattice.n_sites();
    let per_solve = 4u64 * 8 * (1u64 << n);
    if per_solve > solver.memory_budget {
        return Err(CliError::Resource(format!(
            "{n} sites need {per_solve} bytes per solve, memory_budget is {}",
            solver.memory_budget
        )));
    }

    let mut plan = SweepPlan::new(lattice.clone(), grid, solver);
    plan.workers = cfg.workers(overrides)?;
    plan.state_dir = cfg.config.state_dir.as_deref().map(|p| cfg.resolve(p));
    plan.validate()?;
    let cache = cfg.cache_dir(overrides).map(SweepCache::new);
    info!(
        lattice = %lattice.label(),
        points = plan.grid.len(),
        workers = plan.concurrency(),
        cache = %cache.as_ref().map_or_else(|| "none".to_string(), |c| c.dir().display().to_string()),
        "sweep starting"
    );

    if plan.grid.len() < MIN_DERIVATIVE_POINTS {
        // too short to differentiate: observables only
        let outcome = run_sweep(&plan, cache.as_ref())?;
        if outcome.failure.is_some() {
            write_partial(cfg, &out, &outcome.records)?;
        }
        let outcome = outcome.into_result()?;
        for stale in [PARTIAL_FILE, DERIVATIVE_FILE, PEAK_FILE] {
            let _ = std::fs::remove_file(out.join(stale));
        }
        write_run_info(cfg, &out, &plan, outcome.records.len())?;
        io::write_sweep_csv(&out.join(SWEEP_FILE), &cfg.hash, &outcome.records).map_err(CliError::output)?;
        info!(points = plan.grid.len(), "grid too short for a derivative; wrote observables only");
        print_summary(&lattice.label(), &outcome.records, outcome.new_solves, None);
        return Ok(());
    }

    let analysis = match run_analysis(&plan, cache.as_ref(), &cfg.config.refine) {
        Ok(a) => a,
        Err(partial) => {
            write_partial(cfg, &out, &partial.records)?;
            return Err(partial.error.into());
        }
    };
    let _ = std::fs::remove_file(out.join(PARTIAL_FILE));

    write_run_info(cfg, &out, &plan, analysis.records.len())?;
    io::write_sweep_csv(&out.join(SWEEP_FILE), &cfg.hash, &analysis.records).map_err(CliError::output)?;
    io::write_derivative_csv(&out.join(DERIVATIVE_FILE), &cfg.hash, &analysis.derivative)
        .map_err(CliError::output)?;
    io::write_peak_json(&out.join(PEAK_FILE), &cfg.hash, &analysis.peak).map_err(CliError::output)?;
    info!(new_solves = analysis.new_solves, out = %out.display(), "sweep written");

    print_summary(&lattice.label(), &analysis.records, analysis.new_solves, Some(&analysis.peak));
    Ok(())
}

fn write_partial(cfg: &LoadedConfig, out: &Path, records: &[SweepRecord]) -> Result<(), CliError> {
    if records.is_empty() {
        return Ok(());
    }
    let path = out.join(PARTIAL_FILE);
    warn!(path = %path.display(), records = records.len(), "writing partial results");
    io::write_sweep_csv(&path, &cfg.hash, records).map_err(CliError::output)
}

fn write_run_info(cfg: &LoadedConfig, out: &Path, plan: &SweepPlan, points: usize) -> Result<(), CliError> {
    let info = RunInfo {
        lattice: plan.lattice.clone(),
        n_sites: plan.lattice.n_sites(),
        scaling_size: plan.lattice.scaling_size(),
        solver: plan.solver.clone(),
        grid_points: points,
    };
    io::write_json(&out.join(RUN_FILE), &cfg.hash, &info).map_err(CliError::output)
}

fn print_summary(label: &str, records: &[SweepRecord], new_solves: usize, peak: Option<&PeakEstimate>) {
    let max_egl = records.iter().map(|r| r.observables.e_gl).fold(0.0, f64::max);
    let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.5}"));
    println!("{:<10} {:>7} {:>7} {:>10} {:>10} {:>10}", "lattice", "points", "new", "lambda_m", "peak", "max_e_gl");
    println!(
        "{:<10} {:>7} {:>7} {:>10} {:>10} {:>10.5}",
        label,
        records.len(),
        new_solves,
        cell(peak.map(|p| p.lambda_m)),
        cell(peak.map(|p| p.peak_value)),
        max_egl
    );
}
