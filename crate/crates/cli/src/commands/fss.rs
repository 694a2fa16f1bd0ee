use std::path::{Path, PathBuf};

use serde::Serialize;
use tfim_core::fss::{
    collapse_fit, extrapolate_critical_point, peak_divergence_check, CollapseOptions, CollapseResult,
    PeakDivergence, ScalingFit,
};
use tfim_core::io;
use tfim_core::sweep::PeakEstimate;
use tracing::info;

use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::runs::{load_runs, RunData};

pub const FIT_FILE: &str = "scaling_fit.json";
pub const COLLAPSE_FILE: &str = "collapse.csv";
pub const QUALITY_FILE: &str = "collapse_quality.csv";
pub const COLLAPSE_SUMMARY_FILE: &str = "collapse.json";
pub const DIVERGENCE_FILE: &str = "peak_divergence.csv";

#[derive(Debug, Clone, Serialize)]
pub struct CollapseSummary {
    pub nu: f64,
    pub quality: f64,
    pub inconclusive: bool,
    pub interior: bool,
    pub lambda_m_per_size: Vec<(f64, f64)>,
    pub peak_divergence: PeakDivergence,
}

/// Everything the scaling stage derives from a set of runs.
pub struct Scaling {
    pub peaks: Vec<PeakEstimate>,
    pub fit: ScalingFit,
    pub collapse: CollapseResult,
    pub divergence: PeakDivergence,
}

/// Resolve and load the runs of a config section; all must share a dimension.
pub fn load_section_runs(cfg: &LoadedConfig, dirs: &[PathBuf], section: &str) -> Result<Vec<RunData>, CliError> {
    let dirs: Vec<PathBuf> = dirs.iter().map(|d| cfg.resolve(d)).collect();
    if dirs.is_empty() {
        return Err(CliError::Config(format!("{section}.runs: no runs listed")));
    }
    load_runs(&dirs)
}

pub fn analyse(runs: &[RunData], opts: &CollapseOptions) -> Result<Scaling, CliError> {
    let peaks: Vec<PeakEstimate> = runs.iter().map(|r| r.peak).collect();
    let curves: Vec<_> = runs.iter().map(RunData::curve).collect();
    let fit = extrapolate_critical_point(&peaks)?;
    let collapse = collapse_fit(&curves, &peaks, opts)?;
    let divergence = peak_divergence_check(&peaks)?;
    Ok(Scaling {
        peaks,
        fit,
        collapse,
        divergence,
    })
}

pub fn run(cfg: &LoadedConfig) -> Result<(), CliError> {
    let section = cfg
        .config
        .fss
        .as_ref()
        .ok_or_else(|| CliError::Config("fss: section required".into()))?;
    let out = cfg.output_dir()?;
    let runs = load_section_runs(cfg, &section.runs, "fss")?;
    if runs.len() < 3 {
        return Err(CliError::Config(format!(
            "fss.runs: at least 3 completed runs needed, got {}",
            runs.len()
        )));
    }
    if runs.iter().any(|r| r.dimension() != runs[0].dimension()) {
        return Err(CliError::Config("fss.runs: runs mix lattice dimensions".into()));
    }
    let s = analyse(&runs, &section.collapse)?;
    write_outputs(cfg, &out, &s)?;
    info!(out = %out.display(), "scaling analysis written");
    print_summary(&s);
    Ok(())
}

fn write_outputs(cfg: &LoadedConfig, out: &Path, s: &Scaling) -> Result<(), CliError> {
    let h = &cfg.hash;
    io::write_json(&out.join(FIT_FILE), h, &s.fit).map_err(CliError::output)?;
    io::write_collapse_csv(&out.join(COLLAPSE_FILE), h, &s.collapse).map_err(CliError::output)?;
    io::write_collapse_quality_csv(&out.join(QUALITY_FILE), h, &s.collapse).map_err(CliError::output)?;
    io::write_peak_divergence_csv(&out.join(DIVERGENCE_FILE), h, &s.peaks, &s.divergence)
        .map_err(CliError::output)?;
    let summary = CollapseSummary {
        nu: s.collapse.nu,
        quality: s.collapse.quality,
        inconclusive: s.collapse.inconclusive,
        interior: s.collapse.interior,
        lambda_m_per_size: s.collapse.lambda_m_per_size.clone(),
        peak_divergence: s.divergence.clone(),
    };
    io::write_json(&out.join(COLLAPSE_SUMMARY_FILE), h, &summary).map_err(CliError::output)
}

fn print_summary(s: &Scaling) {
    println!("{:>6} {:>10} {:>10}", "size", "lambda_m", "peak");
    for p in &s.peaks {
        println!("{:>6} {:>10.5} {:>10.5}", p.size, p.lambda_m, p.peak_value);
    }
    let f = &s.fit;
    let side = serde_json::to_value(f.side).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    println!();
    println!("{:<10} {:>10}", "quantity", "value");
    println!("{:<10} {:>10.3}", "lambda_c", f.lambda_c);
    println!("{:<10} {:>10.3}", "alpha", f.alpha);
    println!("{:<10} {:>10.3}", "c", f.c);
    println!("{:<10} {:>10}", "side", side);
    println!("{:<10} {:>10.3}", "nu", s.collapse.nu);
    println!("{:<10} {:>10.4}", "ln_r2", s.divergence.r_squared);
    for w in &f.warnings {
        println!("warning: {w}");
    }
    if s.collapse.inconclusive {
        println!("warning: collapse quality is flat in nu; nu is inconclusive");
    }
}
