//! Plot-ready tables for each figure.
//!
//! | file            | content                                           |
//! |-----------------|---------------------------------------------------|
//! | `fig1.csv`      | chains: E_gl and dE_gl/dλ against λ per size      |
//! | `fig2.csv`      | chains: λ_m against 1/N, with the fitted curve    |
//! | `fig3.csv`      | chains: collapsed derivative curves               |
//! | `fig3_inset.csv`| chains: peak height against ln N                  |
//! | `fig4.csv`..`fig6*.csv` | the same for square lattices, against L    |
//! | `fig7.csv`      | cubes: E_gl and dE_gl/dλ against λ                |
//! | `fig8.csv`      | E_gl and n-tangle against 1/λ                     |

use std::path::Path;

use tfim_core::io;
use tracing::{info, warn};

use crate::commands::fss::{analyse, load_section_runs};
use crate::config::{ExportSection, LoadedConfig};
use crate::error::CliError;
use crate::runs::RunData;

const FIT_SAMPLES: usize = 101;

pub fn run(cfg: &LoadedConfig) -> Result<(), CliError> {
    let section = cfg
        .config
        .export
        .as_ref()
        .ok_or_else(|| CliError::Config("export: section required".into()))?;
    let out = cfg.output_dir()?;
    let runs = load_section_runs(cfg, &section.runs, "export")?;
    let mut written = Vec::new();

    for (d, curve_fig, fit_fig, collapse_fig) in [(1, "fig1", "fig2", "fig3"), (2, "fig4", "fig5", "fig6")] {
        let group: Vec<RunData> = runs.iter().filter(|r| r.dimension() == d).cloned().collect();
        if group.is_empty() {
            continue;
        }
        write_curves(cfg, &out, curve_fig, &group, &mut written)?;
        if group.len() < 3 {
            warn!(dimension = d, sizes = group.len(), "fewer than 3 sizes, skipping scaling figures");
            continue;
        }
        write_scaling(cfg, &out, section, &group, fit_fig, collapse_fig, &mut written)?;
    }
    let cubes: Vec<RunData> = runs.iter().filter(|r| r.dimension() == 3).cloned().collect();
    if !cubes.is_empty() {
        write_curves(cfg, &out, "fig7", &cubes, &mut written)?;
    }
    write_fig8(cfg, &out, section, &runs, &mut written)?;

    println!("{:<18} {:>6}", "file", "rows");
    for (name, rows) in &written {
        println!("{name:<18} {rows:>6}");
    }
    info!(files = written.len(), out = %out.display(), "export finished");
    Ok(())
}

fn table(
    cfg: &LoadedConfig,
    out: &Path,
    name: &str,
    header: &[&str],
    rows: Vec<Vec<f64>>,
    written: &mut Vec<(String, usize)>,
) -> Result<(), CliError> {
    let file = format!("{name}.csv");
    io::write_table(&out.join(&file), &cfg.hash, header, &rows).map_err(CliError::output)?;
    written.push((file, rows.len()));
    Ok(())
}

fn write_curves(
    cfg: &LoadedConfig,
    out: &Path,
    name: &str,
    runs: &[RunData],
    written: &mut Vec<(String, usize)>,
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for r in runs {
        if r.records.len() != r.derivative.len() {
            return Err(CliError::MissingInput {
                path: r.dir.clone(),
                message: "sweep.csv and derivative.csv have different grids".into(),
            });
        }
        for ((lambda, obs), dp) in r.records.iter().zip(&r.derivative) {
            rows.push(vec![r.size(), *lambda, obs.e_gl, dp.value]);
        }
    }
    table(cfg, out, name, &["size", "lambda", "e_gl", "de_gl_dlambda"], rows, written)
}

fn write_scaling(
    cfg: &LoadedConfig,
    out: &Path,
    section: &ExportSection,
    runs: &[RunData],
    fit_fig: &str,
    collapse_fig: &str,
    written: &mut Vec<(String, usize)>,
) -> Result<(), CliError> {
    let s = analyse(runs, &section.collapse)?;
    let f = &s.fit;
    let model = |size: f64| f.lambda_c + f.c * size.powf(-f.alpha);
    let rows = s
        .peaks
        .iter()
        .map(|p| vec![p.size, 1.0 / p.size, p.lambda_m, model(p.size)])
        .collect();
    table(cfg, out, fit_fig, &["size", "inv_size", "lambda_m", "fitted"], rows, written)?;

    // the fitted curve from the smallest size out to 1/S = 0
    let smallest = s.peaks.iter().map(|p| p.size).fold(f64::INFINITY, f64::min);
    let rows = (0..FIT_SAMPLES)
        .map(|i| {
            let inv = i as f64 / (FIT_SAMPLES - 1) as f64 / smallest;
            let y = if inv == 0.0 { f.lambda_c } else { model(1.0 / inv) };
            vec![inv, y]
        })
        .collect();
    table(cfg, out, &format!("{fit_fig}_fit"), &["inv_size", "fitted"], rows, written)?;

    let rows = s
        .collapse
        .scaled_curves
        .iter()
        .map(|p| vec![p.size, p.x, p.y])
        .collect();
    table(cfg, out, collapse_fig, &["size", "x", "y"], rows, written)?;

    let d = &s.divergence;
    let rows = s
        .peaks
        .iter()
        .map(|p| vec![p.size, p.size.ln(), p.peak_value, d.intercept + d.slope * p.size.ln()])
        .collect();
    table(
        cfg,
        out,
        &format!("{collapse_fig}_inset"),
        &["size", "ln_size", "peak_value", "fitted"],
        rows,
        written,
    )
}

fn write_fig8(
    cfg: &LoadedConfig,
    out: &Path,
    section: &ExportSection,
    runs: &[RunData],
    written: &mut Vec<(String, usize)>,
) -> Result<(), CliError> {
    let wanted = [(1, section.fig8_chain), (2, section.fig8_square)];
    let mut rows = Vec::new();
    for (d, size) in wanted {
        let Some(run) = runs
            .iter()
            .find(|r| r.dimension() == d && r.info.scaling_size == size)
        else {
            continue;
        };
        let mut points: Vec<Vec<f64>> = run
            .records
            .iter()
            .filter(|(lambda, _)| *lambda > 0.0)
            .filter_map(|(lambda, o)| o.n_tangle.map(|t| vec![d as f64, size as f64, 1.0 / lambda, o.e_gl, t]))
            .collect();
        if points.is_empty() {
            warn!(dimension = d, size, "no n-tangle values (odd site count?), skipping");
            continue;
        }
        points.sort_by(|a, b| a[2].total_cmp(&b[2]));
        rows.extend(points);
    }
    if rows.is_empty() {
        warn!("no run matches the fig8 sizes, skipping fig8");
        return Ok(());
    }
    table(cfg, out, "fig8", &["d", "size", "inv_lambda", "e_gl", "n_tangle"], rows, written)
}
