//! Output files of the sweep and scaling stages.
//!
//! CSV files are comma separated with LF line endings and a header row,
//! preceded by one comment line `# schema_version=<v> config_hash=<h>`.
//! Floats are written with 17 significant digits so they round-trip exactly.
//! JSON files carry the same two fields at the top level.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::SweepError;
use crate::fss::{CollapseResult, PeakDivergence};
use crate::observables::ObservableSet;
use crate::sweep::{DerivativePoint, PeakEstimate, SweepRecord};

pub const SCHEMA_VERSION: u32 = 1;

pub const SWEEP_COLUMNS: [&str; 12] = [
    "d",
    "sizes",
    "N",
    "lambda",
    "energy",
    "e_gl",
    "n_tangle",
    "i_local",
    "i_nonlocal",
    "mag_x",
    "mag_z",
    "ghz_fidelity",
];

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn stamp(config_hash: &str) -> String {
    format!("# schema_version={SCHEMA_VERSION} config_hash={config_hash}\n")
}

fn write_csv(path: &Path, config_hash: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), SweepError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| SweepError::io(parent, e))?;
    }
    let mut out = Vec::new();
    out.extend_from_slice(stamp(config_hash).as_bytes());
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        let bad = |e: csv::Error| SweepError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        w.write_record(header).map_err(bad)?;
        for r in rows {
            w.write_record(&r).map_err(bad)?;
        }
        w.flush().map_err(|e| SweepError::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| SweepError::io(path, e))
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), SweepError> {
    let bad = |m: String| SweepError::Format {
        path: path.to_path_buf(),
        message: m,
    };
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => SweepError::io(path, std::io::Error::other(e.to_string())),
            _ => bad(e.to_string()),
        })?;
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| bad(e.to_string()))?;
    Ok((header, rows))
}

/// Read the stamp line of a CSV file.
pub fn read_csv_stamp(path: &Path) -> Result<(u32, String), SweepError> {
    let text = fs::read_to_string(path).map_err(|e| SweepError::io(path, e))?;
    let first = text.lines().next().unwrap_or_default();
    let bad = || SweepError::Format {
        path: path.to_path_buf(),
        message: "missing schema stamp".into(),
    };
    let mut version = None;
    let mut hash = None;
    for tok in first.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("schema_version=") {
            version = v.parse().ok();
        } else if let Some(h) = tok.strip_prefix("config_hash=") {
            hash = Some(h.to_string());
        }
    }
    Ok((version.ok_or_else(bad)?, hash.ok_or_else(bad)?))
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize, SweepError> {
    header.iter().position(|h| h == name).ok_or_else(|| SweepError::Format {
        path: path.to_path_buf(),
        message: format!("missing column {name}"),
    })
}

fn parse_f64(s: &str, path: &Path) -> Result<f64, SweepError> {
    s.parse().map_err(|_| SweepError::Format {
        path: path.to_path_buf(),
        message: format!("not a number: {s:?}"),
    })
}

fn sizes_label(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x")
}

pub fn write_sweep_csv(path: &Path, config_hash: &str, records: &[SweepRecord]) -> Result<(), SweepError> {
    let rows = records.iter().map(|r| {
        let o = &r.observables;
        vec![
            r.dimension.to_string(),
            sizes_label(&r.sizes),
            r.n_sites.to_string(),
            fmt_float(r.lambda),
            fmt_float(o.energy),
            fmt_float(o.e_gl),
            fmt_opt(o.n_tangle),
            fmt_float(o.i_local),
            fmt_float(o.i_nonlocal),
            fmt_float(o.mag_x),
            fmt_float(o.mag_z),
            fmt_float(o.ghz_fidelity),
        ]
    });
    write_csv(path, config_hash, &SWEEP_COLUMNS, rows)
}

/// Rows of `sweep.csv` as `(lambda, observables)`.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<(f64, ObservableSet)>, SweepError> {
    let (header, rows) = read_csv(path)?;
    let idx: Vec<usize> = SWEEP_COLUMNS
        .iter()
        .map(|c| column(&header, c, path))
        .collect::<Result<_, _>>()?;
    rows.iter()
        .map(|row| {
            let f = |k: usize| parse_f64(&row[idx[k]], path);
            let tangle = &row[idx[6]];
            Ok((
                f(3)?,
                ObservableSet {
                    energy: f(4)?,
                    e_gl: f(5)?,
                    n_tangle: if tangle.is_empty() { None } else { Some(parse_f64(tangle, path)?) },
                    i_local: f(7)?,
                    i_nonlocal: f(8)?,
                    mag_x: f(9)?,
                    mag_z: f(10)?,
                    ghz_fidelity: f(11)?,
                },
            ))
        })
        .collect()
}

pub fn write_derivative_csv(path: &Path, config_hash: &str, curve: &[DerivativePoint]) -> Result<(), SweepError> {
    let rows = curve
        .iter()
        .map(|p| vec![fmt_float(p.lambda), fmt_float(p.value), fmt_opt(p.error_estimate)]);
    write_csv(path, config_hash, &["lambda", "dE_dlambda", "error_estimate"], rows)
}

pub fn read_derivative_csv(path: &Path) -> Result<Vec<DerivativePoint>, SweepError> {
    let (header, rows) = read_csv(path)?;
    let l = column(&header, "lambda", path)?;
    let d = column(&header, "dE_dlambda", path)?;
    let e = column(&header, "error_estimate", path)?;
    rows.iter()
        .map(|r| {
            Ok(DerivativePoint {
                lambda: parse_f64(&r[l], path)?,
                value: parse_f64(&r[d], path)?,
                error_estimate: if r[e].is_empty() { None } else { Some(parse_f64(&r[e], path)?) },
            })
        })
        .collect()
}

/// JSON document with the schema stamp flattened alongside the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub schema_version: u32,
    pub config_hash: String,
    #[serde(flatten)]
    pub data: T,
}

pub fn write_json<T: Serialize>(path: &Path, config_hash: &str, data: &T) -> Result<(), SweepError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| SweepError::io(parent, e))?;
    }
    let doc = Stamped {
        schema_version: SCHEMA_VERSION,
        config_hash: config_hash.to_string(),
        data,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| SweepError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Stamped<T>, SweepError> {
    let text = fs::read_to_string(path).map_err(|e| SweepError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| SweepError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_peak_json(path: &Path, config_hash: &str, peak: &PeakEstimate) -> Result<(), SweepError> {
    write_json(path, config_hash, peak)
}

pub fn read_peak_json(path: &Path) -> Result<PeakEstimate, SweepError> {
    Ok(read_json::<PeakEstimate>(path)?.data)
}

pub fn write_collapse_csv(path: &Path, config_hash: &str, collapse: &CollapseResult) -> Result<(), SweepError> {
    let rows = collapse
        .scaled_curves
        .iter()
        .map(|p| vec![fmt_float(p.size), fmt_float(p.x), fmt_float(p.y)]);
    write_csv(path, config_hash, &["size", "x", "y"], rows)
}

pub fn write_collapse_quality_csv(path: &Path, config_hash: &str, collapse: &CollapseResult) -> Result<(), SweepError> {
    let rows = collapse
        .quality_curve
        .iter()
        .map(|(nu, q)| vec![fmt_float(*nu), fmt_float(*q)]);
    write_csv(path, config_hash, &["nu", "quality"], rows)
}

pub fn write_peak_divergence_csv(
    path: &Path,
    config_hash: &str,
    peaks: &[PeakEstimate],
    fit: &PeakDivergence,
) -> Result<(), SweepError> {
    let rows = peaks.iter().map(|p| {
        vec![
            fmt_float(p.size),
            fmt_float(p.size.ln()),
            fmt_float(p.peak_value),
            fmt_float(fit.intercept + fit.slope * p.size.ln()),
        ]
    });
    write_csv(path, config_hash, &["size", "ln_size", "peak_value", "fitted"], rows)
}

/// Generic numeric table, used for figure exports.
pub fn write_table(path: &Path, config_hash: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), SweepError> {
    write_csv(
        path,
        config_hash,
        header,
        rows.iter().map(|r| r.iter().map(|v| fmt_float(*v)).collect()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(lambda: f64, tangle: Option<f64>) -> SweepRecord {
        SweepRecord {
            dimension: 2,
            sizes: vec![2, 2],
            n_sites: 4,
            lambda,
            observables: ObservableSet {
                energy: -4.1,
                e_gl: 0.1 + lambda,
                n_tangle: tangle,
                i_local: 3.5,
                i_nonlocal: 0.5,
                mag_x: 0.0,
                mag_z: 0.94,
                ghz_fidelity: 1.0 / 3.0,
            },
            iterations: 10,
            residual: 1e-12,
            degenerate: false,
        }
    }

    #[test]
    fn sweep_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sweep.csv");
        write_sweep_csv(&p, "abc", &[record(0.5, Some(0.25)), record(0.75, None)]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema_version=1 config_hash=abc"));
        assert_eq!(
            lines.next(),
            Some("d,sizes,N,lambda,energy,e_gl,n_tangle,i_local,i_nonlocal,mag_x,mag_z,ghz_fidelity")
        );
        assert!(lines.next().unwrap().starts_with("2,2x2,4,5.0000000000000000e-1,"));
        assert!(!text.contains('\r'));
        let back = read_sweep_csv(&p).unwrap();
        assert_eq!(back[1].1.n_tangle, None);
        assert_eq!(back[0].1, record(0.5, Some(0.25)).observables);
        assert_eq!(read_csv_stamp(&p).unwrap(), (1, "abc".to_string()));
    }

    #[test]
    fn peak_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("peak.json");
        let peak = PeakEstimate {
            lambda_m: 0.9587,
            peak_value: 1.39,
            size: 16.0,
            refinement_width: 0.005,
        };
        write_peak_json(&p, "h", &peak).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(read_peak_json(&p).unwrap(), peak);
    }

    proptest! {
        #[test]
        fn derivative_csv_round_trips_exactly(
            pts in prop::collection::vec((-1e3f64..1e3, -1e6f64..1e6, prop::option::of(0.0f64..1.0)), 1..20)
        ) {
            let curve: Vec<DerivativePoint> = pts
                .iter()
                .map(|&(l, v, e)| DerivativePoint { lambda: l, value: v, error_estimate: e })
                .collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("d.csv");
            write_derivative_csv(&p, "x", &curve).unwrap();
            prop_assert_eq!(read_derivative_csv(&p).unwrap(), curve);
        }
    }
}
