//! λ sweeps: solve the ground state on a grid of couplings, differentiate
//! the global entanglement numerically and locate the derivative peak λ_m.
//!
//! Finished records are cached one file per (lattice, λ, solver settings),
//! so repeating a plan performs no new solves.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::{info, warn};

use crate::eigensolver::{lanczos_ground_state, SolverSettings};
use crate::error::{SolverError, SweepError};
use crate::hamiltonian::HamiltonianOperator;
use crate::lattice::{build_lattice, Boundary, LatticeSpec};
use crate::observables::{compute_observables, ObservableSet};
use crate::statefile;

/// Minimum grid length for numerical differentiation.
pub const MIN_DERIVATIVE_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Range { start: f64, stop: f64, step: f64 },
    Explicit(Vec<f64>),
}

impl LambdaGrid {
    /// Default coarse grid for a lattice dimension.
    pub fn default_for(dimension: usize) -> Self {
        let (stop, step) = match dimension {
            1 => (2.0, 0.02),
            2 => (1.0, 0.01),
            _ => (0.8, 0.01),
        };
        LambdaGrid::Range {
            start: 0.0,
            stop,
            step,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>, SweepError> {
        match self {
            LambdaGrid::Range { start, stop, step } => {
                if !(*step > 0.0) || !step.is_finite() {
                    return Err(SweepError::Plan(format!("lambda_grid.step must be positive, got {step}")));
                }
                if !(start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(SweepError::Plan(format!(
                        "lambda_grid needs finite start <= stop, got [{start}, {stop}]"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..n).map(|i| round_grid(start + i as f64 * step)).collect())
            }
            LambdaGrid::Explicit(v) => Ok(v.clone()),
        }
    }
}

/// Snap to 12 decimals so grids built from different steps share points.
fn round_grid(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub lattice: LatticeSpec,
    pub grid: Vec<f64>,
    pub solver: SolverSettings,
    /// Upper bound on concurrent solves.
    pub workers: usize,
    /// Where ground-state vectors are written, if anywhere.
    pub state_dir: Option<PathBuf>,
}

impl SweepPlan {
    pub fn new(lattice: LatticeSpec, grid: Vec<f64>, solver: SolverSettings) -> Self {
        SweepPlan {
            lattice,
            grid,
            solver,
            workers: 1,
            state_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.lattice.validate()?;
        self.solver
            .validate()
            .map_err(|e| SweepError::Plan(e.to_string()))?;
        if self.grid.is_empty() {
            return Err(SweepError::Plan("lambda grid is empty".into()));
        }
        if let Some(x) = self.grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(SweepError::Plan(format!("lambda values must be finite and >= 0, got {x}")));
        }
        for w in self.grid.windows(2) {
            if w[1] == w[0] {
                return Err(SweepError::DuplicateLambda(w[0]));
            }
            if w[1] < w[0] {
                return Err(SweepError::Plan("lambda grid must be strictly increasing".into()));
            }
        }
        if self.workers == 0 {
            return Err(SweepError::Plan("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Concurrent solves allowed by the memory budget: four vectors per solve.
    pub fn concurrency(&self) -> usize {
        let per_solve = 4u64 * 8 * (1u64 << self.lattice.n_sites());
        let by_memory = self.solver.memory_budget.div_ceil(per_solve).max(1) as usize;
        self.workers.min(by_memory).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub dimension: usize,
    pub sizes: Vec<usize>,
    pub n_sites: usize,
    pub lambda: f64,
    #[serde(flatten)]
    pub observables: ObservableSet,
    pub iterations: usize,
    pub residual: f64,
    pub degenerate: bool,
}

#[derive(Debug)]
pub struct SweepFailure {
    pub lambda: f64,
    pub error: SolverError,
}

#[derive(Debug)]
pub struct SweepOutcome {
    /// Completed records, sorted by λ.
    pub records: Vec<SweepRecord>,
    pub new_solves: usize,
    pub cache_hits: usize,
    pub failure: Option<SweepFailure>,
}

impl SweepOutcome {
    pub fn into_result(self) -> Result<SweepOutcome, SweepError> {
        match self.failure {
            Some(SweepFailure { lambda, error }) => Err(SweepError::Solver { lambda, source: error }),
            None => Ok(self),
        }
    }
}

/// On-disk cache of finished records.
#[derive(Debug, Clone)]
pub struct SweepCache {
    dir: PathBuf,
}

impl SweepCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SweepCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(lattice: &LatticeSpec, lambda: f64, solver: &SolverSettings) -> String {
        let mut h = Sha256::new();
        h.update(lattice.hash_hex());
        h.update(lambda.to_bits().to_le_bytes());
        h.update(solver.tol.to_bits().to_le_bytes());
        h.update((solver.max_iter as u64).to_le_bytes());
        h.update(solver.seed.to_le_bytes());
        h.update(solver.sector.name());
        hex::encode(&h.finalize()[..12])
    }

    fn path(&self, lattice: &LatticeSpec, lambda: f64, solver: &SolverSettings) -> PathBuf {
        self.dir
            .join(lattice.hash_hex())
            .join(format!("{}.json", Self::key(lattice, lambda, solver)))
    }

    pub fn load(&self, lattice: &LatticeSpec, lambda: f64, solver: &SolverSettings) -> Option<SweepRecord> {
        let text = fs::read_to_string(self.path(lattice, lambda, solver)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store(&self, lattice: &LatticeSpec, solver: &SolverSettings, record: &SweepRecord) -> Result<(), SweepError> {
        let path = self.path(lattice, record.lambda, solver);
        let parent = path.parent().expect("cache path has a parent");
        fs::create_dir_all(parent).map_err(|e| SweepError::io(parent, e))?;
        // write-then-rename so readers only ever see complete records
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string(record).expect("record serializes");
        fs::write(&tmp, text).map_err(|e| SweepError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| SweepError::io(&path, e))?;
        Ok(())
    }
}

fn solve_point(plan: &SweepPlan, edges: &[crate::lattice::Edge], lambda: f64) -> Result<SweepRecord, SweepError> {
    let n = plan.lattice.n_sites();
    let h = HamiltonianOperator::new(n, edges.to_vec(), lambda).map_err(|e| SweepError::Solver {
        lambda,
        source: e.into(),
    })?;
    let gs = lanczos_ground_state(&h, &plan.solver).map_err(|source| SweepError::Solver { lambda, source })?;
    let periodic = plan.lattice.boundary == Boundary::Periodic;
    let observables = compute_observables(&gs.vector, gs.energy, periodic)?;
    if let Some(dir) = &plan.state_dir {
        let path = dir.join(format!("{}_{:.6}.tfimstate", plan.lattice.hash_hex(), lambda));
        statefile::write_state(&path, &plan.lattice, lambda, &gs.vector)?;
    }
    Ok(SweepRecord {
        dimension: plan.lattice.dimension(),
        sizes: plan.lattice.sizes.clone(),
        n_sites: n,
        lambda,
        observables,
        iterations: gs.iterations,
        residual: gs.residual,
        degenerate: gs.degenerate,
    })
}

/// Solve every grid point not already cached.
///
/// A solver failure stops scheduling further points; records finished so
/// far are returned (and cached) together with the failure.
pub fn run_sweep(plan: &SweepPlan, cache: Option<&SweepCache>) -> Result<SweepOutcome, SweepError> {
    plan.validate()?;
    let edges = build_lattice(&plan.lattice)?;
    let mut records = Vec::with_capacity(plan.grid.len());
    let mut todo = Vec::new();
    for &lambda in &plan.grid {
        match cache.and_then(|c| c.load(&plan.lattice, lambda, &plan.solver)) {
            Some(r) => records.push(r),
            None => todo.push(lambda),
        }
    }
    let cache_hits = records.len();
    if todo.is_empty() {
        info!(lattice = %plan.lattice.label(), hits = cache_hits, "cache hit, no new solves");
    }

    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<SweepFailure>> = Mutex::new(None);
    let solved: Mutex<Vec<SweepRecord>> = Mutex::new(Vec::new());
    let io_error: Mutex<Option<SweepError>> = Mutex::new(None);

    let work = |lambda: f64| {
        if abort.load(Ordering::SeqCst) {
            return;
        }
        match solve_point(plan, &edges, lambda) {
            Ok(rec) => {
                if let Some(c) = cache {
                    if let Err(e) = c.store(&plan.lattice, &plan.solver, &rec) {
                        abort.store(true, Ordering::SeqCst);
                        io_error.lock().unwrap().get_or_insert(e);
                    }
                }
                solved.lock().unwrap().push(rec);
            }
            Err(SweepError::Solver { lambda, source }) => {
                warn!(lambda, error = %source, "solver failure, aborting sweep");
                abort.store(true, Ordering::SeqCst);
                let mut f = failure.lock().unwrap();
                if f.as_ref().is_none_or(|old| lambda < old.lambda) {
                    *f = Some(SweepFailure { lambda, error: source });
                }
            }
            Err(other) => {
                abort.store(true, Ordering::SeqCst);
                io_error.lock().unwrap().get_or_insert(other);
            }
        }
    };
    run_points(&todo, plan.concurrency(), work);

    if let Some(e) = io_error.into_inner().unwrap() {
        return Err(e);
    }
    let solved = solved.into_inner().unwrap();
    let new_solves = solved.len();
    records.extend(solved);
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    info!(lattice = %plan.lattice.label(), new_solves, cache_hits, "sweep finished");
    Ok(SweepOutcome {
        records,
        new_solves,
        cache_hits,
        failure: failure.into_inner().unwrap(),
    })
}

#[cfg(feature = "parallel")]
fn run_points<F: Fn(f64) + Sync + Send>(points: &[f64], workers: usize, work: F) {
    use rayon::prelude::*;
    if workers <= 1 || points.len() <= 1 {
        points.iter().for_each(|&l| work(l));
        return;
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| points.par_iter().for_each(|&l| work(l))),
        Err(_) => points.iter().for_each(|&l| work(l)),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_points<F: Fn(f64)>(points: &[f64], _workers: usize, work: F) {
    points.iter().for_each(|&l| work(l));
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativePoint {
    pub lambda: f64,
    pub value: f64,
    /// Richardson estimate `|D_h - D_2h| / 3` where the doubled stencil fits.
    pub error_estimate: Option<f64>,
}

/// Weights of the derivative at `at` of the quadratic through three nodes.
fn three_point_weights(x: [f64; 3], at: f64) -> [f64; 3] {
    let mut w = [0.0; 3];
    for i in 0..3 {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        w[i] = ((at - x[j]) + (at - x[k])) / ((x[i] - x[j]) * (x[i] - x[k]));
    }
    w
}

fn stencil_derivative(x: &[f64], y: &[f64], idx: [usize; 3], at: f64) -> f64 {
    let w = three_point_weights([x[idx[0]], x[idx[1]], x[idx[2]]], at);
    w[0] * y[idx[0]] + w[1] * y[idx[1]] + w[2] * y[idx[2]]
}

/// Second-order finite differences of `values` with respect to `lambdas`:
/// centred on the interior, one-sided at the ends, with general weights for
/// non-uniform grids.
pub fn derivative(lambdas: &[f64], values: &[f64]) -> Result<Vec<DerivativePoint>, SweepError> {
    let n = lambdas.len();
    if n != values.len() {
        return Err(SweepError::Plan("lambda and value columns differ in length".into()));
    }
    if n < MIN_DERIVATIVE_POINTS {
        return Err(SweepError::TooFewPoints {
            needed: MIN_DERIVATIVE_POINTS,
            got: n,
        });
    }
    for w in lambdas.windows(2) {
        if w[1] == w[0] {
            return Err(SweepError::DuplicateLambda(w[0]));
        }
        if w[1] < w[0] {
            return Err(SweepError::Plan("lambda values must be strictly increasing".into()));
        }
    }
    let x = lambdas;
    let y = values;
    Ok((0..n)
        .map(|i| {
            let idx = if i == 0 {
                [0, 1, 2]
            } else if i == n - 1 {
                [n - 3, n - 2, n - 1]
            } else {
                [i - 1, i, i + 1]
            };
            let value = stencil_derivative(x, y, idx, x[i]);
            let error_estimate = (i >= 2 && i + 2 < n).then(|| {
                let coarse = stencil_derivative(x, y, [i - 2, i, i + 2], x[i]);
                (value - coarse).abs() / 3.0
            });
            DerivativePoint {
                lambda: x[i],
                value,
                error_estimate,
            }
        })
        .collect())
}

/// `dE_gl/dλ` of a sweep.
pub fn derivative_of_records(records: &[SweepRecord]) -> Result<Vec<DerivativePoint>, SweepError> {
    let l: Vec<f64> = records.iter().map(|r| r.lambda).collect();
    let e: Vec<f64> = records.iter().map(|r| r.observables.e_gl).collect();
    derivative(&l, &e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub lambda_m: f64,
    pub peak_value: f64,
    /// Scaling size: N for chains, L for square and cubic lattices.
    pub size: f64,
    pub refinement_width: f64,
}

/// Vertex of the least-squares parabola through the five grid points around
/// the largest derivative value.
pub fn locate_peak(curve: &[DerivativePoint], size: f64) -> Result<PeakEstimate, SweepError> {
    let n = curve.len();
    if n < 5 {
        return Err(SweepError::TooFewPoints { needed: 5, got: n });
    }
    let k = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(i, _)| i)
        .expect("non-empty curve");
    if k == 0 {
        return Err(SweepError::PeakAtBoundary("lower"));
    }
    if k == n - 1 {
        return Err(SweepError::PeakAtBoundary("upper"));
    }
    let lo = k.saturating_sub(2).min(n - 5);
    let window = &curve[lo..lo + 5];
    let x0 = curve[k].lambda;
    let (a, b, c) = quadratic_fit(window.iter().map(|p| (p.lambda - x0, p.value)));
    if !(a < 0.0) {
        return Err(SweepError::Plateau(a));
    }
    let t = -b / (2.0 * a);
    let lambda_m = x0 + t;
    let peak_value = c + b * t + a * t * t;
    if lambda_m < curve[0].lambda || lambda_m > curve[n - 1].lambda {
        return Err(SweepError::PeakAtBoundary(if lambda_m < curve[0].lambda { "lower" } else { "upper" }));
    }
    if !(peak_value > 0.0) {
        return Err(SweepError::Plateau(a));
    }
    Ok(PeakEstimate {
        lambda_m,
        peak_value,
        size,
        refinement_width: 0.5 * (curve[k + 1].lambda - curve[k - 1].lambda),
    })
}

/// Least-squares `y = a t² + b t + c`.
fn quadratic_fit(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64) {
    let mut s = [0.0f64; 5];
    let mut r = [0.0f64; 3];
    for (t, y) in points {
        let mut p = 1.0;
        for (i, si) in s.iter_mut().enumerate() {
            *si += p;
            if i < 3 {
                r[i] += p * y;
            }
            p *= t;
        }
    }
    // normal equations in the basis (1, t, t²)
    let m = nalgebra::Matrix3::new(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
    let sol = m
        .lu()
        .solve(&nalgebra::Vector3::new(r[0], r[1], r[2]))
        .unwrap_or_else(nalgebra::Vector3::zeros);
    (sol[2], sol[1], sol[0])
}

/// Dense window added around a coarse peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefineSettings {
    pub enabled: bool,
    /// Half-width of the window, in coarse steps.
    pub window_steps: usize,
    /// Coarse step divided by this gives the fine step.
    pub factor: usize,
}

impl Default for RefineSettings {
    fn default() -> Self {
        RefineSettings {
            enabled: true,
            window_steps: 10,
            factor: 4,
        }
    }
}

#[derive(Debug)]
pub struct SweepAnalysis {
    pub records: Vec<SweepRecord>,
    pub derivative: Vec<DerivativePoint>,
    pub peak: PeakEstimate,
    pub new_solves: usize,
}

/// Grid with the coarse points inside `[center ± half]` replaced by a fine grid.
pub fn refined_grid(coarse: &[f64], center: f64, step: f64, settings: &RefineSettings) -> Vec<f64> {
    let half = settings.window_steps as f64 * step;
    let fine_step = step / settings.factor as f64;
    let lo = (center - half).max(coarse[0]);
    let hi = (center + half).min(coarse[coarse.len() - 1]);
    // fine points are aligned to multiples of the fine step
    let first = (lo / fine_step).ceil() as i64;
    let last = (hi / fine_step).floor() as i64;
    let mut grid: Vec<f64> = coarse.iter().copied().filter(|&x| x < lo || x > hi).collect();
    grid.extend((first..=last).map(|i| round_grid(i as f64 * fine_step)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Coarse sweep, peak search, then an optional dense window around the peak.
/// A sweep that stopped early, with the records finished before the error.
#[derive(Debug)]
pub struct PartialSweep {
    pub records: Vec<SweepRecord>,
    pub error: SweepError,
}

impl From<SweepError> for PartialSweep {
    fn from(error: SweepError) -> Self {
        PartialSweep {
            records: Vec::new(),
            error,
        }
    }
}

fn completed(outcome: SweepOutcome, mut earlier: Vec<SweepRecord>) -> Result<SweepOutcome, PartialSweep> {
    match outcome.failure {
        Some(SweepFailure { lambda, error }) => {
            earlier.extend(outcome.records);
            earlier.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            Err(PartialSweep {
                records: earlier,
                error: SweepError::Solver { lambda, source: error },
            })
        }
        None => Ok(outcome),
    }
}

/// Coarse sweep, derivative peak, then a dense window around the peak.
pub fn run_analysis(
    plan: &SweepPlan,
    cache: Option<&SweepCache>,
    refine: &RefineSettings,
) -> Result<SweepAnalysis, PartialSweep> {
    let size = plan.lattice.scaling_size() as f64;
    let coarse = completed(run_sweep(plan, cache)?, Vec::new())?;
    let mut new_solves = coarse.new_solves;
    let mut records = coarse.records;
    let fail = |records: &[SweepRecord], error: SweepError| PartialSweep {
        records: records.to_vec(),
        error,
    };
    let mut deriv = derivative_of_records(&records).map_err(|e| fail(&records, e))?;
    let mut peak = locate_peak(&deriv, size).map_err(|e| fail(&records, e))?;
    if refine.enabled && refine.factor > 1 {
        let step = peak.refinement_width;
        let grid = refined_grid(&plan.grid, peak.lambda_m, step, refine);
        let fresh: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|x| records.binary_search_by(|r| r.lambda.total_cmp(x)).is_err())
            .collect();
        records.retain(|r| grid.binary_search_by(|x| x.total_cmp(&r.lambda)).is_ok());
        if !fresh.is_empty() {
            let fine_plan = SweepPlan {
                grid: fresh,
                ..plan.clone()
            };
            let fine = run_sweep(&fine_plan, cache).map_err(|e| fail(&records, e))?;
            let fine = completed(fine, records.clone())?;
            new_solves += fine.new_solves;
            records.extend(fine.records);
        }
        records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        deriv = derivative_of_records(&records).map_err(|e| fail(&records, e))?;
        peak = locate_peak(&deriv, size).map_err(|e| fail(&records, e))?;
    }
    Ok(SweepAnalysis {
        records,
        derivative: deriv,
        peak,
        new_solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_site_egl(l: f64) -> f64 {
        l * l / (4.0 + l * l)
    }

    fn two_site_slope(l: f64) -> f64 {
        8.0 * l / (4.0 + l * l).powi(2)
    }

    fn uniform(lo: f64, hi: f64, h: f64) -> Vec<f64> {
        LambdaGrid::Range { start: lo, stop: hi, step: h }.points().unwrap()
    }

    #[test]
    fn grid_points() {
        let g = uniform(0.0, 2.0, 0.02);
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 2.0);
        assert!(LambdaGrid::Range { start: 0.0, stop: 1.0, step: 0.0 }.points().is_err());
        assert!(LambdaGrid::Range { start: 0.0, stop: 1.0, step: -0.1 }.points().is_err());
        assert_eq!(LambdaGrid::default_for(2), LambdaGrid::Range { start: 0.0, stop: 1.0, step: 0.01 });
    }

    #[test]
    fn constant_curve_has_zero_derivative() {
        let x = uniform(0.0, 1.0, 0.1);
        let d = derivative(&x, &vec![0.7; x.len()]).unwrap();
        assert!(d.iter().all(|p| p.value.abs() < 1e-12));
    }

    #[test]
    fn two_site_derivative_matches_closed_form() {
        // three-point truncation error peaks near λ = 0.65: 2.43e-4 at
        // h = 0.05 and 3.89e-5 at h = 0.02
        for (h, tol) in [(0.05, 2.5e-4), (0.02, 4e-5)] {
            let x = uniform(0.0, 4.0, h);
            let y: Vec<f64> = x.iter().map(|&l| two_site_egl(l)).collect();
            for p in derivative(&x, &y).unwrap() {
                assert!((p.value - two_site_slope(p.lambda)).abs() < tol, "{h} {}", p.lambda);
            }
        }
    }

    #[test]
    fn derivative_error_is_second_order() {
        let err = |h: f64| {
            let x = uniform(0.0, 4.0, h);
            let y: Vec<f64> = x.iter().map(|&l| two_site_egl(l)).collect();
            derivative(&x, &y)
                .unwrap()
                .iter()
                .map(|p| (p.value - two_site_slope(p.lambda)).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn non_uniform_grid_exact_on_quadratics() {
        let x = vec![0.0, 0.1, 0.35, 0.4, 0.9, 1.0];
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t - t + 2.0).collect();
        for p in derivative(&x, &y).unwrap() {
            assert!((p.value - (6.0 * p.lambda - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_rejects_bad_input() {
        assert!(matches!(
            derivative(&[0.0, 0.1, 0.2, 0.3], &[0.0; 4]),
            Err(SweepError::TooFewPoints { .. })
        ));
        assert!(matches!(
            derivative(&[0.0, 0.1, 0.1, 0.3, 0.4], &[0.0; 5]),
            Err(SweepError::DuplicateLambda(_))
        ));
    }

    fn curve(x: &[f64], f: impl Fn(f64) -> f64) -> Vec<DerivativePoint> {
        x.iter()
            .map(|&l| DerivativePoint { lambda: l, value: f(l), error_estimate: None })
            .collect()
    }

    #[test]
    fn parabola_vertex_recovered() {
        let x = uniform(0.0, 2.0, 0.1);
        let c = curve(&x, |l| 5.0 - 3.0 * (l - 1.234).powi(2));
        let p = locate_peak(&c, 4.0).unwrap();
        assert!((p.lambda_m - 1.234).abs() < 1e-12);
        assert!((p.peak_value - 5.0).abs() < 1e-12);
        assert!((p.refinement_width - 0.1).abs() < 1e-12);
    }

    #[test]
    fn two_site_peak_location() {
        let x = uniform(0.0, 4.0, 0.01);
        let c = curve(&x, two_site_slope);
        let p = locate_peak(&c, 2.0).unwrap();
        assert!((p.lambda_m - 2.0 / 3f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn peak_errors() {
        let x = uniform(0.0, 1.0, 0.1);
        assert!(matches!(locate_peak(&curve(&x, |l| l), 1.0), Err(SweepError::PeakAtBoundary("upper"))));
        assert!(matches!(locate_peak(&curve(&x, |l| -l), 1.0), Err(SweepError::PeakAtBoundary("lower"))));
        // zigzag around the largest value: the local fit is convex
        let zig = [-2.0, -2.0, -2.0, 0.99, -1.0, 1.0, -1.0, 0.99, -2.0, -2.0, -2.0];
        let c: Vec<DerivativePoint> = x
            .iter()
            .zip(zig)
            .map(|(&l, v)| DerivativePoint { lambda: l, value: v, error_estimate: None })
            .collect();
        assert!(matches!(locate_peak(&c, 1.0), Err(SweepError::Plateau(_))));
    }

    #[test]
    fn refined_grid_replaces_window() {
        let coarse = uniform(0.0, 2.0, 0.02);
        let g = refined_grid(&coarse, 1.0, 0.02, &RefineSettings::default());
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.contains(&0.8) && g.contains(&1.2) && g.contains(&1.005));
        assert_eq!(g.iter().filter(|&&x| (0.8..=1.2).contains(&x)).count(), 81);
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&2.0));
    }
}
