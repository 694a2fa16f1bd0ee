//! Ground states of [`HamiltonianOperator`]: a restarted Lanczos solver with
//! full reorthogonalization and a dense diagonalization oracle for small N.
//!
//! The Hamiltonian is block diagonal in popcount parity, so a `Full` request
//! is served by solving both parity blocks and keeping the lower one. This
//! keeps the returned state an exact parity eigenstate even when the two
//! blocks become nearly degenerate at strong coupling.

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::error::SolverError;
use crate::hamiltonian::{diagonal_energy, HamiltonianOperator, Sector, SectorBasis, StateVector};
use crate::par::{self, ExecMode};

/// Dense diagonalization refuses lattices above this many sites.
pub const DENSE_MAX_SITES: usize = 14;

/// Below this splitting the two parity ground states count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub sector: Sector,
    /// Upper bound on stored Krylov vectors per restart cycle.
    pub max_krylov: usize,
    /// Memory available for the Krylov basis, in bytes.
    pub memory_budget: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 3000,
            seed: 0x5eed,
            sector: Sector::Full,
            max_krylov: 200,
            memory_budget: 2 << 30,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) {
            return Err(SolverError::Settings(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 2 {
            return Err(SolverError::Settings(format!(
                "max_iter must be at least 2, got {}",
                self.max_iter
            )));
        }
        if self.max_krylov < 3 {
            return Err(SolverError::Settings("max_krylov must be at least 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub energy: f64,
    pub vector: StateVector,
    /// Operator applications spent.
    pub iterations: usize,
    /// `‖Hv - E v‖` of the returned pair.
    pub residual: f64,
    /// Parity block the state lives in.
    pub sector: Sector,
    /// Lowest energy of the opposite parity block minus `energy`, when solved.
    pub parity_gap: Option<f64>,
    /// Parity blocks closer than [`DEGENERACY_GAP`].
    pub degenerate: bool,
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
    iterations: usize,
    residual: f64,
}

/// Lowest eigenpair by Lanczos. Deterministic given `settings.seed`.
pub fn lanczos_ground_state(
    h: &HamiltonianOperator,
    settings: &SolverSettings,
) -> Result<GroundStateResult, SolverError> {
    lanczos_ground_state_with(h, settings, ExecMode::Parallel.effective())
}

pub fn lanczos_ground_state_with(
    h: &HamiltonianOperator,
    settings: &SolverSettings,
    mode: ExecMode,
) -> Result<GroundStateResult, SolverError> {
    settings.validate()?;
    let sector = match (settings.sector, h.sector()) {
        (s, Sector::Full) => s,
        (Sector::Full, s) => s,
        (a, b) if a == b => a,
        (a, b) => {
            return Err(SolverError::Settings(format!(
                "solver sector {} conflicts with operator sector {}",
                a.name(),
                b.name()
            )))
        }
    };
    let solve = |s: Sector| -> Result<(Eigenpair, SectorBasis), SolverError> {
        let basis = SectorBasis::new(h.n_sites(), s);
        if h.lambda() == 0.0 || h.edges().is_empty() {
            return Ok((diagonal_lowest(h, basis), basis));
        }
        let pair = lanczos_lowest(h, basis, settings, &[], mode)?;
        certify(h, &pair.vector)?;
        Ok((pair, basis))
    };
    match sector {
        Sector::Full => {
            let (even, eb) = solve(Sector::EvenParity)?;
            let (odd, ob) = solve(Sector::OddParity)?;
            let iterations = even.iterations + odd.iterations;
            let (lo, lo_basis, lo_sector, hi) = if odd.value < even.value - DEGENERACY_GAP {
                (odd, ob, Sector::OddParity, even.value)
            } else {
                (even, eb, Sector::EvenParity, odd.value)
            };
            let gap = hi - lo.value;
            Ok(finish(lo, lo_basis, lo_sector, Some(gap), iterations))
        }
        s => {
            let (pair, basis) = solve(s)?;
            let it = pair.iterations;
            Ok(finish(pair, basis, s, None, it))
        }
    }
}

fn finish(
    pair: Eigenpair,
    basis: SectorBasis,
    sector: Sector,
    parity_gap: Option<f64>,
    iterations: usize,
) -> GroundStateResult {
    let mut vector = basis.embed(&pair.vector);
    vector.fix_gauge();
    GroundStateResult {
        energy: pair.value,
        vector,
        iterations,
        residual: pair.residual,
        sector,
        parity_gap,
        degenerate: parity_gap.is_some_and(|g| g.abs() < DEGENERACY_GAP),
    }
}

/// Within a parity block the off-diagonal elements are `-λ ≤ 0` and connect
/// every pair of states, so the block ground state is the unique eigenvector
/// with amplitudes of one sign. Any other eigenvector carries O(1) weight on
/// both signs.
fn certify(h: &HamiltonianOperator, x: &[f64]) -> Result<(), SolverError> {
    if h.lambda() == 0.0 || h.edges().is_empty() {
        return Ok(());
    }
    let pos: f64 = x.iter().filter(|a| **a > 0.0).map(|a| a * a).sum();
    let neg: f64 = x.iter().filter(|a| **a < 0.0).map(|a| a * a).sum();
    let minority = pos.min(neg);
    if minority > 1e-6 {
        return Err(SolverError::NotGroundState(format!(
            "eigenvector has {minority:e} weight of minority sign"
        )));
    }
    Ok(())
}

/// Without couplings the operator is diagonal and its lowest basis state is
/// exact. The first minimum wins among degenerate ones.
fn diagonal_lowest(h: &HamiltonianOperator, basis: SectorBasis) -> Eigenpair {
    let n = h.n_sites();
    let (k, value) = (0..basis.dim())
        .map(|k| (k, diagonal_energy(basis.state(k), n)))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    let mut vector = vec![0.0; basis.dim()];
    vector[k] = 1.0;
    Eigenpair {
        value,
        vector,
        iterations: 0,
        residual: 0.0,
    }
}

fn random_start(dim: usize, seed: u64, sector: Sector) -> Vec<f64> {
    let salt = match sector {
        Sector::Full => 0,
        Sector::EvenParity => 1,
        Sector::OddParity => 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt);
    (0..dim).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn orthogonalize(mode: ExecMode, w: &mut [f64], against: &[&[f64]]) {
    for q in against {
        let c = par::dot(mode, q, w);
        par::axpy(mode, -c, q, w);
    }
}

/// Lowest eigenpair of `h` restricted to `basis`, orthogonal to `deflate`.
fn lanczos_lowest(
    h: &HamiltonianOperator,
    basis: SectorBasis,
    settings: &SolverSettings,
    deflate: &[&[f64]],
    mode: ExecMode,
) -> Result<Eigenpair, SolverError> {
    let dim = basis.dim();
    let bytes_per_vec = (dim as u64 * 8).max(1);
    let by_memory = (settings.memory_budget / bytes_per_vec).saturating_sub(2) as usize;
    let m_max = settings.max_krylov.min(by_memory.max(3)).min(dim.max(1));

    let mut start = random_start(dim, settings.seed, basis.sector);
    orthogonalize(mode, &mut start, deflate);
    let mut total = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut scratch = vec![0.0; dim];

    loop {
        let nrm = par::norm(mode, &start);
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(SolverError::Settings("start vector vanished after deflation".into()));
        }
        par::scale(mode, 1.0 / nrm, &mut start);

        let mut q: Vec<Vec<f64>> = vec![std::mem::take(&mut start)];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, Vec<f64>)> = None;

        for j in 0..m_max {
            let mut w = vec![0.0; dim];
            h.apply_in(basis, &q[j], &mut w, mode);
            total += 1;
            let a = par::dot(mode, &q[j], &w);
            alpha.push(a);
            par::axpy(mode, -a, &q[j], &mut w);
            if j > 0 {
                par::axpy(mode, -beta[j - 1], &q[j - 1], &mut w);
            }
            // full reorthogonalization, repeated once when cancellation is heavy
            let before = par::norm(mode, &w);
            for _ in 0..2 {
                let refs: Vec<&[f64]> = q.iter().map(|v| v.as_slice()).collect();
                orthogonalize(mode, &mut w, &refs);
                orthogonalize(mode, &mut w, deflate);
                if par::norm(mode, &w) > 0.7 * before {
                    break;
                }
            }
            let b = par::norm(mode, &w);
            let (theta, s) = tridiagonal_lowest(&alpha, &beta);
            let estimate = b * s[j].abs();
            let scale = alpha.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
            let exhausted = b <= 1e-14 * scale || j + 1 == m_max || total >= settings.max_iter;
            if estimate <= 0.5 * settings.tol || exhausted {
                ritz = Some((theta, s));
                break;
            }
            par::scale(mode, 1.0 / b, &mut w);
            beta.push(b);
            q.push(w);
        }

        let (_, s) = ritz.expect("Lanczos cycle ends with a Ritz pair");
        let mut x = vec![0.0; dim];
        for (coef, v) in s.iter().zip(&q) {
            par::axpy(mode, *coef, v, &mut x);
        }
        drop(q);
        orthogonalize(mode, &mut x, deflate);
        let nx = par::norm(mode, &x);
        par::scale(mode, 1.0 / nx, &mut x);
        h.apply_in(basis, &x, &mut scratch, mode);
        total += 1;
        let value = par::dot(mode, &x, &scratch);
        par::axpy(mode, -value, &x, &mut scratch);
        let residual = par::norm(mode, &scratch);
        best_residual = best_residual.min(residual);
        debug!(dim, total, residual, value, "lanczos cycle");
        if residual <= settings.tol {
            return Ok(Eigenpair {
                value,
                vector: x,
                iterations: total,
                residual,
            });
        }
        if total >= settings.max_iter {
            return Err(SolverError::NotConverged {
                iterations: total,
                residual: best_residual,
            });
        }
        start = x;
    }
}

/// Eigenvalues and eigenvectors (as columns) of a dense symmetric matrix.
fn symmetric_eigen(a: Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigendecomposition converges");
    let values = (0..a.nrows()).map(|i| eig.S()[i]).collect();
    (values, eig.U().to_owned())
}

fn lowest_column(values: &[f64], vectors: &Mat<f64>) -> (f64, Vec<f64>) {
    let (k, &value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    (value, (0..vectors.nrows()).map(|i| vectors[(i, k)]).collect())
}

/// Smallest eigenpair of the symmetric tridiagonal matrix (alpha, beta).
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let (values, vectors) = symmetric_eigen(t);
    lowest_column(&values, &vectors)
}

fn dense_block_eigen(h: &HamiltonianOperator, basis: SectorBasis) -> (Vec<f64>, Mat<f64>) {
    let dim = basis.dim();
    let entries = h.dense_block(basis);
    symmetric_eigen(Mat::from_fn(dim, dim, |i, j| entries[i * dim + j]))
}

fn check_dense_cap(h: &HamiltonianOperator) -> Result<(), SolverError> {
    if h.n_sites() > DENSE_MAX_SITES {
        return Err(SolverError::DenseCap {
            n: h.n_sites(),
            max: DENSE_MAX_SITES,
        });
    }
    Ok(())
}

fn dense_lowest(h: &HamiltonianOperator, basis: SectorBasis) -> Eigenpair {
    let (values, vectors) = dense_block_eigen(h, basis);
    let (value, vector) = lowest_column(&values, &vectors);
    let mut hx = vec![0.0; vector.len()];
    h.apply_in(basis, &vector, &mut hx, ExecMode::Sequential);
    let residual = hx
        .iter()
        .zip(&vector)
        .map(|(a, b)| (a - value * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Eigenpair {
        value,
        vector,
        iterations: 0,
        residual,
    }
}

/// Lowest eigenpair from a full symmetric eigendecomposition of each parity block.
pub fn dense_ground_state(h: &HamiltonianOperator) -> Result<GroundStateResult, SolverError> {
    check_dense_cap(h)?;
    let n = h.n_sites();
    match h.sector() {
        Sector::Full => {
            let eb = SectorBasis::new(n, Sector::EvenParity);
            let ob = SectorBasis::new(n, Sector::OddParity);
            let even = dense_lowest(h, eb);
            let odd = dense_lowest(h, ob);
            if odd.value < even.value - DEGENERACY_GAP {
                let gap = even.value - odd.value;
                Ok(finish(odd, ob, Sector::OddParity, Some(gap), 0))
            } else {
                let gap = odd.value - even.value;
                Ok(finish(even, eb, Sector::EvenParity, Some(gap), 0))
            }
        }
        s => {
            let basis = SectorBasis::new(n, s);
            Ok(finish(dense_lowest(h, basis), basis, s, None, 0))
        }
    }
}

/// All eigenvalues of `h` (over its sector), ascending.
pub fn dense_spectrum(h: &HamiltonianOperator) -> Result<Vec<f64>, SolverError> {
    check_dense_cap(h)?;
    let n = h.n_sites();
    let sectors: &[Sector] = match h.sector() {
        Sector::Full => &[Sector::EvenParity, Sector::OddParity],
        Sector::EvenParity => &[Sector::EvenParity],
        Sector::OddParity => &[Sector::OddParity],
    };
    let mut values: Vec<f64> = sectors
        .iter()
        .flat_map(|&s| dense_block_eigen(h, SectorBasis::new(n, s)).0)
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GapMethod {
    Dense,
    Lanczos(SolverSettings),
}

/// `E1 - E0` over the operator's sector.
pub fn energy_gap(h: &HamiltonianOperator, method: &GapMethod) -> Result<f64, SolverError> {
    match method {
        GapMethod::Dense => {
            let spec = dense_spectrum(h)?;
            Ok(spec.get(1).map_or(f64::INFINITY, |e1| e1 - spec[0]))
        }
        GapMethod::Lanczos(settings) => {
            settings.validate()?;
            let mode = ExecMode::Parallel.effective();
            let sectors: &[Sector] = match h.sector() {
                Sector::Full => &[Sector::EvenParity, Sector::OddParity],
                Sector::EvenParity => &[Sector::EvenParity],
                Sector::OddParity => &[Sector::OddParity],
            };
            let mut levels = Vec::new();
            for &s in sectors {
                let basis = SectorBasis::new(h.n_sites(), s);
                let e0 = lanczos_lowest(h, basis, settings, &[], mode)?;
                levels.push(e0.value);
                if basis.dim() > 1 {
                    let e1 = lanczos_lowest(h, basis, settings, &[&e0.vector], mode)?;
                    levels.push(e1.value);
                }
            }
            levels.sort_by(f64::total_cmp);
            Ok(levels.get(1).map_or(f64::INFINITY, |e1| e1 - levels[0]))
        }
    }
}
