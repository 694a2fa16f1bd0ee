//! Matrix-free transverse-field Ising Hamiltonian
//!
//! ```text
//! H = -λ Σ_<ij> σx_i σx_j - Σ_i σz_i
//! ```
//!
//! in the σz product basis. Bit `i` of a basis index is the state of site `i`:
//! `0` is σz = +1 and `1` is σz = -1. The operator is real symmetric and
//! conserves the popcount parity of basis states, so work can be confined to
//! one parity sector of dimension `2^(N-1)`.

use serde::{Deserialize, Serialize};

use crate::error::HamiltonianError;
use crate::lattice::Edge;
use crate::par::{self, ExecMode};

/// Largest site count for which a basis is ever allocated.
pub const MAX_BASIS_SITES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    #[default]
    Full,
    EvenParity,
    OddParity,
}

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Full => "full",
            Sector::EvenParity => "even-parity",
            Sector::OddParity => "odd-parity",
        }
    }

    /// Whether basis state `b` belongs to this sector.
    pub fn contains(self, b: u64) -> bool {
        match self {
            Sector::Full => true,
            Sector::EvenParity => b.count_ones() % 2 == 0,
            Sector::OddParity => b.count_ones() % 2 == 1,
        }
    }
}

/// Real wavefunction with `2^N` amplitudes in the σz product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amps: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n_sites: usize) -> Self {
        StateVector {
            n_sites,
            amps: vec![0.0; 1 << n_sites],
        }
    }

    /// Product state `|b⟩`.
    pub fn basis(n_sites: usize, b: u64) -> Self {
        let mut v = Self::zeros(n_sites);
        v.amps[b as usize] = 1.0;
        v
    }

    pub fn from_amplitudes(amps: Vec<f64>) -> Result<Self, HamiltonianError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(HamiltonianError::Dimension {
                got: len,
                expected: len.next_power_of_two(),
            });
        }
        Ok(StateVector {
            n_sites: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [f64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        par::dot(ExecMode::Parallel.effective(), &self.amps, &self.amps)
    }

    pub fn dot(&self, other: &StateVector) -> f64 {
        par::dot(ExecMode::Parallel.effective(), &self.amps, &other.amps)
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            par::scale(ExecMode::Parallel.effective(), 1.0 / n, &mut self.amps);
        }
    }

    /// Flip the global sign so the largest-magnitude amplitude is positive.
    pub fn fix_gauge(&mut self) {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &a in &self.amps {
            if a.abs() > best {
                best = a.abs();
                sign = a.signum();
            }
        }
        if sign < 0.0 {
            self.amps.iter_mut().for_each(|a| *a = -*a);
        }
    }

    /// Squared weight of the amplitudes lying outside `sector`.
    pub fn weight_outside(&self, sector: Sector) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(b, _)| !sector.contains(*b as u64))
            .map(|(_, a)| a * a)
            .sum()
    }
}

/// Index map between a parity sector and the full basis.
///
/// Sector states are enumerated by dropping bit 0: the compressed index `k`
/// stands for `b = (k << 1) | p` where `p` is the bit that gives `b` the
/// sector's parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorBasis {
    pub n_sites: usize,
    pub sector: Sector,
}

impl SectorBasis {
    pub fn new(n_sites: usize, sector: Sector) -> Self {
        SectorBasis { n_sites, sector }
    }

    pub fn dim(&self) -> usize {
        match self.sector {
            Sector::Full => 1 << self.n_sites,
            _ if self.n_sites == 0 => usize::from(self.sector == Sector::EvenParity),
            _ => 1 << (self.n_sites - 1),
        }
    }

    #[inline]
    pub fn state(&self, k: usize) -> u64 {
        let k = k as u64;
        match self.sector {
            Sector::Full => k,
            Sector::EvenParity => (k << 1) | (k.count_ones() as u64 & 1),
            Sector::OddParity => (k << 1) | (!k.count_ones() as u64 & 1),
        }
    }

    /// Compressed index of `b`; `b` must lie in the sector.
    #[inline]
    pub fn index(&self, b: u64) -> usize {
        match self.sector {
            Sector::Full => b as usize,
            _ => (b >> 1) as usize,
        }
    }

    /// Expand sector amplitudes into a full-length state.
    pub fn embed(&self, x: &[f64]) -> StateVector {
        if self.sector == Sector::Full {
            return StateVector {
                n_sites: self.n_sites,
                amps: x.to_vec(),
            };
        }
        let mut v = StateVector::zeros(self.n_sites);
        for (k, &a) in x.iter().enumerate() {
            v.amps[self.state(k) as usize] = a;
        }
        v
    }

    /// Sector amplitudes of a full-length state (components outside are dropped).
    pub fn restrict(&self, v: &StateVector) -> Vec<f64> {
        (0..self.dim()).map(|k| v.amps[self.state(k) as usize]).collect()
    }
}

/// Exchange bond as a two-bit flip mask with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FlipTerm {
    mask: u64,
    weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianOperator {
    lambda: f64,
    n_sites: usize,
    edges: Vec<Edge>,
    sector: Sector,
    flips: Vec<FlipTerm>,
}

impl HamiltonianOperator {
    pub fn new(n_sites: usize, edges: Vec<Edge>, lambda: f64) -> Result<Self, HamiltonianError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(HamiltonianError::Coupling(lambda));
        }
        if n_sites > MAX_BASIS_SITES {
            return Err(HamiltonianError::TooManySites(n_sites));
        }
        if let Some(e) = edges.iter().find(|e| e.a >= n_sites || e.b >= n_sites || e.a == e.b) {
            return Err(HamiltonianError::Edge {
                a: e.a,
                b: e.b,
                n: n_sites,
            });
        }
        // doubled bonds (periodic extent 2) collapse into one term of weight 2
        let mut masks: Vec<u64> = edges.iter().map(|e| (1u64 << e.a) | (1u64 << e.b)).collect();
        masks.sort_unstable();
        let mut flips: Vec<FlipTerm> = Vec::new();
        for m in masks {
            match flips.last_mut() {
                Some(t) if t.mask == m => t.weight += 1.0,
                _ => flips.push(FlipTerm { mask: m, weight: 1.0 }),
            }
        }
        Ok(HamiltonianOperator {
            lambda,
            n_sites,
            edges,
            sector: Sector::Full,
            flips,
        })
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// `Hv` on a full-length state whose support lies in the operator's sector.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector, HamiltonianError> {
        self.apply_with(v, ExecMode::Parallel.effective())
    }

    pub fn apply_with(&self, v: &StateVector, mode: ExecMode) -> Result<StateVector, HamiltonianError> {
        if v.len() != self.dim() {
            return Err(HamiltonianError::Dimension {
                got: v.len(),
                expected: self.dim(),
            });
        }
        if self.sector != Sector::Full {
            let weight = v.weight_outside(self.sector);
            if weight > 0.0 {
                return Err(HamiltonianError::SectorViolation {
                    sector: self.sector.name(),
                    weight,
                });
            }
        }
        let mut out = StateVector::zeros(self.n_sites);
        self.apply_in(SectorBasis::new(self.n_sites, Sector::Full), &v.amps, &mut out.amps, mode);
        Ok(out)
    }

    /// `y = H x` with `x`, `y` given in the compressed coordinates of `basis`.
    pub fn apply_in(&self, basis: SectorBasis, x: &[f64], y: &mut [f64], mode: ExecMode) {
        debug_assert_eq!(x.len(), basis.dim());
        debug_assert_eq!(y.len(), basis.dim());
        let n = self.n_sites as i64;
        let lambda = self.lambda;
        let flips = &self.flips;
        par::fill_indexed(mode, y, |k| {
            let b = basis.state(k);
            let mut acc = -((n - 2 * b.count_ones() as i64) as f64) * x[k];
            let mut off = 0.0;
            for t in flips {
                off += t.weight * x[basis.index(b ^ t.mask)];
            }
            acc -= lambda * off;
            acc
        });
    }

    /// Dense matrix of the sector block, built entry by entry from the bond
    /// list rather than through [`Self::apply_in`].
    pub fn dense_block(&self, basis: SectorBasis) -> Vec<f64> {
        let dim = basis.dim();
        let mut m = vec![0.0; dim * dim];
        for k in 0..dim {
            let b = basis.state(k);
            m[k * dim + k] = diagonal_energy(b, self.n_sites);
            for e in &self.edges {
                let flipped = b ^ (1u64 << e.a) ^ (1u64 << e.b);
                let j = basis.index(flipped);
                m[j * dim + k] -= self.lambda;
            }
        }
        m
    }
}

/// Field energy `-Σ_i z_i` of basis state `b`.
pub fn diagonal_energy(b: u64, n_sites: usize) -> f64 {
    -(n_sites as f64 - 2.0 * b.count_ones() as f64)
}

/// Zero the amplitudes outside `sector` (no renormalization).
pub fn parity_projector(v: &StateVector, sector: Sector) -> StateVector {
    let mut out = v.clone();
    for (b, a) in out.amps.iter_mut().enumerate() {
        if !sector.contains(b as u64) {
            *a = 0.0;
        }
    }
    out
}
