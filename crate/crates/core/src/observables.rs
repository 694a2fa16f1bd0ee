//! Ground-state observables: single-site marginals, Meyer–Wallach global
//! entanglement, the local/non-local information split, the N-tangle,
//! magnetizations and overlap with the GHZ-like strong-coupling state.

use serde::{Deserialize, Serialize};

use crate::error::ObservableError;
use crate::hamiltonian::StateVector;
use crate::par::{self, ExecMode};

const NORM_TOLERANCE: f64 = 1e-8;

/// 2×2 single-site density matrix in the σz basis, `[[ρ00, ρ01], [ρ10, ρ11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSiteRdm {
    pub entries: [[f64; 2]; 2],
}

impl SingleSiteRdm {
    pub fn trace(&self) -> f64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn purity(&self) -> f64 {
        let e = &self.entries;
        e[0][0] * e[0][0] + e[1][1] * e[1][1] + 2.0 * e[0][1] * e[1][0]
    }

    /// `2 (1 - Tr ρ²)`
    pub fn linear_entropy(&self) -> f64 {
        2.0 * (1.0 - self.purity())
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = &self.entries;
        let mean = 0.5 * (e[0][0] + e[1][1]);
        let half = 0.5 * (e[0][0] - e[1][1]);
        let r = (half * half + e[0][1] * e[1][0]).sqrt();
        [mean - r, mean + r]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub energy: f64,
    pub e_gl: f64,
    /// `None` for odd N, where no N-tangle is defined.
    pub n_tangle: Option<f64>,
    pub i_local: f64,
    pub i_nonlocal: f64,
    pub mag_x: f64,
    pub mag_z: f64,
    pub ghz_fidelity: f64,
}

fn mode() -> ExecMode {
    ExecMode::Parallel.effective()
}

fn check_normalized(v: &StateVector) -> Result<(), ObservableError> {
    let n2 = v.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOLERANCE {
        return Err(ObservableError::NotNormalized(n2));
    }
    Ok(())
}

/// Partial trace over every site except `site`.
pub fn reduce_single_site(v: &StateVector, site: usize) -> Result<SingleSiteRdm, ObservableError> {
    let n = v.n_sites();
    if site >= n {
        return Err(ObservableError::Site { site, n });
    }
    check_normalized(v)?;
    Ok(reduce_unchecked(v, site))
}

fn reduce_unchecked(v: &StateVector, site: usize) -> SingleSiteRdm {
    let a = v.amplitudes();
    let bit = 1usize << site;
    let half = a.len() / 2;
    // enumerate basis states with the site bit cleared
    let low_mask = bit - 1;
    let spread = |r: usize| ((r & !low_mask) << 1) | (r & low_mask);
    let m = mode();
    let p0 = par::sum_indexed(m, half, |r| a[spread(r)].powi(2));
    let p1 = par::sum_indexed(m, half, |r| a[spread(r) | bit].powi(2));
    let c = par::sum_indexed(m, half, |r| {
        let b = spread(r);
        a[b] * a[b | bit]
    });
    SingleSiteRdm {
        entries: [[p0, c], [c, p1]],
    }
}

/// Linear entropy of site 0, which equals the Meyer–Wallach measure for
/// translation-invariant states.
pub fn global_entanglement(v: &StateVector) -> Result<f64, ObservableError> {
    Ok(reduce_single_site(v, 0)?.linear_entropy())
}

/// Linear entropy of every site.
pub fn global_entanglement_site_resolved(v: &StateVector) -> Result<Vec<f64>, ObservableError> {
    check_normalized(v)?;
    Ok((0..v.n_sites())
        .map(|i| reduce_unchecked(v, i).linear_entropy())
        .collect())
}

/// `(I_local, I_non-local)` in bits; they sum to N for a pure state.
pub fn information_decomposition(v: &StateVector) -> Result<(f64, f64), ObservableError> {
    check_normalized(v)?;
    let mut local = 0.0;
    let mut nonlocal = 0.0;
    for i in 0..v.n_sites() {
        let p = reduce_unchecked(v, i).purity();
        local += 2.0 * p - 1.0;
        nonlocal += 2.0 * (1.0 - p);
    }
    Ok((local, nonlocal))
}

/// `|⟨v| σy⊗…⊗σy |v*⟩|²` for a real state on an even number of qubits.
///
/// `σy|0⟩ = i|1⟩` and `σy|1⟩ = -i|0⟩`, so `σy^{⊗N}|b⟩ = i^N (-1)^{popcount b} |b̄⟩`
/// with `b̄` the bitwise complement. The global `i^N` drops out of the modulus.
pub fn n_tangle(v: &StateVector) -> Result<f64, ObservableError> {
    let n = v.n_sites();
    if n % 2 == 1 {
        return Err(ObservableError::OddTangle(n));
    }
    check_normalized(v)?;
    let a = v.amplitudes();
    let all = a.len() - 1;
    let s = par::sum_indexed(mode(), a.len(), |b| {
        let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        sign * a[b] * a[all ^ b]
    });
    Ok(s * s)
}

pub fn magnetization_x(v: &StateVector) -> Result<f64, ObservableError> {
    check_normalized(v)?;
    let n = v.n_sites();
    let total: f64 = (0..n).map(|i| 2.0 * reduce_unchecked(v, i).entries[0][1]).sum();
    Ok(total / n as f64)
}

pub fn magnetization_z(v: &StateVector) -> Result<f64, ObservableError> {
    check_normalized(v)?;
    let n = v.n_sites();
    let total: f64 = (0..n)
        .map(|i| {
            let r = reduce_unchecked(v, i);
            r.entries[0][0] - r.entries[1][1]
        })
        .sum();
    Ok(total / n as f64)
}

/// GHZ-like state `(|+⟩ + |−⟩)/√2` of x-polarized product states, written in
/// the σz basis: amplitude `2^{(1-N)/2}` on every even-popcount bitstring.
pub fn ghz_state(n_sites: usize) -> StateVector {
    let amp = 2f64.powf((1.0 - n_sites as f64) / 2.0);
    let amps = (0..1usize << n_sites)
        .map(|b| if b.count_ones() % 2 == 0 { amp } else { 0.0 })
        .collect();
    StateVector::from_amplitudes(amps).expect("power-of-two length")
}

/// `|⟨GHZ_N|v⟩|²`
pub fn ghz_fidelity(v: &StateVector) -> Result<f64, ObservableError> {
    check_normalized(v)?;
    let a = v.amplitudes();
    let amp = 2f64.powf((1.0 - v.n_sites() as f64) / 2.0);
    let overlap = par::sum_indexed(mode(), a.len(), |b| {
        if b.count_ones() % 2 == 0 {
            a[b]
        } else {
            0.0
        }
    }) * amp;
    Ok(overlap * overlap)
}

/// Full observable set for a normalized ground state.
///
/// With `translation_invariant` the global entanglement is the site-0 linear
/// entropy; otherwise it is averaged over sites.
pub fn compute_observables(
    v: &StateVector,
    energy: f64,
    translation_invariant: bool,
) -> Result<ObservableSet, ObservableError> {
    check_normalized(v)?;
    let n = v.n_sites();
    let rdms: Vec<SingleSiteRdm> = (0..n).map(|i| reduce_unchecked(v, i)).collect();
    let purities: Vec<f64> = rdms.iter().map(|r| r.purity()).collect();
    let i_local = purities.iter().map(|p| 2.0 * p - 1.0).sum();
    let i_nonlocal: f64 = purities.iter().map(|p| 2.0 * (1.0 - p)).sum();
    let e_gl = if translation_invariant {
        rdms[0].linear_entropy()
    } else {
        i_nonlocal / n as f64
    };
    let n_tangle = if n % 2 == 0 { Some(n_tangle(v)?) } else { None };
    let mag_x = rdms.iter().map(|r| 2.0 * r.entries[0][1]).sum::<f64>() / n as f64;
    let mag_z = rdms.iter().map(|r| r.entries[0][0] - r.entries[1][1]).sum::<f64>() / n as f64;
    Ok(ObservableSet {
        energy,
        e_gl,
        n_tangle,
        i_local,
        i_nonlocal,
        mag_x,
        mag_z,
        ghz_fidelity: ghz_fidelity(v)?,
    })
}
