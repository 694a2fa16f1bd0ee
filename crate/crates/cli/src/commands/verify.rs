//! Oracle suite: Lanczos against dense diagonalization, closed forms and
//! observable invariants on small periodic chains.

use num_complex::Complex64;
use tfim_core::eigensolver::DENSE_MAX_SITES;
use tfim_core::error::SolverError;
use tfim_core::observables::{self, compute_observables};
use tfim_core::{
    build_lattice, dense_ground_state, lanczos_ground_state, HamiltonianOperator, LatticeSpec, SolverSettings,
    StateVector,
};
use tracing::info;

use crate::config::{LoadedConfig, VerifySection};
use crate::error::CliError;

/// Largest chain whose tangle is checked against an explicit `σy⊗N` matrix.
const TANGLE_MAX_SITES: usize = 8;

/// Worst violation seen by one named check; it passes when `worst <= limit`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub limit: f64,
    pub worst: f64,
    pub cases: usize,
    pub failures: usize,
}

impl Check {
    fn new(name: &'static str, limit: f64) -> Self {
        Check {
            name,
            limit,
            worst: 0.0,
            cases: 0,
            failures: 0,
        }
    }

    fn record(&mut self, violation: f64) {
        self.cases += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        self.worst = self.worst.max(v);
        if v > self.limit {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn chain(n: usize, lambda: f64) -> Result<HamiltonianOperator, CliError> {
    let edges = build_lattice(&LatticeSpec::chain(n)).map_err(|e| CliError::Config(e.to_string()))?;
    HamiltonianOperator::new(n, edges, lambda).map_err(|e| CliError::Config(e.to_string()))
}

fn solver_error(lambda: f64, e: SolverError) -> CliError {
    CliError::Solver { lambda, source: e }
}

/// `|⟨v*| σy⊗…⊗σy |v⟩|²` with the operator built entry by entry.
fn tangle_by_matrix(v: &StateVector) -> f64 {
    let n = v.n_sites();
    let dim = 1usize << n;
    let all = dim - 1;
    let a = v.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        // σy maps |0⟩ to i|1⟩ and |1⟩ to -i|0⟩; the only non-zero column of
        // row i is its complement
        let j = i ^ all;
        let mut m = Complex64::new(1.0, 0.0);
        for k in 0..n {
            m *= if (i >> k) & 1 == 1 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(0.0, -1.0)
            };
        }
        acc += a[i] * m * a[j];
    }
    acc.norm_sqr()
}

pub fn run_checks(section: &VerifySection) -> Result<Vec<Check>, CliError> {
    if section.max_n > DENSE_MAX_SITES {
        return Err(CliError::Config(format!(
            "verify.max_n: {} exceeds the dense cap of {DENSE_MAX_SITES}",
            section.max_n
        )));
    }
    if section.max_n < 2 {
        return Err(CliError::Config("verify.max_n: must be at least 2".into()));
    }
    let settings = SolverSettings {
        tol: section.tol,
        ..Default::default()
    };
    settings
        .validate()
        .map_err(|e| CliError::Config(format!("verify.tol: {e}")))?;

    let mut residual = Check::new("lanczos_residual", section.tol);
    let mut energy = Check::new("energy_vs_dense", 1e-10);
    let mut egl = Check::new("e_gl_vs_dense", 1e-8);
    let mut two_site = Check::new("two_site_closed_form", 1e-10);
    let mut range = Check::new("e_gl_in_unit_interval", 0.0);
    let mut zero = Check::new("e_gl_zero_at_lambda_0", 0.0);
    let mut info_sum = Check::new("information_sum", 1e-10);
    let mut uniform = Check::new("site_entropy_uniform", 1e-9);
    let mut mag_x = Check::new("mag_x_vanishes", 1e-8);
    let mut ghz = Check::new("ghz_fidelity_at_lambda_10", 0.01);
    let mut tangle = Check::new("n_tangle_vs_sigma_y", 1e-10);

    for n in 2..=section.max_n {
        for &lambda in &section.lambdas {
            let h = chain(n, lambda)?;
            let dense = dense_ground_state(&h).map_err(|e| solver_error(lambda, e))?;
            let d_obs = compute_observables(&dense.vector, dense.energy, true)
                .map_err(|e| CliError::Config(e.to_string()))?;
            match lanczos_ground_state(&h, &settings) {
                Ok(r) => {
                    residual.record(r.residual);
                    energy.record((r.energy - dense.energy).abs());
                    let l_egl = observables::global_entanglement(&r.vector)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    egl.record((l_egl - d_obs.e_gl).abs());
                    range.record((-l_egl).max(l_egl - 1.0).max(0.0));
                }
                Err(SolverError::NotConverged { residual: r, .. }) => residual.record(r),
                Err(e) => return Err(solver_error(lambda, e)),
            }
            range.record((-d_obs.e_gl).max(d_obs.e_gl - 1.0).max(0.0));
            info_sum.record((d_obs.i_local + d_obs.i_nonlocal - n as f64).abs());
            let sites = observables::global_entanglement_site_resolved(&dense.vector)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let (lo, hi) = sites.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            uniform.record(hi - lo);
            mag_x.record(d_obs.mag_x.abs());
            if n % 2 == 0 && n <= TANGLE_MAX_SITES {
                let t = d_obs.n_tangle.expect("even chains have a tangle");
                tangle.record((t - tangle_by_matrix(&dense.vector)).abs());
            }
        }

        let h0 = chain(n, 0.0)?;
        let g0 = lanczos_ground_state(&h0, &settings).map_err(|e| solver_error(0.0, e))?;
        zero.record(observables::global_entanglement(&g0.vector).map_err(|e| CliError::Config(e.to_string()))?.abs());

        let h10 = chain(n, 10.0)?;
        let g10 = dense_ground_state(&h10).map_err(|e| solver_error(10.0, e))?;
        let f = observables::ghz_fidelity(&g10.vector).map_err(|e| CliError::Config(e.to_string()))?;
        ghz.record(1.0 - f);
    }

    let closed = SolverSettings {
        tol: section.tol.max(1e-12),
        ..Default::default()
    };
    for i in 1..=50 {
        let lambda = 0.1 * i as f64;
        let r = lanczos_ground_state(&chain(2, lambda)?, &closed).map_err(|e| solver_error(lambda, e))?;
        let e_gl = observables::global_entanglement(&r.vector).map_err(|e| CliError::Config(e.to_string()))?;
        let err_e = (r.energy + (4.0 + lambda * lambda).sqrt()).abs();
        let err_g = (e_gl - lambda * lambda / (4.0 + lambda * lambda)).abs();
        two_site.record(err_e.max(err_g));
    }

    Ok(vec![
        residual, energy, egl, two_site, range, zero, info_sum, uniform, mag_x, ghz, tangle,
    ])
}

pub fn run(cfg: &LoadedConfig) -> Result<(), CliError> {
    let section = cfg.config.verify.clone().unwrap_or_default();
    let checks = run_checks(&section)?;
    println!("{:<28} {:>6} {:>12} {:>10} {:>6}", "check", "cases", "worst", "limit", "status");
    for c in &checks {
        println!(
            "{:<28} {:>6} {:>12.3e} {:>10.1e} {:>6}",
            c.name,
            c.cases,
            c.worst,
            c.limit,
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.to_string()).collect();
    info!(checks = checks.len(), failed = failed.len(), "verification finished");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed))
    }
}
