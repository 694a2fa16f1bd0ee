//! Acceptance suite. Each test prints one `[PASS]` or `[FAIL]` line.
//!
//! The sweeps behind the scaling criteria are cached under
//! `$TFIM_ACCEPTANCE_CACHE` (default `target/tmp/acceptance-cache`), so only
//! the first run pays for the large chains. The 5×5 lattice is used when all
//! of its points are already cached, or when `TFIM_ACCEPTANCE_L5=1` asks for
//! it to be computed (hours).

use std::io::Write;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use faer::{Mat, Side};
use num_complex::Complex64;
use tfim_core::fss::{
    collapse_fit, extrapolate_critical_point, peak_divergence_check, ApproachSide, CollapseOptions, SizedCurve,
};
use tfim_core::observables::{self, compute_observables};
use tfim_core::sweep::{
    derivative, derivative_of_records, locate_peak, run_analysis, run_sweep, LambdaGrid, PeakEstimate,
    RefineSettings, SweepAnalysis, SweepCache, SweepPlan, SweepRecord,
};
use tfim_core::{
    build_lattice, lanczos_ground_state, BondConvention, Boundary, HamiltonianOperator, LatticeSpec, Sector,
    SolverSettings, StateVector,
};

const ORACLE_LAMBDAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];
const CHAINS: [usize; 7] = [8, 10, 12, 14, 16, 18, 20];
const SQUARES: [usize; 3] = [2, 3, 4];
const L5_POINTS: usize = 13;

/// Large solves run one at a time.
static HEAVY: Mutex<()> = Mutex::new(());

fn report(pass: bool, line: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] {line}");
    let _ = out.flush();
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn cache() -> SweepCache {
    let dir = std::env::var_os("TFIM_ACCEPTANCE_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cache"));
    SweepCache::new(dir)
}

fn sweep_solver() -> SolverSettings {
    SolverSettings {
        sector: Sector::EvenParity,
        tol: 1e-9,
        ..Default::default()
    }
}

fn analyse(spec: LatticeSpec) -> SweepAnalysis {
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let grid = LambdaGrid::default_for(spec.dimension()).points().unwrap();
    let plan = SweepPlan::new(spec.clone(), grid, sweep_solver());
    run_analysis(&plan, Some(&cache()), &RefineSettings::default())
        .unwrap_or_else(|e| panic!("sweep of {} failed: {}", spec.label(), e.error))
}

fn chains() -> &'static Vec<SweepAnalysis> {
    static DATA: OnceLock<Vec<SweepAnalysis>> = OnceLock::new();
    DATA.get_or_init(|| CHAINS.iter().map(|&n| analyse(LatticeSpec::chain(n))).collect())
}

fn square(l: usize) -> LatticeSpec {
    LatticeSpec::hypercube(2, l, BondConvention::PerDirection)
}

fn squares() -> &'static Vec<SweepAnalysis> {
    static DATA: OnceLock<Vec<SweepAnalysis>> = OnceLock::new();
    DATA.get_or_init(|| SQUARES.iter().map(|&l| analyse(square(l))).collect())
}

fn l5_grid() -> Vec<f64> {
    (0..L5_POINTS)
        .map(|i| ((0.35 + 0.0025 * i as f64) * 1e12).round() / 1e12)
        .collect()
}

/// Narrow sweep of the 5×5 lattice around its peak, if cached or requested.
fn square_l5() -> &'static Option<(Vec<SweepRecord>, PeakEstimate)> {
    static DATA: OnceLock<Option<(Vec<SweepRecord>, PeakEstimate)>> = OnceLock::new();
    DATA.get_or_init(|| {
        let spec = square(5);
        let solver = sweep_solver();
        let cache = cache();
        let grid = l5_grid();
        let cached = grid.iter().all(|&l| cache.load(&spec, l, &solver).is_some());
        let requested = std::env::var("TFIM_ACCEPTANCE_L5").is_ok_and(|v| v == "1");
        if !cached && !requested {
            return None;
        }
        let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
        let plan = SweepPlan::new(spec, grid, solver);
        let records = run_sweep(&plan, Some(&cache)).unwrap().into_result().unwrap().records;
        let peak = locate_peak(&derivative_of_records(&records).unwrap(), 5.0).unwrap();
        Some((records, peak))
    })
}

fn cubes() -> &'static [(BondConvention, SweepAnalysis); 2] {
    static DATA: OnceLock<[(BondConvention, SweepAnalysis); 2]> = OnceLock::new();
    DATA.get_or_init(|| {
        [BondConvention::UniquePairs, BondConvention::PerDirection]
            .map(|c| (c, analyse(LatticeSpec::hypercube(3, 2, c))))
    })
}

fn sized_curve(a: &SweepAnalysis) -> SizedCurve {
    SizedCurve {
        size: a.peak.size,
        points: a.derivative.clone(),
    }
}

// Dense reference built directly from matrix elements of the chain
// Hamiltonian, independent of the library's operator.

fn chain_element(n: usize, lambda: f64, row: usize, col: usize) -> f64 {
    if row == col {
        // bit set means spin down
        return -(n as f64 - 2.0 * row.count_ones() as f64);
    }
    let flip = row ^ col;
    let bonds = (0..n).filter(|&i| flip == (1 << i) | (1 << ((i + 1) % n))).count();
    -lambda * bonds as f64
}

fn kron(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `op` on `site` and identities elsewhere; site 0 is the rightmost factor.
fn site_operator(n: usize, site: usize, op: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let id = vec![vec![one, zero], vec![zero, one]];
    let mut m = vec![vec![one]];
    for k in (0..n).rev() {
        m = kron(&m, if k == site { op } else { &id });
    }
    m
}

fn pauli(name: char) -> Vec<Vec<Complex64>> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match name {
        'x' => vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]],
        'y' => vec![vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]],
        _ => vec![vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]],
    }
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn chain_by_kron(n: usize, lambda: f64) -> Vec<Vec<Complex64>> {
    let dim = 1 << n;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    let bonds: Vec<(usize, usize)> = if n == 2 { vec![(0, 1)] } else { (0..n).map(|i| (i, (i + 1) % n)).collect() };
    for (i, j) in bonds {
        let xx = matmul(&site_operator(n, i, &pauli('x')), &site_operator(n, j, &pauli('x')));
        for r in 0..dim {
            for c in 0..dim {
                h[r][c] -= lambda * xx[r][c];
            }
        }
    }
    for i in 0..n {
        let z = site_operator(n, i, &pauli('z'));
        for r in 0..dim {
            h[r][r] -= z[r][r];
        }
    }
    h
}

struct Exact {
    n: usize,
    lambda: f64,
    energy: f64,
    vector: Vec<f64>,
}

/// Lowest state of each parity block; the even one wins ties.
fn exact_chain(n: usize, lambda: f64) -> Exact {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for parity in [0u32, 1] {
        let states: Vec<usize> = (0..1usize << n).filter(|b| b.count_ones() % 2 == parity).collect();
        let element = |r: usize, c: usize| {
            // the two-site ring has a single bond
            let e = chain_element(n, lambda, states[r], states[c]);
            if n == 2 && r != c { e / 2.0 } else { e }
        };
        let m = Mat::from_fn(states.len(), states.len(), element);
        let eig = m.self_adjoint_eigen(Side::Lower).unwrap();
        let k = (0..states.len()).min_by(|&a, &b| eig.S()[a].total_cmp(&eig.S()[b])).unwrap();
        let energy = eig.S()[k];
        if best.as_ref().is_some_and(|(e, _)| *e <= energy + 1e-12) {
            continue;
        }
        let mut full = vec![0.0; 1 << n];
        for (i, &s) in states.iter().enumerate() {
            full[s] = eig.U()[(i, k)];
        }
        best = Some((energy, full));
    }
    let (energy, vector) = best.unwrap();
    Exact {
        n,
        lambda,
        energy,
        vector,
    }
}

fn exact_chains() -> &'static Vec<Exact> {
    static DATA: OnceLock<Vec<Exact>> = OnceLock::new();
    DATA.get_or_init(|| {
        (2..=12)
            .flat_map(|n| ORACLE_LAMBDAS.iter().map(move |&l| exact_chain(n, l)))
            .collect()
    })
}

/// `2 (1 - mean purity)` from single-site reduced density matrices.
fn egl_reference(v: &[f64], n: usize) -> f64 {
    let mut purity = 0.0;
    for i in 0..n {
        let (mut p0, mut p1, mut c) = (0.0, 0.0, 0.0);
        for (b, &a) in v.iter().enumerate() {
            if b >> i & 1 == 0 {
                p0 += a * a;
                c += a * v[b | 1 << i];
            } else {
                p1 += a * a;
            }
        }
        purity += p0 * p0 + p1 * p1 + 2.0 * c * c;
    }
    2.0 * (1.0 - purity / n as f64)
}

fn chain_op(n: usize, lambda: f64) -> HamiltonianOperator {
    HamiltonianOperator::new(n, build_lattice(&LatticeSpec::chain(n)).unwrap(), lambda).unwrap()
}

#[test]
fn criterion_1_lanczos_matches_dense() {
    let start = std::time::Instant::now();
    // the element formula agrees with Kronecker products on small rings
    let mut kron_err = 0.0f64;
    for n in 2..=6 {
        let h = chain_by_kron(n, 0.7);
        for (r, row) in h.iter().enumerate() {
            for (c, z) in row.iter().enumerate() {
                let e = chain_element(n, 0.7, r, c);
                let e = if n == 2 && r != c { e / 2.0 } else { e };
                kron_err = kron_err.max((z.re - e).abs()).max(z.im.abs());
            }
        }
    }
    assert!(kron_err < 1e-14, "matrix elements disagree with Kronecker construction: {kron_err:e}");

    let settings = SolverSettings::default();
    let (mut worst_e, mut worst_g) = (0.0f64, 0.0f64);
    for ex in exact_chains() {
        let r = lanczos_ground_state(&chain_op(ex.n, ex.lambda), &settings)
            .unwrap_or_else(|e| panic!("N={} λ={}: {e}", ex.n, ex.lambda));
        worst_e = worst_e.max((r.energy - ex.energy).abs());
        let g = observables::global_entanglement(&r.vector).unwrap();
        worst_g = worst_g.max((g - egl_reference(&ex.vector, ex.n)).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_e <= 1e-10 && worst_g <= 1e-8;
    report(
        pass,
        &format!(
            "criterion 1: Lanczos vs dense, N=2..12 x 5 couplings: max |dE| = {worst_e:.2e} (<= 1e-10), \
             max |dE_gl| = {worst_g:.2e} (<= 1e-8), {elapsed:.0} s"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_two_site_closed_forms() {
    let settings = SolverSettings {
        tol: 1e-12,
        ..Default::default()
    };
    let (mut worst_e, mut worst_g) = (0.0f64, 0.0f64);
    for k in 1..=50 {
        let l = 0.1 * k as f64;
        let r = lanczos_ground_state(&chain_op(2, l), &settings).unwrap();
        worst_e = worst_e.max((r.energy + (4.0 + l * l).sqrt()).abs());
        let g = observables::global_entanglement(&r.vector).unwrap();
        worst_g = worst_g.max((g - l * l / (4.0 + l * l)).abs());
    }

    let grid = LambdaGrid::default_for(1).points().unwrap();
    let plan = SweepPlan::new(LatticeSpec::chain(2), grid, settings);
    let records = run_sweep(&plan, None).unwrap().into_result().unwrap().records;
    let lambdas: Vec<f64> = records.iter().map(|r| r.lambda).collect();
    let egl: Vec<f64> = records.iter().map(|r| r.observables.e_gl).collect();
    let worst_d = derivative(&lambdas, &egl)
        .unwrap()
        .iter()
        .map(|p| (p.value - 8.0 * p.lambda / (4.0 + p.lambda * p.lambda).powi(2)).abs())
        .fold(0.0, f64::max);

    let pass = worst_e <= 1e-10 && worst_g <= 1e-10 && worst_d <= 1e-4;
    report(
        pass,
        &format!(
            "criterion 2: two-site closed forms over 50 couplings: |dE| = {worst_e:.2e}, |dE_gl| = {worst_g:.2e} \
             (<= 1e-10); derivative on the default grid {worst_d:.2e} (<= 1e-4)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_chain_critical_point() {
    let peaks: Vec<PeakEstimate> = chains().iter().map(|a| a.peak).collect();
    let fit = extrapolate_critical_point(&peaks).unwrap();
    let list: Vec<String> = peaks.iter().map(|p| format!("{}:{:.5}", p.size, p.lambda_m)).collect();
    let pass = within(fit.lambda_c, 0.98, 1.04) && within(fit.alpha, 0.85, 1.15);
    report(
        pass,
        &format!(
            "criterion 3: chain critical point lambda_c = {:.4} in [0.98, 1.04], alpha = {:.3} in [0.85, 1.15], \
             approach {:?}, joint fit kept {}; lambda_m {}",
            fit.lambda_c,
            fit.alpha,
            fit.side,
            fit.joint_refined,
            list.join(" ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_chain_collapse_and_divergence() {
    let large: Vec<&SweepAnalysis> = chains().iter().filter(|a| a.peak.size >= 12.0).collect();
    let curves: Vec<SizedCurve> = large.iter().map(|a| sized_curve(a)).collect();
    let peaks: Vec<PeakEstimate> = large.iter().map(|a| a.peak).collect();
    let collapse = collapse_fit(&curves, &peaks, &CollapseOptions::default()).unwrap();
    let div = peak_divergence_check(&peaks).unwrap();
    let all: Vec<PeakEstimate> = chains().iter().map(|a| a.peak).collect();
    let div_all = peak_divergence_check(&all).unwrap();
    let pass = within(collapse.nu, 0.9, 1.25) && div.r_squared >= 0.98;
    report(
        pass,
        &format!(
            "criterion 4: chain collapse N=12..20 nu = {:.3} in [0.9, 1.25] (interior {}); peak height vs ln N \
             r2 = {:.4} (>= 0.98), slope {:.4}; over N=8..20 r2 = {:.4}",
            collapse.nu, collapse.interior, div.r_squared, div.slope, div_all.r_squared
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_square_critical_point() {
    let mut peaks: Vec<PeakEstimate> = squares().iter().map(|a| a.peak).collect();
    let small = extrapolate_critical_point(&peaks);
    let small_note = match &small {
        Ok(f) => format!("L=2..4 alone: lambda_c = {:.4}, alpha = {:.3}, {:?}", f.lambda_c, f.alpha, f.side),
        Err(e) => format!("L=2..4 alone: {e}"),
    };
    if let Some((_, p)) = square_l5() {
        peaks.push(*p);
    }
    let list: Vec<String> = peaks.iter().map(|p| format!("{}:{:.5}", p.size, p.lambda_m)).collect();
    let sizes = if peaks.len() > SQUARES.len() { "L=2..5" } else { "L=2..4 (5x5 not cached)" };
    let (pass, line) = match extrapolate_critical_point(&peaks) {
        Ok(fit) => (
            within(fit.lambda_c, 0.31, 0.35) && within(fit.alpha, 0.8, 1.2) && fit.side == ApproachSide::FromAbove,
            format!(
                "lambda_c = {:.4} in [0.31, 0.35], alpha = {:.3} in [0.8, 1.2], approach {:?} (want FromAbove), \
                 joint fit kept {}",
                fit.lambda_c, fit.alpha, fit.side, fit.joint_refined
            ),
        ),
        Err(e) => (false, format!("fit failed: {e}")),
    };
    report(
        pass,
        &format!("criterion 5: square critical point over {sizes}: {line}; lambda_m {}; {small_note}", list.join(" ")),
    );
    assert!(pass);
}

#[test]
fn criterion_6_square_collapse() {
    let curves: Vec<SizedCurve> = squares().iter().map(sized_curve).collect();
    let peaks: Vec<PeakEstimate> = squares().iter().map(|a| a.peak).collect();
    let collapse = collapse_fit(&curves, &peaks, &CollapseOptions::default()).unwrap();
    let div = peak_divergence_check(&peaks).unwrap();
    let pass = within(collapse.nu, 0.35, 0.7);
    report(
        pass,
        &format!(
            "criterion 6: square collapse L=2..4 nu = {:.3} in [0.35, 0.7] (interior {}); peak height vs ln L r2 = {:.4}",
            collapse.nu, collapse.interior, div.r_squared
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_cube_peak() {
    let found: Vec<(BondConvention, f64)> = cubes().iter().map(|(c, a)| (*c, a.peak.lambda_m)).collect();
    let hit = found.iter().find(|(_, l)| (l - 0.26).abs() <= 0.02);
    let values: Vec<String> = found.iter().map(|(c, l)| format!("{c:?} {l:.4}")).collect();
    let verdict = match hit {
        Some((c, _)) => format!("reproduced by {c:?}"),
        None => "neither convention lands within 0.26 +- 0.02".to_string(),
    };
    report(
        hit.is_some(),
        &format!("criterion 7: 2x2x2 lambda_m: {}; {verdict}", values.join(", ")),
    );
    assert!(hit.is_some());
}

/// `|⟨v*| σy⊗…⊗σy |v⟩|²` from the explicit Kronecker product.
fn tangle_by_kron(v: &[f64], n: usize) -> f64 {
    let mut y = vec![vec![Complex64::new(1.0, 0.0)]];
    for _ in 0..n {
        y = kron(&y, &pauli('y'));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, row) in y.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            acc += v[r] * z * v[c];
        }
    }
    acc.norm_sqr()
}

#[test]
fn criterion_8_invariants() {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let mut states: Vec<(String, StateVector)> = Vec::new();
    let (mut worst_info, mut worst_site, mut worst_mx, mut worst_tangle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut worst_ghz = 1.0f64;

    for ex in exact_chains() {
        let v = StateVector::from_amplitudes(ex.vector.clone()).unwrap();
        let o = compute_observables(&v, ex.energy, true).unwrap();
        worst_info = worst_info.max((o.i_local + o.i_nonlocal - ex.n as f64).abs());
        let sites = observables::global_entanglement_site_resolved(&v).unwrap();
        let spread = sites.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - sites.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        worst_site = worst_site.max(spread);
        worst_mx = worst_mx.max(o.mag_x.abs());
        if ex.lambda == 10.0 {
            worst_ghz = worst_ghz.min(observables::ghz_fidelity(&v).unwrap());
        }
        if ex.n % 2 == 0 && ex.n <= 8 {
            worst_tangle = worst_tangle.max((o.n_tangle.unwrap() - tangle_by_kron(&ex.vector, ex.n)).abs());
        }
        states.push((format!("chain {} at {}", ex.n, ex.lambda), v));
    }

    // small squares and cubes, both conventions, through the iterative solver
    for (spec, lambda) in [
        (LatticeSpec::hypercube(2, 2, BondConvention::UniquePairs), 0.3),
        (LatticeSpec::hypercube(2, 2, BondConvention::PerDirection), 0.4),
        (LatticeSpec::hypercube(2, 3, BondConvention::UniquePairs), 0.35),
        (LatticeSpec::hypercube(3, 2, BondConvention::PerDirection), 0.26),
        (LatticeSpec::new(vec![3, 2], Boundary::Periodic, BondConvention::UniquePairs), 0.5),
    ] {
        let h = HamiltonianOperator::new(spec.n_sites(), build_lattice(&spec).unwrap(), lambda).unwrap();
        let r = lanczos_ground_state(&h, &SolverSettings::default()).unwrap();
        let o = compute_observables(&r.vector, r.energy, false).unwrap();
        worst_info = worst_info.max((o.i_local + o.i_nonlocal - spec.n_sites() as f64).abs());
        worst_mx = worst_mx.max(o.mag_x.abs());
        states.push((format!("{} at {lambda}", spec.label()), r.vector));
    }

    let mut range_bad = 0usize;
    let mut range_total = 0usize;
    for (_, v) in &states {
        let g = observables::global_entanglement(v).unwrap();
        range_total += 1;
        range_bad += usize::from(!within(g, 0.0, 1.0));
    }
    let datasets = chains().iter().chain(squares().iter()).chain(cubes().iter().map(|(_, a)| a));
    for rec in datasets.flat_map(|a| a.records.iter()) {
        range_total += 1;
        range_bad += usize::from(!within(rec.observables.e_gl, 0.0, 1.0));
    }

    let mut zero_worst = 0.0f64;
    for spec in [LatticeSpec::chain(12), square(4), LatticeSpec::hypercube(3, 2, BondConvention::UniquePairs)] {
        let h = HamiltonianOperator::new(spec.n_sites(), build_lattice(&spec).unwrap(), 0.0).unwrap();
        let r = lanczos_ground_state(&h, &SolverSettings::default()).unwrap();
        zero_worst = zero_worst.max(observables::global_entanglement(&r.vector).unwrap().abs());
    }
    for a in chains().iter().chain(squares().iter()) {
        zero_worst = zero_worst.max(a.records[0].observables.e_gl.abs());
    }

    check("e_gl range", range_bad == 0);
    check("e_gl at zero coupling", zero_worst == 0.0);
    check("information sum", worst_info <= 1e-10);
    check("site uniformity", worst_site <= 1e-9);
    check("x magnetization", worst_mx <= 1e-8);
    check("ghz fidelity", worst_ghz >= 0.99);
    check("n-tangle", worst_tangle <= 1e-10);
    let pass = failures.is_empty();
    report(
        pass,
        &format!(
            "criterion 8: invariants: e_gl outside [0,1] {range_bad}/{range_total}; e_gl(0) max {zero_worst:e}; \
             info sum {worst_info:.1e}; site spread {worst_site:.1e}; |M_x| {worst_mx:.1e}; \
             min GHZ fidelity at 10 = {worst_ghz:.5}; tangle vs kron {worst_tangle:.1e}{}",
            if pass { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_tangle_against_entanglement() {
    let cases = [
        ("chain N=16", chains().iter().find(|a| a.peak.size == 16.0).unwrap()),
        ("square 4x4", squares().iter().find(|a| a.peak.size == 4.0).unwrap()),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, a) in cases {
        let pts: Vec<(f64, f64, f64)> = a
            .records
            .iter()
            .map(|r| (r.lambda, r.observables.e_gl, r.observables.n_tangle.expect("even site count")))
            .collect();
        // records are ordered by λ, i.e. by decreasing 1/λ
        let worst_drop = pts.windows(2).map(|w| w[0].2 - w[1].2).fold(0.0, f64::max);
        let below = pts.iter().filter(|p| p.2 <= p.1).count();
        pass &= worst_drop <= 1e-9;
        notes.push(format!(
            "{name}: largest decrease {worst_drop:.1e} (<= 1e-9), tangle <= e_gl at {below}/{} points",
            pts.len()
        ));
    }
    report(pass, &format!("criterion 9: n-tangle monotone in lambda; {}", notes.join("; ")));
    assert!(pass);
}
