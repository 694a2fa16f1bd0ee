//! Sequential against data-parallel execution for the operator application
//! and a full ground-state solve.
//!
//! Without the `parallel` feature both variants run the sequential path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tfim_core::eigensolver::lanczos_ground_state_with;
use tfim_core::par::ExecMode;
use tfim_core::{build_lattice, HamiltonianOperator, LatticeSpec, Sector, SolverSettings, StateVector};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn ring(n: usize, lambda: f64) -> HamiltonianOperator {
    let edges = build_lattice(&LatticeSpec::chain(n)).unwrap();
    HamiltonianOperator::new(n, edges, lambda).unwrap()
}

fn apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply");
    for n in [14, 18, 20] {
        let h = ring(n, 1.0);
        let amps: Vec<f64> = (0..1usize << n).map(|i| ((i * 7919) % 1000) as f64 * 1e-3).collect();
        let mut v = StateVector::from_amplitudes(amps).unwrap();
        v.normalize();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &v, |b, v| {
                b.iter(|| black_box(h.apply_with(black_box(v), mode.effective()).unwrap()))
            });
        }
    }
    group.finish();
}

fn ground_state(c: &mut Criterion) {
    let mut group = c.benchmark_group("lanczos");
    group.sample_size(10);
    let settings = SolverSettings {
        sector: Sector::EvenParity,
        ..Default::default()
    };
    for n in [12, 16] {
        let h = ring(n, 1.0);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &h, |b, h| {
                b.iter(|| black_box(lanczos_ground_state_with(h, &settings, mode.effective()).unwrap().energy))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, apply, ground_state);
criterion_main!(benches);
