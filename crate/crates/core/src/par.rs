//! Vector kernels with a data-parallel path (feature `parallel`) and a
//! sequential fallback.
//!
//! Reductions are split into fixed-size chunks whose partial sums are combined
//! in index order, so both paths produce bit-identical results regardless of
//! the number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const CHUNK: usize = 1 << 13;

/// Execution strategy for the vector kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// `Parallel` only when the crate was built with rayon.
    pub fn effective(self) -> ExecMode {
        if cfg!(feature = "parallel") {
            self
        } else {
            ExecMode::Sequential
        }
    }

    #[cfg(feature = "parallel")]
    fn parallel_for(self, len: usize) -> bool {
        self == ExecMode::Parallel && len > CHUNK
    }
}

/// `out[k] = f(k)` for every index.
pub fn fill_indexed<F>(mode: ExecMode, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.parallel_for(out.len()) {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (i, o) in chunk.iter_mut().enumerate() {
                *o = f(base + i);
            }
        });
        return;
    }
    let _ = mode;
    for (k, o) in out.iter_mut().enumerate() {
        *o = f(k);
    }
}

/// Deterministic `sum_k f(k)` over `0..len`.
pub fn sum_indexed<F>(mode: ExecMode, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let n_chunks = len.div_ceil(CHUNK);
    let partial = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(len);
        (lo..hi).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    if mode.parallel_for(len) {
        let parts: Vec<f64> = (0..n_chunks).into_par_iter().map(partial).collect();
        return parts.iter().sum();
    }
    let _ = mode;
    (0..n_chunks).map(partial).sum()
}

pub fn dot(mode: ExecMode, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_indexed(mode, a.len(), |k| a[k] * b[k])
}

pub fn norm(mode: ExecMode, a: &[f64]) -> f64 {
    dot(mode, a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(mode: ExecMode, alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    #[cfg(feature = "parallel")]
    if mode.parallel_for(y.len()) {
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| {
                for (yi, xi) in yc.iter_mut().zip(xc) {
                    *yi += alpha * xi;
                }
            });
        return;
    }
    let _ = mode;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(mode: ExecMode, alpha: f64, y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if mode.parallel_for(y.len()) {
        y.par_chunks_mut(CHUNK).for_each(|c| c.iter_mut().for_each(|v| *v *= alpha));
        return;
    }
    let _ = mode;
    y.iter_mut().for_each(|v| *v *= alpha);
}
