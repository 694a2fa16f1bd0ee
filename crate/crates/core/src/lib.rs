//! Exact diagonalization of the transverse-field Ising model on periodic
//! hypercubic lattices, with multipartite entanglement observables and a
//! finite-size-scaling pipeline for locating the quantum critical point.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: sites and nearest-neighbour bonds
//! - [`hamiltonian`]: matrix-free `H = -λ Σ σxσx - Σ σz` and parity sectors
//! - [`eigensolver`]: Lanczos ground states with a dense oracle
//! - [`observables`]: global entanglement, N-tangle, magnetizations
//! - [`sweep`]: λ sweeps, numerical derivatives, peak location, caching
//! - [`fss`]: critical-point extrapolation, data collapse, peak divergence
//!
//! Vector kernels run on rayon when the default `parallel` feature is on and
//! fall back to sequential loops otherwise; see [`par`].

pub mod eigensolver;
pub mod error;
pub mod fss;
pub mod hamiltonian;
pub mod io;
pub mod lattice;
pub mod observables;
pub mod par;
pub mod statefile;
pub mod sweep;

pub use eigensolver::{dense_ground_state, lanczos_ground_state, GroundStateResult, SolverSettings};
pub use error::{FssError, HamiltonianError, LatticeError, ObservableError, SolverError, SweepError};
pub use hamiltonian::{HamiltonianOperator, Sector, StateVector};
pub use lattice::{build_lattice, BondConvention, Boundary, Edge, LatticeSpec};
pub use observables::ObservableSet;
