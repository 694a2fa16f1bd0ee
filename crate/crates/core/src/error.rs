use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("lattice dimension must be 1, 2 or 3, got {0}")]
    Dimension(usize),
    #[error("linear extent along axis {axis} must be at least 1")]
    Extent { axis: usize },
    #[error("lattice has {n} sites, above the configured maximum of {max}")]
    TooManySites { n: usize, max: usize },
    #[error("coordinate {value} on axis {axis} is outside [0, {extent})")]
    Coordinate {
        axis: usize,
        value: usize,
        extent: usize,
    },
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateRank { got: usize, expected: usize },
    #[error("site index {index} is outside [0, {n})")]
    SiteIndex { index: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error("state has length {got}, operator acts on dimension {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("state has weight {weight:e} outside the {sector} sector")]
    SectorViolation { sector: &'static str, weight: f64 },
    #[error("coupling must be finite and non-negative, got {0}")]
    Coupling(f64),
    #[error("edge ({a}, {b}) references a site outside [0, {n})")]
    Edge { a: usize, b: usize, n: usize },
    #[error("{0} sites exceed the supported basis size")]
    TooManySites(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("Lanczos did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("dense diagonalization is capped at {max} sites, got {n}")]
    DenseCap { n: usize, max: usize },
    #[error("invalid solver setting: {0}")]
    Settings(String),
    #[error("converged vector failed the ground-state certificate: {0}")]
    NotGroundState(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("site {site} is outside [0, {n})")]
    Site { site: usize, n: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("N-tangle is only defined here for an even number of qubits, got {0}")]
    OddTangle(usize),
    #[error("state length {0} is not a power of two")]
    Length(usize),
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("invalid sweep plan: {0}")]
    Plan(String),
    #[error("solver failed at lambda = {lambda}: {source}")]
    Solver {
        lambda: f64,
        #[source]
        source: SolverError,
    },
    #[error("derivative needs at least {needed} grid points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("duplicate lambda {0} in grid")]
    DuplicateLambda(f64),
    #[error("derivative maximum sits at the {0} end of the grid; extend the grid")]
    PeakAtBoundary(&'static str),
    #[error("no strict maximum near the derivative peak (fitted curvature {0:e})")]
    Plateau(f64),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FssError {
    #[error("need at least {needed} sizes, got {got}")]
    TooFewSizes { needed: usize, got: usize },
    #[error("no overlap window between scaled curves (size {size} shares no x range)")]
    EmptyOverlap { size: f64 },
    #[error("query {x} lies outside the table range [{lo}, {hi}]")]
    Extrapolation { x: f64, lo: f64, hi: f64 },
    #[error("table must have at least 2 strictly increasing nodes")]
    Table,
    #[error("fit failed: {0}")]
    Fit(String),
}

impl SweepError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SweepError::Io {
            path: path.into(),
            source,
        }
    }
}
