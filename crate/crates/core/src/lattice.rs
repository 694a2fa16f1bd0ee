//! Hypercubic lattices in one to three dimensions and their nearest-neighbour bonds.
//!
//! Sites are numbered in row-major order: for sizes `(L0, L1, L2)` the site at
//! coordinates `(c0, c1, c2)` has index `c0 * L1 * L2 + c1 * L2 + c2`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::LatticeError;

/// Largest number of sites accepted unless a spec raises the cap.
pub const DEFAULT_MAX_SITES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    Open,
}

/// How wrap-around bonds are counted when a periodic extent is 2.
///
/// With `PerDirection` every site contributes one bond along each positive
/// axis, so a periodic extent of 2 produces each bond twice (the forward and
/// the wrap-around neighbour coincide). `UniquePairs` merges such duplicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BondConvention {
    UniquePairs,
    PerDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sizes: Vec<usize>,
    pub boundary: Boundary,
    pub bond_convention: BondConvention,
    #[serde(default = "default_max_sites")]
    pub max_sites: usize,
}

fn default_max_sites() -> usize {
    DEFAULT_MAX_SITES
}

/// Undirected bond between two sites, stored with `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    fn new(i: usize, j: usize) -> Self {
        Edge {
            a: i.min(j),
            b: i.max(j),
        }
    }
}

impl LatticeSpec {
    pub fn new(sizes: Vec<usize>, boundary: Boundary, bond_convention: BondConvention) -> Self {
        LatticeSpec {
            sizes,
            boundary,
            bond_convention,
            max_sites: DEFAULT_MAX_SITES,
        }
    }

    /// Periodic chain of `n` sites with unique bonds.
    pub fn chain(n: usize) -> Self {
        Self::new(vec![n], Boundary::Periodic, BondConvention::UniquePairs)
    }

    /// Periodic `d`-dimensional cube of side `l`.
    pub fn hypercube(d: usize, l: usize, bond_convention: BondConvention) -> Self {
        Self::new(vec![l; d], Boundary::Periodic, bond_convention)
    }

    pub fn with_max_sites(mut self, max_sites: usize) -> Self {
        self.max_sites = max_sites;
        self
    }

    pub fn dimension(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_sites(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Size label used by the scaling analysis: `N` for chains, `L` otherwise.
    pub fn scaling_size(&self) -> usize {
        if self.dimension() == 1 {
            self.n_sites()
        } else {
            self.sizes[0]
        }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let d = self.dimension();
        if !(1..=3).contains(&d) {
            return Err(LatticeError::Dimension(d));
        }
        if let Some(k) = self.sizes.iter().position(|&l| l < 1) {
            return Err(LatticeError::Extent { axis: k });
        }
        let n = self.n_sites();
        if n > self.max_sites {
            return Err(LatticeError::TooManySites {
                n,
                max: self.max_sites,
            });
        }
        Ok(())
    }

    /// Stable content hash used to key caches and stamp output files.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "d={};sizes={:?};boundary={:?};bonds={:?}",
            self.dimension(),
            self.sizes,
            self.boundary,
            self.bond_convention
        ));
        hex::encode(&h.finalize()[..8])
    }

    /// Human-readable size label such as `4x4`.
    pub fn label(&self) -> String {
        self.sizes
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }
}

/// Row-major linear index of `coords`.
pub fn site_index(coords: &[usize], spec: &LatticeSpec) -> Result<usize, LatticeError> {
    if coords.len() != spec.dimension() {
        return Err(LatticeError::CoordinateRank {
            got: coords.len(),
            expected: spec.dimension(),
        });
    }
    let mut idx = 0;
    for (axis, (&c, &l)) in coords.iter().zip(&spec.sizes).enumerate() {
        if c >= l {
            return Err(LatticeError::Coordinate {
                axis,
                value: c,
                extent: l,
            });
        }
        idx = idx * l + c;
    }
    Ok(idx)
}

/// Inverse of [`site_index`].
pub fn site_coords(index: usize, spec: &LatticeSpec) -> Result<Vec<usize>, LatticeError> {
    let n = spec.n_sites();
    if index >= n {
        return Err(LatticeError::SiteIndex { index, n });
    }
    let mut coords = vec![0; spec.dimension()];
    let mut rest = index;
    for (axis, &l) in spec.sizes.iter().enumerate().rev() {
        coords[axis] = rest % l;
        rest /= l;
    }
    Ok(coords)
}

/// Sorted nearest-neighbour bond list for `spec`.
pub fn build_lattice(spec: &LatticeSpec) -> Result<Vec<Edge>, LatticeError> {
    spec.validate()?;
    let n = spec.n_sites();
    let mut edges = Vec::with_capacity(n * spec.dimension());
    for site in 0..n {
        let coords = site_coords(site, spec)?;
        for (axis, &l) in spec.sizes.iter().enumerate() {
            let next = coords[axis] + 1;
            let target = match spec.boundary {
                Boundary::Open if next >= l => continue,
                Boundary::Open => next,
                Boundary::Periodic => next % l,
            };
            let mut nb = coords.clone();
            nb[axis] = target;
            let j = site_index(&nb, spec)?;
            // an extent of 1 wraps onto the site itself
            if j != site {
                edges.push(Edge::new(site, j));
            }
        }
    }
    edges.sort_unstable();
    if spec.bond_convention == BondConvention::UniquePairs {
        edges.dedup();
    }
    Ok(edges)
}
