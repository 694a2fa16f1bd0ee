//! Binary ground-state files.
//!
//! Layout, all little-endian:
//!
//! | offset | size      | field                                    |
//! |--------|-----------|------------------------------------------|
//! | 0      | 8         | magic `TFIMSTV1`                         |
//! | 8      | 4         | `u32` number of sites N                  |
//! | 12     | 8         | `f64` coupling λ                         |
//! | 20     | 8         | first 8 bytes of the lattice hash        |
//! | 28     | 8 · 2^N   | `f64` amplitudes, basis index order      |
//!
//! Bit `i` of the basis index is site `i`, `1` meaning σz = -1.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::SweepError;
use crate::hamiltonian::StateVector;
use crate::lattice::LatticeSpec;

pub const MAGIC: &[u8; 8] = b"TFIMSTV1";

#[derive(Debug, Clone, PartialEq)]
pub struct StateHeader {
    pub n_sites: u32,
    pub lambda: f64,
    pub lattice_hash: [u8; 8],
}

fn lattice_hash_bytes(spec: &LatticeSpec) -> [u8; 8] {
    let mut out = [0u8; 8];
    hex::decode_to_slice(spec.hash_hex(), &mut out).expect("hash_hex yields 8 bytes");
    out
}

pub fn write_state(path: &Path, spec: &LatticeSpec, lambda: f64, v: &StateVector) -> Result<(), SweepError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| SweepError::io(parent, e))?;
    }
    let io = |e| SweepError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(v.n_sites() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&lambda.to_le_bytes()).map_err(io)?;
    w.write_all(&lattice_hash_bytes(spec)).map_err(io)?;
    for a in v.amplitudes() {
        w.write_all(&a.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_state(path: &Path) -> Result<(StateHeader, StateVector), SweepError> {
    let io = |e| SweepError::io(path, e);
    let bad = |m: &str| SweepError::Format {
        path: path.to_path_buf(),
        message: m.to_string(),
    };
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut head = [0u8; 28];
    r.read_exact(&mut head).map_err(io)?;
    if &head[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let n_sites = u32::from_le_bytes(head[8..12].try_into().unwrap());
    if n_sites > crate::hamiltonian::MAX_BASIS_SITES as u32 {
        return Err(bad("site count too large"));
    }
    let lambda = f64::from_le_bytes(head[12..20].try_into().unwrap());
    let lattice_hash: [u8; 8] = head[20..28].try_into().unwrap();
    let len = 1usize << n_sites;
    let mut body = vec![0u8; len * 8];
    r.read_exact(&mut body).map_err(|_| bad("truncated amplitudes"))?;
    let amps = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let v = StateVector::from_amplitudes(amps).map_err(|e| bad(&e.to_string()))?;
    Ok((
        StateHeader {
            n_sites,
            lambda,
            lattice_hash,
        },
        v,
    ))
}
