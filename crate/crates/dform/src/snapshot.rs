//! The `DFL1` binary snapshot format.
//!
//! Layout, all little-endian: the magic `b"DFL1"`, `u32` resolution `n`,
//! `f64` length `L`, `f64` viscosity, `f64` time, then the two velocity
//! components, each `n²` coefficients as interleaved `f64` pairs `(re, im)`
//! in row-major order of the spectral index `(i₁, i₂)`, where index `i`
//! holds wavenumber `i` for `i < n/2` and `i − n` otherwise.

use std::fs;
use std::path::Path;

use dform_core::{Grid, SpectralField};
use num_complex::Complex64;

use crate::error::{HarnessError, Result};

pub const MAGIC: [u8; 4] = *b"DFL1";
const HEADER_LEN: usize = 4 + 4 + 3 * 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SnapshotError {
    #[error("not a DFL snapshot (magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("unsupported snapshot version {0:?}")]
    UnsupportedVersion(char),
    #[error("truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid content: {0}")]
    Invalid(dform_core::Error),
}

/// A field with the metadata stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: SpectralField,
    pub nu: f64,
    pub time: f64,
}

pub fn encode(snap: &Snapshot) -> Vec<u8> {
    let g = snap.field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * g.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    for x in [g.length(), snap.nu, snap.time] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for c in 0..2 {
        for z in snap.field.component(c) {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

/// Parses a snapshot; nothing is returned unless the whole buffer is valid.
pub fn decode(bytes: &[u8]) -> std::result::Result<Snapshot, SnapshotError> {
    if bytes.len() < 4 {
        return Err(SnapshotError::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4-byte slice");
    if magic != MAGIC {
        if magic[..3] == MAGIC[..3] {
            return Err(SnapshotError::UnsupportedVersion(magic[3] as char));
        }
        return Err(SnapshotError::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(SnapshotError::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice")) as usize;
    let (length, nu, time) = (f64_at(bytes, 8), f64_at(bytes, 16), f64_at(bytes, 24));
    let grid = Grid::new(n, length).map_err(SnapshotError::Invalid)?;
    let expected = HEADER_LEN + 32 * grid.len();
    if bytes.len() < expected {
        return Err(SnapshotError::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(SnapshotError::TrailingBytes(bytes.len() - expected));
    }
    let read = |c: usize| -> Vec<Complex64> {
        let base = HEADER_LEN + 16 * grid.len() * c;
        (0..grid.len()).map(|i| Complex64::new(f64_at(bytes, base + 16 * i), f64_at(bytes, base + 16 * i + 8))).collect()
    };
    let field = SpectralField::from_coefficients(grid, read(0), read(1)).map_err(SnapshotError::Invalid)?;
    Ok(Snapshot { field, nu, time })
}

pub fn save_snapshot(snap: &Snapshot, path: &Path) -> Result<()> {
    fs::write(path, encode(snap)).map_err(|source| HarnessError::Io { path: path.into(), source })
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    decode(&bytes).map_err(|source| HarnessError::Snapshot { path: path.into(), source })
}
