use alloc::format;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Square periodic collocation grid on `[0, L]²` with `n` points per side.
///
/// Spectral index `i ∈ 0..n` maps to the integer wavenumber `i` for
/// `i < n/2` and `i - n` above. The Nyquist index `n/2` is never populated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::InvalidResolution(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "L",
                reason: format!("domain length must be positive, got {length}"),
            });
        }
        Ok(Grid { n, length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    /// κ₀ = 2π/L.
    #[inline]
    pub fn kappa0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Integer wavenumber of spectral index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Spectral index of integer wavenumber `k` (must satisfy `|k| < n/2`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        let n = self.n as i64;
        (((k % n) + n) % n) as usize
    }

    /// Flat index of the mode `(k1, k2)`.
    #[inline]
    pub fn flat(&self, k1: i64, k2: i64) -> usize {
        self.index_of(k1) * self.n + self.index_of(k2)
    }

    /// Integer wavevector of flat index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    /// Flat index of `-k` for the mode at `idx`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (a, b) = (idx / n, idx % n);
        ((n - a) % n) * n + (n - b) % n
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = self.n / 2;
        idx / self.n == h || idx % self.n == h
    }

    /// Largest integer wavenumber kept by the 2/3 rule (`3K < n`).
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    #[inline]
    pub fn in_dealiased_band(&self, idx: usize) -> bool {
        let (k1, k2) = self.wavevector(idx);
        let c = self.dealias_cutoff();
        k1.abs() <= c && k2.abs() <= c
    }

    /// Physical `|k|²` of the mode at `idx`.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let (k1, k2) = self.wavevector(idx);
        let k0 = self.kappa0();
        k0 * k0 * (k1 * k1 + k2 * k2) as f64
    }

    pub fn describe(&self) -> alloc::string::String {
        format!("{}x{} on L={}", self.n, self.n, self.length)
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.n == other.n && self.length.to_bits() == other.length.to_bits() {
            Ok(())
        } else {
            Err(Error::GridMismatch { left: self.describe(), right: other.describe() })
        }
    }
}
