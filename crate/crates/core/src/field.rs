//! Two-component velocity fields in Fourier space.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::grid::Grid;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unconstrained two-component field: any coefficients, including a mean.
/// This is the input type of the Leray projection.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: [Vec<Complex64>; 2],
}

impl VectorField {
    pub fn new(grid: Grid, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, &c1)?;
        check_len(&grid, &c2)?;
        Ok(VectorField { grid, comps: [c1, c2] })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        VectorField { grid, comps: [vec![ZERO; n], vec![ZERO; n]] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn mean(&self) -> [Complex64; 2] {
        [self.comps[0][0], self.comps[1][0]]
    }

    pub fn into_components(self) -> [Vec<Complex64>; 2] {
        self.comps
    }
}

/// Zero-mean, real-valued two-component field on a [`Grid`].
///
/// Invariants: `û(0) = 0` exactly, `û(-k) = conj û(k)`, and the Nyquist
/// row/column is empty. Fields returned by the Leray projection, the
/// bilinear term, the time integrators and the forcing constructors are also
/// solenoidal; interpolant outputs in general are not.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: [Vec<Complex64>; 2],
}

fn check_len(grid: &Grid, c: &[Complex64]) -> Result<()> {
    if c.len() != grid.len() {
        return Err(Error::InvalidParameter {
            name: "coefficients",
            reason: alloc::format!("expected {} coefficients, got {}", grid.len(), c.len()),
        });
    }
    Ok(())
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        SpectralField { grid, comps: [vec![ZERO; n], vec![ZERO; n]] }
    }

    /// Validates the invariants; coefficients are stored unchanged.
    pub fn from_coefficients(grid: Grid, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, &c1)?;
        check_len(&grid, &c2)?;
        let mean = c1[0].norm().max(c2[0].norm());
        if mean != 0.0 {
            return Err(Error::NonzeroMean(mean));
        }
        let f = SpectralField { grid, comps: [c1, c2] };
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        let defect = f.symmetry_defect();
        if defect > 1e-12 * scale {
            return Err(Error::NotReal(defect));
        }
        let nyq = (0..grid.len())
            .filter(|&i| grid.is_nyquist(i))
            .map(|i| f.comps[0][i].norm().max(f.comps[1][i].norm()))
            .fold(0.0, f64::max);
        if nyq != 0.0 {
            return Err(Error::InvalidParameter {
                name: "coefficients",
                reason: alloc::format!("Nyquist modes must be empty (found {nyq:e})"),
            });
        }
        Ok(f)
    }

    /// Builder used internally where invariants hold by construction.
    pub(crate) fn from_parts_unchecked(grid: Grid, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Self {
        debug_assert_eq!(c1.len(), grid.len());
        SpectralField { grid, comps: [c1, c2] }
    }

    /// Single real Fourier mode pair: `û(±k)` with `û(k) = coeff`.
    pub fn single_mode(grid: Grid, k1: i64, k2: i64, coeff: [Complex64; 2]) -> Result<Self> {
        let half = (grid.n() / 2) as i64;
        if (k1, k2) == (0, 0) || k1.abs() >= half || k2.abs() >= half {
            return Err(Error::InvalidParameter {
                name: "mode",
                reason: alloc::format!("({k1},{k2}) is not a representable nonzero mode"),
            });
        }
        let mut f = SpectralField::zeros(grid);
        let i = grid.flat(k1, k2);
        let j = grid.flat(-k1, -k2);
        for c in 0..2 {
            f.comps[c][i] += coeff[c];
            f.comps[c][j] += coeff[c].conj();
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub(crate) fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        let [a, b] = &mut self.comps;
        (a, b)
    }

    pub fn coefficient(&self, k1: i64, k2: i64) -> [Complex64; 2] {
        let i = self.grid.flat(k1, k2);
        [self.comps[0][i], self.comps[1][i]]
    }

    pub fn into_components(self) -> [Vec<Complex64>; 2] {
        self.comps
    }

    pub fn into_vector_field(self) -> VectorField {
        VectorField { grid: self.grid, comps: self.comps }
    }

    pub fn as_vector_field(&self) -> VectorField {
        VectorField { grid: self.grid, comps: self.comps.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_k |û(-k) - conj û(k)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let g = &self.grid;
        let mut d: f64 = 0.0;
        for c in 0..2 {
            for i in 0..g.len() {
                let j = g.conjugate_index(i);
                d = d.max((self.comps[c][j] - self.comps[c][i].conj()).norm());
            }
        }
        d
    }

    /// `max_k |k·û(k)|` in physical wavenumber units.
    pub fn divergence_max(&self) -> f64 {
        let g = &self.grid;
        let k0 = g.kappa0();
        (0..g.len())
            .map(|i| {
                let (k1, k2) = g.wavevector(i);
                (self.comps[0][i] * (k0 * k1 as f64) + self.comps[1][i] * (k0 * k2 as f64)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// H inner product `(u, v) = L² Σ Re(û·conj v̂)`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let l2 = self.grid.length() * self.grid.length();
        let mut s = 0.0;
        for c in 0..2 {
            for (a, b) in self.comps[c].iter().zip(&other.comps[c]) {
                s += a.re * b.re + a.im * b.im;
            }
        }
        l2 * s
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert_eq!(self.grid, x.grid);
        for c in 0..2 {
            for (y, xv) in self.comps[c].iter_mut().zip(&x.comps[c]) {
                *y += xv * a;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in 0..2 {
            for y in self.comps[c].iter_mut() {
                *y *= a;
            }
        }
    }

    /// Multiplies every mode by a real per-mode factor (same for both components).
    pub fn scale_modes(&mut self, factors: &[f64]) {
        for c in 0..2 {
            for (y, &f) in self.comps[c].iter_mut().zip(factors) {
                *y *= f;
            }
        }
    }

    pub fn set_zero(&mut self) {
        for c in 0..2 {
            self.comps[c].fill(ZERO);
        }
    }

    pub fn copy_from(&mut self, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for c in 0..2 {
            self.comps[c].copy_from_slice(&other.comps[c]);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Restores exact conjugate symmetry by averaging `û(k)` with `conj û(-k)`.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        for c in 0..2 {
            for i in 0..g.len() {
                let j = g.conjugate_index(i);
                if j > i {
                    let avg = (self.comps[c][i] + self.comps[c][j].conj()) * 0.5;
                    self.comps[c][i] = avg;
                    self.comps[c][j] = avg.conj();
                } else if j == i {
                    self.comps[c][i].im = 0.0;
                }
            }
        }
        for c in 0..2 {
            self.comps[c][0] = ZERO;
        }
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        let mut out = rhs.clone();
        out.scale(self);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        -1.0 * self
    }
}
