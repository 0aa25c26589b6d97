//! Operators of the functional setting: Leray projection, powers of the
//! Stokes operator, the dealiased bilinear term and the norm bundle.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::fft::{Direction, Fft2};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Norms of a field. `|·|` is the L² norm, `‖·‖ = |A^{1/2}·|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormBundle {
    pub h: f64,
    pub v: f64,
    pub a: f64,
    pub a32: f64,
    pub linf: f64,
}

/// Per-grid spectral context: FFT plan plus wavenumber tables.
///
/// Immutable after construction; share it freely between runs.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid,
    fft: Fft2,
    kx: Vec<f64>,
    ky: Vec<f64>,
    ksq: Vec<f64>,
    band: Vec<bool>,
}

/// Physical-space samples of a two-component field, `[p*n + q]` at
/// `x = (pL/n, qL/n)`.
pub type PhysicalField = [Vec<f64>; 2];

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let k0 = grid.kappa0();
        let n = grid.len();
        let mut kx = vec![0.0; n];
        let mut ky = vec![0.0; n];
        let mut ksq = vec![0.0; n];
        let mut band = vec![false; n];
        for idx in 0..n {
            let (a, b) = grid.wavevector(idx);
            kx[idx] = k0 * a as f64;
            ky[idx] = k0 * b as f64;
            ksq[idx] = grid.k_squared(idx);
            band[idx] = idx != 0 && !grid.is_nyquist(idx) && grid.in_dealiased_band(idx);
        }
        Spectral { grid, fft: Fft2::new(grid.n()), kx, ky, ksq, band }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Physical `|k|²` per flat index.
    pub fn k_squared(&self) -> &[f64] {
        &self.ksq
    }

    pub fn wavevector_physical(&self, idx: usize) -> (f64, f64) {
        (self.kx[idx], self.ky[idx])
    }

    /// Membership in the 2/3-rule band (excludes k = 0 and Nyquist).
    pub fn dealias_mask(&self) -> &[bool] {
        &self.band
    }

    fn check(&self, g: &Grid) -> Result<()> {
        self.grid.ensure_same(g)
    }

    fn inverse_pair(&self, a: &[Complex64], b: &[Complex64], buf: &mut [Complex64], scratch: &mut [Complex64]) {
        for ((z, &x), &y) in buf.iter_mut().zip(a).zip(b) {
            *z = x + I * y;
        }
        self.fft.process(buf, scratch, Direction::Inverse);
    }

    /// Splits `FFT(a + i b)` of two real arrays into their spectra.
    fn unpack(&self, z: &[Complex64], a: &mut [Complex64], b: &mut [Complex64], scale: f64) {
        let g = &self.grid;
        for idx in 0..g.len() {
            let zc = z[g.conjugate_index(idx)].conj();
            a[idx] = (z[idx] + zc) * (0.5 * scale);
            b[idx] = (z[idx] - zc) * (-0.5 * scale) * I;
        }
    }

    pub fn to_physical(&self, u: &SpectralField) -> PhysicalField {
        self.components_to_physical(u.component(0), u.component(1))
    }

    pub fn vector_to_physical(&self, u: &VectorField) -> PhysicalField {
        self.components_to_physical(u.component(0), u.component(1))
    }

    fn components_to_physical(&self, a: &[Complex64], b: &[Complex64]) -> PhysicalField {
        let n = self.grid.len();
        let mut buf = vec![ZERO; n];
        let mut scratch = vec![ZERO; n];
        self.inverse_pair(a, b, &mut buf, &mut scratch);
        [buf.iter().map(|z| z.re).collect(), buf.iter().map(|z| z.im).collect()]
    }

    /// Forward transform of physical samples. The result may carry a mean.
    pub fn from_physical(&self, u1: &[f64], u2: &[f64]) -> Result<VectorField> {
        let n = self.grid.len();
        if u1.len() != n || u2.len() != n {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("expected {n} samples per component"),
            });
        }
        let mut buf: Vec<Complex64> = u1.iter().zip(u2).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let mut scratch = vec![ZERO; n];
        self.fft.process(&mut buf, &mut scratch, Direction::Forward);
        let mut a = vec![ZERO; n];
        let mut b = vec![ZERO; n];
        self.unpack(&buf, &mut a, &mut b, 1.0 / n as f64);
        for idx in 0..n {
            if self.grid.is_nyquist(idx) {
                a[idx] = ZERO;
                b[idx] = ZERO;
            }
        }
        VectorField::new(self.grid, a, b)
    }

    /// Forward transform with the (round-off) mean removed and conjugate
    /// symmetry restored.
    pub fn field_from_physical(&self, u1: &[f64], u2: &[f64]) -> Result<SpectralField> {
        let [mut a, mut b] = self.from_physical(u1, u2)?.into_components();
        a[0] = ZERO;
        b[0] = ZERO;
        let mut f = SpectralField::from_parts_unchecked(self.grid, a, b);
        f.symmetrize();
        Ok(f)
    }

    /// Helmholtz–Leray projection onto divergence-free fields.
    pub fn leray_project(&self, field: &VectorField) -> Result<SpectralField> {
        self.check(field.grid())?;
        let mean = field.mean();
        let m = mean[0].norm().max(mean[1].norm());
        if m != 0.0 {
            return Err(Error::NonzeroMean(m));
        }
        let mut a = field.component(0).to_vec();
        let mut b = field.component(1).to_vec();
        self.project_in_place(&mut a, &mut b);
        SpectralField::from_coefficients(self.grid, a, b)
    }

    /// Projection of an already zero-mean field.
    pub fn project(&self, u: &SpectralField) -> SpectralField {
        let mut out = u.clone();
        let (a, b) = out.components_mut();
        self.project_in_place(a, b);
        out
    }

    fn project_in_place(&self, a: &mut [Complex64], b: &mut [Complex64]) {
        for idx in 0..self.grid.len() {
            if idx == 0 || self.grid.is_nyquist(idx) {
                a[idx] = ZERO;
                b[idx] = ZERO;
                continue;
            }
            let (kx, ky) = (self.kx[idx], self.ky[idx]);
            let dot = (a[idx] * kx + b[idx] * ky) / self.ksq[idx];
            a[idx] -= dot * kx;
            b[idx] -= dot * ky;
        }
    }

    /// `A^α u` for `α ∈ [-1, 2]`: multiplication of mode `k` by `|k|^{2α}`.
    pub fn stokes_apply(&self, u: &SpectralField, alpha: f64) -> Result<SpectralField> {
        self.check(u.grid())?;
        if !(-1.0..=2.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("exponent {alpha} outside [-1, 2]"),
            });
        }
        let mut out = u.clone();
        if alpha == 0.0 {
            return Ok(out);
        }
        let factors: Vec<f64> = self
            .ksq
            .iter()
            .map(|&k2| if k2 == 0.0 { 0.0 } else { k2.powf(alpha) })
            .collect();
        out.scale_modes(&factors);
        Ok(out)
    }

    /// `|A^α u|` via Parseval, `α ≥ 0`.
    pub fn sobolev_norm(&self, u: &SpectralField, alpha: f64) -> f64 {
        let l = self.grid.length();
        let mut s = 0.0;
        for c in 0..2 {
            for (z, &k2) in u.component(c).iter().zip(&self.ksq) {
                if k2 > 0.0 {
                    let w = if alpha == 0.0 { 1.0 } else { k2.powf(2.0 * alpha) };
                    s += w * z.norm_sqr();
                }
            }
        }
        l * s.sqrt()
    }

    /// `|u|`
    pub fn norm_h(&self, u: &SpectralField) -> f64 {
        self.sobolev_norm(u, 0.0)
    }

    /// `‖u‖ = |A^{1/2}u| = |∇u|`
    pub fn norm_v(&self, u: &SpectralField) -> f64 {
        let l = self.grid.length();
        let mut s = 0.0;
        for c in 0..2 {
            for (z, &k2) in u.component(c).iter().zip(&self.ksq) {
                s += k2 * z.norm_sqr();
            }
        }
        l * s.sqrt()
    }

    /// `|Au| = |Δu|`
    pub fn norm_a(&self, u: &SpectralField) -> f64 {
        let l = self.grid.length();
        let mut s = 0.0;
        for c in 0..2 {
            for (z, &k2) in u.component(c).iter().zip(&self.ksq) {
                s += k2 * k2 * z.norm_sqr();
            }
        }
        l * s.sqrt()
    }

    /// Max of `|u(x)|` over the collocation points.
    pub fn linf(&self, u: &SpectralField) -> f64 {
        let [a, b] = self.to_physical(u);
        a.iter().zip(&b).map(|(x, y)| (x * x + y * y).sqrt()).fold(0.0, f64::max)
    }

    pub fn norms(&self, u: &SpectralField) -> NormBundle {
        NormBundle { linf: self.linf(u), ..self.parseval_norms(u) }
    }

    /// The Parseval norms of [`Spectral::norms`], leaving `linf` at zero.
    pub fn parseval_norms(&self, u: &SpectralField) -> NormBundle {
        let l = self.grid.length();
        let (mut h, mut v, mut a, mut a32) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..2 {
            for (z, &k2) in u.component(c).iter().zip(&self.ksq) {
                let e = z.norm_sqr();
                h += e;
                v += k2 * e;
                a += k2 * k2 * e;
                a32 += k2 * k2 * k2 * e;
            }
        }
        NormBundle { h: l * h.sqrt(), v: l * v.sqrt(), a: l * a.sqrt(), a32: l * a32.sqrt(), linf: 0.0 }
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealias(&self, u: &SpectralField) -> SpectralField {
        let mut out = u.clone();
        let factors: Vec<f64> = self.band.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        out.scale_modes(&factors);
        out
    }

    /// `B(u, v) = P_K 𝒫((P_K u · ∇) P_K v)` where `P_K` is the 2/3-rule
    /// truncation. Products are formed on the collocation grid; with both
    /// inputs inside the band the truncated product is free of aliasing, so
    /// this is exactly the Galerkin-truncated bilinear form.
    pub fn bilinear(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        self.check(u.grid())?;
        self.check(v.grid())?;
        let n = self.grid.len();
        let mut s1 = vec![ZERO; n];
        let mut s2 = vec![ZERO; n];
        let mut s3 = vec![ZERO; n];
        let (u1, u2, v1, v2) = (u.component(0), u.component(1), v.component(0), v.component(1));
        for idx in 0..n {
            if self.band[idx] {
                let (kx, ky) = (self.kx[idx], self.ky[idx]);
                s1[idx] = u1[idx] + I * u2[idx];
                // (∂₁v₁ + i ∂₂v₁), (∂₁v₂ + i ∂₂v₂)
                s2[idx] = I * v1[idx] * kx - v1[idx] * ky;
                s3[idx] = I * v2[idx] * kx - v2[idx] * ky;
            }
        }
        let mut scratch = vec![ZERO; n];
        self.fft.process(&mut s1, &mut scratch, Direction::Inverse);
        self.fft.process(&mut s2, &mut scratch, Direction::Inverse);
        self.fft.process(&mut s3, &mut scratch, Direction::Inverse);
        for idx in 0..n {
            let (ua, ub) = (s1[idx].re, s1[idx].im);
            let n1 = ua * s2[idx].re + ub * s2[idx].im;
            let n2 = ua * s3[idx].re + ub * s3[idx].im;
            s1[idx] = Complex64::new(n1, n2);
        }
        self.fft.process(&mut s1, &mut scratch, Direction::Forward);
        let mut a = vec![ZERO; n];
        let mut b = vec![ZERO; n];
        self.unpack(&s1, &mut a, &mut b, 1.0 / n as f64);
        for idx in 0..n {
            if !self.band[idx] {
                a[idx] = ZERO;
                b[idx] = ZERO;
            }
        }
        self.project_in_place(&mut a, &mut b);
        Ok(SpectralField::from_parts_unchecked(self.grid, a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_solenoidal, SpectrumFamily};
    use core::f64::consts::PI;
    use rand_chacha::rand_core::SeedableRng;

    fn ctx(n: usize, l: f64) -> Spectral {
        Spectral::new(Grid::new(n, l).unwrap())
    }

    fn shear(sp: &Spectral, amp: f64, j: i64) -> SpectralField {
        // (amp sin(j κ₀ x₂), 0)
        SpectralField::single_mode(*sp.grid(), 0, j, [Complex64::new(0.0, -amp / 2.0), ZERO]).unwrap()
    }

    #[test]
    fn gradient_fields_are_annihilated() {
        let sp = ctx(16, 2.0);
        let g = *sp.grid();
        let mut a = vec![ZERO; g.len()];
        let mut b = vec![ZERO; g.len()];
        for idx in 1..g.len() {
            if g.is_nyquist(idx) {
                continue;
            }
            let (k1, k2) = g.wavevector(idx);
            // real potential: even real part, odd imaginary part
            let phi = Complex64::new(1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64), 0.01 * (k1 + 2 * k2) as f64);
            let (kx, ky) = sp.wavevector_physical(idx);
            a[idx] = I * kx * phi;
            b[idx] = I * ky * phi;
        }
        let f = VectorField::new(g, a, b).unwrap();
        let p = sp.leray_project(&f).unwrap();
        assert!(p.max_abs() < 1e-15);
    }

    #[test]
    fn shear_mode_is_unchanged_by_projection() {
        let sp = ctx(16, 1.0);
        let u = shear(&sp, 1.5, 1);
        let p = sp.leray_project(&u.as_vector_field()).unwrap();
        assert_eq!(p, u);
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let sp = ctx(16, 1.0);
        let mut f = VectorField::zeros(*sp.grid());
        f.component_mut(1)[0] = Complex64::new(0.1, 0.0);
        assert!(matches!(sp.leray_project(&f), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn eigenmode_scaling_and_identity_power() {
        let sp = ctx(16, 3.0);
        let k0 = sp.grid().kappa0();
        let u = shear(&sp, 1.0, 1);
        let au = sp.stokes_apply(&u, 1.0).unwrap();
        let mut want = u.clone();
        want.scale(k0 * k0);
        assert!((&au - &want).max_abs() < 1e-14);
        assert_eq!(sp.stokes_apply(&u, 0.0).unwrap(), u);
        assert!(sp.stokes_apply(&u, 2.5).is_err());
        assert!(sp.stokes_apply(&u, -1.5).is_err());
        // A^{-1} A = I
        let back = sp.stokes_apply(&au, -1.0).unwrap();
        assert!((&back - &u).max_abs() < 1e-14);
    }

    #[test]
    fn single_mode_norm_matches_quadrature() {
        // coefficient magnitude a at ±k gives |u| = a √2 L
        let l = 2.5;
        let sp = ctx(32, l);
        let a = 0.7;
        let u = SpectralField::single_mode(*sp.grid(), 2, -1, [Complex64::from_polar(a, 0.4), ZERO]).unwrap();
        let want = a * 2f64.sqrt() * l;
        assert!((sp.norm_h(&u) - want).abs() < 1e-13 * want);
        // quadrature oracle on an independent fine grid of direct evaluations
        let m = 96;
        let h = l / m as f64;
        let k0 = 2.0 * PI / l;
        let mut q = 0.0;
        for p in 0..m {
            for r in 0..m {
                let (x1, x2) = (p as f64 * h, r as f64 * h);
                let val = 2.0 * a * (k0 * (2.0 * x1 - x2) + 0.4).cos();
                q += val * val * h * h;
            }
        }
        assert!((q.sqrt() - want).abs() < 1e-10 * want);
        let z = SpectralField::zeros(*sp.grid());
        assert_eq!(sp.norms(&z), NormBundle::default());
    }

    #[test]
    fn round_trip_transform() {
        let sp = ctx(32, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u = random_solenoidal(&sp, &mut rng, SpectrumFamily::Kolmogorov, 10);
        let [a, b] = sp.to_physical(&u);
        let back = sp.field_from_physical(&a, &b).unwrap();
        assert!((&back - &u).max_abs() < 1e-12 * u.max_abs());
    }

    #[test]
    fn shear_flow_has_no_self_advection() {
        let sp = ctx(32, 2.0 * PI);
        let u = shear(&sp, 3.0, 2);
        assert!(sp.bilinear(&u, &u).unwrap().max_abs() < 1e-15 * u.max_abs());
    }

    #[test]
    fn bilinear_matches_direct_product_for_two_modes() {
        // u = (sin x₂, 0), v = (0, cos x₁): (u·∇)v = (0, -sin x₁ sin x₂)
        let sp = ctx(16, 2.0 * PI);
        let g = *sp.grid();
        let u = shear(&sp, 1.0, 1);
        let v = SpectralField::single_mode(g, 1, 0, [ZERO, Complex64::new(0.5, 0.0)]).unwrap();
        let b = sp.bilinear(&u, &v).unwrap();
        // -sin x₁ sin x₂ = (cos(x₁+x₂) - cos(x₁-x₂))/2 in the second component;
        // projecting onto k ⊥: for k=(1,1) and (1,-1) the divergence-free part
        // of (0, c) is c(-k₁k₂, k₁²)/|k|².
        let c11 = 0.25; // coefficient of exp(i(x₁+x₂)) in (cos(x₁+x₂))/2
        let want11 = [Complex64::new(-c11 * 0.5, 0.0), Complex64::new(c11 * 0.5, 0.0)];
        let got11 = b.coefficient(1, 1);
        for c in 0..2 {
            assert!((got11[c] - want11[c]).norm() < 1e-14, "{:?}", got11);
        }
        let want1m1 = [Complex64::new(-0.25 * 0.5, 0.0), Complex64::new(-0.25 * 0.5, 0.0)];
        let got1m1 = b.coefficient(1, -1);
        for c in 0..2 {
            assert!((got1m1[c] - want1m1[c]).norm() < 1e-14, "{:?}", got1m1);
        }
    }
}
