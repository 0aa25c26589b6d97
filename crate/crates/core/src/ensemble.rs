//! Seeded random field ensembles.
//!
//! Seed splitting: every consumer of randomness names itself with a label.
//! Its generator is ChaCha8 keyed by the run's master seed, with stream
//! number `FNV-1a-64(label) + i` for the `i`-th draw. Draws are therefore
//! independent of evaluation order and of the grid resolution: coefficients
//! are generated in a fixed wavevector order inside a fixed band.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::SpectralField;
use crate::spectral::Spectral;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// FNV-1a, 64-bit.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Generator for draw `index` of component `label` under `master` seed.
pub fn component_rng(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(label_hash(label).wrapping_add(index));
    rng
}

pub fn uniform(rng: &mut impl RngCore) -> f64 {
    // 53 random bits in (0, 1]
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let (u1, u2) = (uniform(rng), uniform(rng));
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Isotropic power-law energy spectra `E(k) ∝ k^β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumFamily {
    /// β = -1
    Shallow,
    /// β = -5/3
    Kolmogorov,
    /// β = -3
    Steep,
}

impl SpectrumFamily {
    pub const ALL: [SpectrumFamily; 3] = [SpectrumFamily::Shallow, SpectrumFamily::Kolmogorov, SpectrumFamily::Steep];

    pub fn exponent(self) -> f64 {
        match self {
            SpectrumFamily::Shallow => -1.0,
            SpectrumFamily::Kolmogorov => -5.0 / 3.0,
            SpectrumFamily::Steep => -3.0,
        }
    }

    /// Per-coefficient standard deviation at integer radius `k`: the shell
    /// holds ~2πk modes, so σ² ∝ E(k)/k.
    fn sigma(self, k: f64) -> f64 {
        (k.powf(self.exponent()) / (2.0 * PI * k)).sqrt()
    }
}

/// Whether coefficient phases are random or all zero (a cosine series that
/// peaks at the origin, the worst case for sup-norm bounds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phases {
    Random,
    Aligned,
}

/// Half-plane representatives `k` of the band `0 < |k| ≤ kmax`, in a fixed order.
fn band_modes(kmax: i64) -> impl Iterator<Item = (i64, i64)> {
    (-kmax..=kmax).flat_map(move |k1| (-kmax..=kmax).map(move |k2| (k1, k2))).filter(move |&(k1, k2)| {
        let r2 = k1 * k1 + k2 * k2;
        r2 > 0 && r2 <= kmax * kmax && (k1 > 0 || (k1 == 0 && k2 > 0))
    })
}

fn check_band(sp: &Spectral, kmax: i64) -> Result<()> {
    if kmax < 1 || kmax > sp.grid().dealias_cutoff() {
        return Err(Error::InvalidParameter {
            name: "kmax",
            reason: alloc::format!(
                "band limit {kmax} must lie in 1..={} for a {}-point grid",
                sp.grid().dealias_cutoff(),
                sp.grid().n()
            ),
        });
    }
    Ok(())
}

fn draw(rng: &mut impl RngCore, sigma: f64, phases: Phases) -> Complex64 {
    match phases {
        Phases::Random => Complex64::new(standard_normal(rng), standard_normal(rng)) * (sigma / 2f64.sqrt()),
        Phases::Aligned => Complex64::new(sigma * (0.5 + uniform(rng)), 0.0),
    }
}

fn normalized(sp: &Spectral, a: Vec<Complex64>, b: Vec<Complex64>) -> SpectralField {
    let mut f = SpectralField::from_parts_unchecked(*sp.grid(), a, b);
    let h = sp.norm_h(&f);
    if h > 0.0 {
        f.scale(1.0 / h);
    }
    f
}

/// Divergence-free field with `|u| = 1`, band-limited to `|k| ≤ kmax`.
pub fn random_solenoidal(sp: &Spectral, rng: &mut impl RngCore, family: SpectrumFamily, kmax: i64) -> SpectralField {
    random_solenoidal_with(sp, rng, family, kmax, Phases::Random)
}

pub fn random_solenoidal_with(
    sp: &Spectral,
    rng: &mut impl RngCore,
    family: SpectrumFamily,
    kmax: i64,
    phases: Phases,
) -> SpectralField {
    let g = *sp.grid();
    let kmax = kmax.min(g.dealias_cutoff());
    let mut a = vec![ZERO; g.len()];
    let mut b = vec![ZERO; g.len()];
    for (k1, k2) in band_modes(kmax) {
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        // stream-function coefficient times the unit direction k^⊥/|k|
        let c = draw(rng, family.sigma(r), phases);
        let (d1, d2) = (k2 as f64 / r, -(k1 as f64) / r);
        let (i, j) = (g.flat(k1, k2), g.flat(-k1, -k2));
        a[i] = c * d1;
        b[i] = c * d2;
        a[j] = a[i].conj();
        b[j] = b[i].conj();
    }
    normalized(sp, a, b)
}

/// Zero-mean field with independent components (not solenoidal), `|u| = 1`.
pub fn random_vector(sp: &Spectral, rng: &mut impl RngCore, family: SpectrumFamily, kmax: i64) -> SpectralField {
    let g = *sp.grid();
    let kmax = kmax.min(g.dealias_cutoff());
    let mut a = vec![ZERO; g.len()];
    let mut b = vec![ZERO; g.len()];
    for (k1, k2) in band_modes(kmax) {
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let s = family.sigma(r);
        let (i, j) = (g.flat(k1, k2), g.flat(-k1, -k2));
        a[i] = draw(rng, s, Phases::Random);
        b[i] = draw(rng, s, Phases::Random);
        a[j] = a[i].conj();
        b[j] = b[i].conj();
    }
    normalized(sp, a, b)
}

/// What an ensemble member looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldClass {
    Solenoidal,
    General,
    /// Scalar samples carried in the first component; the second is zero.
    Scalar,
}

/// A reproducible ensemble: member `i` depends only on `(seed, label, i)`.
///
/// Each member draws its spectrum exponent uniformly from
/// [`SpectrumFamily::ALL`] and is normalized to unit L² norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub size: usize,
    pub kmax: i64,
    pub class: FieldClass,
    /// Every `aligned_every`-th member (if nonzero) uses aligned phases.
    pub aligned_every: usize,
    pub label: &'static str,
}

impl EnsembleSpec {
    pub fn new(seed: u64, size: usize, kmax: i64, class: FieldClass) -> Self {
        EnsembleSpec { seed, size, kmax, class, aligned_every: 0, label: "ensemble" }
    }

    pub fn with_label(mut self, label: &'static str) -> Self {
        self.label = label;
        self
    }

    pub fn validate(&self, sp: &Spectral) -> Result<()> {
        if self.size == 0 {
            return Err(Error::EmptyEnsemble);
        }
        check_band(sp, self.kmax)
    }

    pub fn member(&self, sp: &Spectral, i: usize) -> SpectralField {
        let mut rng = component_rng(self.seed, self.label, i as u64);
        let family = SpectrumFamily::ALL[(rng.next_u32() % 3) as usize];
        let phases = if self.aligned_every > 0 && i % self.aligned_every == self.aligned_every - 1 {
            Phases::Aligned
        } else {
            Phases::Random
        };
        match self.class {
            FieldClass::Solenoidal => random_solenoidal_with(sp, &mut rng, family, self.kmax, phases),
            FieldClass::General => random_vector(sp, &mut rng, family, self.kmax),
            FieldClass::Scalar => {
                let g = *sp.grid();
                let kmax = self.kmax.min(g.dealias_cutoff());
                let mut a = vec![ZERO; g.len()];
                for (k1, k2) in band_modes(kmax) {
                    let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
                    let (i, j) = (g.flat(k1, k2), g.flat(-k1, -k2));
                    a[i] = draw(&mut rng, family.sigma(r), phases);
                    a[j] = a[i].conj();
                }
                normalized(sp, a, vec![ZERO; g.len()])
            }
        }
    }

    pub fn members<'a>(&'a self, sp: &'a Spectral) -> impl Iterator<Item = SpectralField> + 'a {
        (0..self.size).map(move |i| self.member(sp, i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn members_are_valid_unit_fields() {
        let sp = Spectral::new(Grid::new(32, 1.0).unwrap());
        for class in [FieldClass::Solenoidal, FieldClass::General, FieldClass::Scalar] {
            let e = EnsembleSpec::new(7, 5, 8, class);
            for f in e.members(&sp) {
                assert!((sp.norm_h(&f) - 1.0).abs() < 1e-13);
                assert_eq!(f.symmetry_defect(), 0.0);
                if class == FieldClass::Solenoidal {
                    assert!(f.divergence_max() < 1e-13 * f.max_abs() * sp.grid().kappa0() * 8.0);
                }
            }
        }
    }

    #[test]
    fn members_do_not_depend_on_resolution() {
        let a = Spectral::new(Grid::new(32, 1.0).unwrap());
        let b = Spectral::new(Grid::new(64, 1.0).unwrap());
        let e = EnsembleSpec::new(11, 3, 9, FieldClass::Solenoidal);
        for i in 0..3 {
            let (fa, fb) = (e.member(&a, i), e.member(&b, i));
            for (k1, k2) in band_modes(9) {
                assert_eq!(fa.coefficient(k1, k2), fb.coefficient(k1, k2));
            }
        }
    }

    #[test]
    fn empty_and_out_of_band_are_rejected() {
        let sp = Spectral::new(Grid::new(16, 1.0).unwrap());
        assert_eq!(EnsembleSpec::new(1, 0, 3, FieldClass::General).validate(&sp), Err(Error::EmptyEnsemble));
        assert!(EnsembleSpec::new(1, 4, 6, FieldClass::General).validate(&sp).is_err());
    }

    #[test]
    fn normal_draws_have_unit_variance() {
        let mut rng = component_rng(5, "normal-test", 0);
        let n = 20000;
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.05);
    }
}
