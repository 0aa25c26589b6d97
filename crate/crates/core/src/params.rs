use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::field::{SpectralField, VectorField};
use crate::spectral::Spectral;
use crate::{Error, Result};

/// Body force. All variants have zero mean; the field handed to the
/// dynamics is the Leray projection.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    None,
    /// `f = a (sin(2π j x₂ / L), 0)`, an eigenfunction of the Stokes operator.
    Kolmogorov { mode: u32, amplitude: f64 },
    /// Explicit Fourier modes `(k₁, k₂, [f̂₁, f̂₂])`; conjugates are implied.
    Modes(Vec<(i64, i64, [Complex64; 2])>),
}

/// Viscosity, domain, forcing and the nudging strength.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub nu: f64,
    pub length: f64,
    pub forcing: ForcingSpec,
    /// Dimensionless relaxation coefficient; the feedback term is `μνκ₀² 𝒫(Jw − v)`.
    pub mu: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, length: f64, forcing: ForcingSpec, mu: f64) -> Result<Self> {
        let p = PhysicalParams { nu, length, forcing, mu };
        p.validate()?;
        Ok(p)
    }

    /// Kolmogorov forcing at mode `j` with amplitude chosen so that the
    /// Grashof number equals `grashof`.
    pub fn kolmogorov(nu: f64, length: f64, mode: u32, grashof: f64, mu: f64) -> Result<Self> {
        if mode == 0 {
            return Err(Error::InvalidParameter { name: "forcing mode", reason: "must be ≥ 1".into() });
        }
        let k0 = 2.0 * core::f64::consts::PI / length;
        // |f| = a L / √2
        let amplitude = grashof * nu * nu * k0 * k0 * 2f64.sqrt() / length;
        Self::new(nu, length, ForcingSpec::Kolmogorov { mode, amplitude }, mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter { name: "nu", reason: format!("viscosity must be positive, got {}", self.nu) });
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParameter { name: "L", reason: format!("length must be positive, got {}", self.length) });
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter { name: "mu", reason: format!("must be non-negative, got {}", self.mu) });
        }
        Ok(())
    }

    pub fn kappa0(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.length
    }

    /// `|f|` of the projected forcing, evaluated from the spec.
    pub fn forcing_norm(&self) -> f64 {
        match &self.forcing {
            ForcingSpec::None => 0.0,
            ForcingSpec::Kolmogorov { amplitude, .. } => amplitude.abs() * self.length / 2f64.sqrt(),
            ForcingSpec::Modes(modes) => {
                let mut s = 0.0;
                for &(k1, k2, c) in modes {
                    let r2 = (k1 * k1 + k2 * k2) as f64;
                    if r2 == 0.0 {
                        continue;
                    }
                    let (kx, ky) = (k1 as f64, k2 as f64);
                    let dot = (c[0] * kx + c[1] * ky) / r2;
                    let p = [c[0] - dot * kx, c[1] - dot * ky];
                    // the mode and its conjugate partner
                    s += 2.0 * (p[0].norm_sqr() + p[1].norm_sqr());
                }
                self.length * s.sqrt()
            }
        }
    }

    /// The projected forcing on the grid of `sp`.
    pub fn forcing_field(&self, sp: &Spectral) -> Result<SpectralField> {
        let g = *sp.grid();
        match &self.forcing {
            ForcingSpec::None => Ok(SpectralField::zeros(g)),
            ForcingSpec::Kolmogorov { mode, amplitude } => {
                // a sin(j κ₀ x₂) = a/(2i) e^{i j κ₀ x₂} + c.c.
                SpectralField::single_mode(g, 0, *mode as i64, [Complex64::new(0.0, -amplitude / 2.0), Complex64::new(0.0, 0.0)])
            }
            ForcingSpec::Modes(modes) => {
                let mut f = VectorField::zeros(g);
                let half = (g.n() / 2) as i64;
                for &(k1, k2, c) in modes {
                    if (k1, k2) == (0, 0) {
                        return Err(Error::NonzeroMean(c[0].norm().max(c[1].norm())));
                    }
                    if k1.abs() >= half || k2.abs() >= half {
                        return Err(Error::InvalidParameter {
                            name: "forcing",
                            reason: format!("mode ({k1},{k2}) not representable on a {}-point grid", g.n()),
                        });
                    }
                    let (i, j) = (g.flat(k1, k2), g.flat(-k1, -k2));
                    for comp in 0..2 {
                        f.component_mut(comp)[i] += c[comp];
                        f.component_mut(comp)[j] += c[comp].conj();
                    }
                }
                sp.leray_project(&f)
            }
        }
    }

    /// The exact steady state `u* = f/(νλ_j)` when the forcing is a Stokes
    /// eigenfunction with vanishing self-advection (Kolmogorov or no forcing).
    pub fn steady_state(&self, sp: &Spectral) -> Result<Option<SpectralField>> {
        match &self.forcing {
            ForcingSpec::None => Ok(Some(SpectralField::zeros(*sp.grid()))),
            ForcingSpec::Kolmogorov { mode, .. } => {
                let lambda = (*mode as f64 * self.kappa0()).powi(2);
                let mut f = self.forcing_field(sp)?;
                f.scale(1.0 / (self.nu * lambda));
                Ok(Some(f))
            }
            ForcingSpec::Modes(_) => Ok(None),
        }
    }
}

/// Grashof number `G = |f| / (ν² κ₀²)`.
pub fn grashof(params: &PhysicalParams) -> Result<f64> {
    if !(params.nu > 0.0) {
        return Err(Error::InvalidParameter { name: "nu", reason: format!("viscosity must be positive, got {}", params.nu) });
    }
    if !(params.length > 0.0) {
        return Err(Error::InvalidParameter { name: "L", reason: format!("length must be positive, got {}", params.length) });
    }
    let k0 = params.kappa0();
    Ok(params.forcing_norm() / (params.nu * params.nu * k0 * k0))
}
