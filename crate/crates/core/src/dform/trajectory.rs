use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::dynamics::FieldSource;
use crate::field::SpectralField;
use crate::params::PhysicalParams;
use crate::spectral::Spectral;
use crate::{Error, Result};

/// Uniform samples `v(s₀ + iΔs)` of a trajectory with their `s`-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    s0: f64,
    ds: f64,
    values: Vec<SpectralField>,
    derivs: Vec<SpectralField>,
}

/// `‖v‖_X` and `‖v‖_{X,0}` over the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XNorms {
    pub x: f64,
    pub x0: f64,
}

impl Trajectory {
    pub fn new(s0: f64, ds: f64, values: Vec<SpectralField>, derivs: Vec<SpectralField>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if !(ds > 0.0 && ds.is_finite()) {
            return Err(Error::InvalidParameter { name: "ds", reason: format!("sample spacing must be positive, got {ds}") });
        }
        if derivs.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "trajectory",
                reason: format!("{} values but {} derivatives", values.len(), derivs.len()),
            });
        }
        let g = *values[0].grid();
        for f in values.iter().chain(&derivs) {
            g.ensure_same(f.grid())?;
        }
        Ok(Trajectory { s0, ds, values, derivs })
    }

    /// `v(s) = φ` on `n` samples, zero derivative.
    pub fn constant(s0: f64, ds: f64, n: usize, field: &SpectralField) -> Result<Self> {
        let zero = SpectralField::zeros(*field.grid());
        Self::new(s0, ds, alloc::vec![field.clone(); n], alloc::vec![zero; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn s_end(&self) -> f64 {
        self.s_at(self.len() - 1)
    }

    pub fn s_at(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.ds
    }

    pub fn values(&self) -> &[SpectralField] {
        &self.values
    }

    pub fn derivs(&self) -> &[SpectralField] {
        &self.derivs
    }

    fn same_window(&self, other: &Trajectory) -> Result<()> {
        if self.len() != other.len() || self.s0.to_bits() != other.s0.to_bits() || self.ds.to_bits() != other.ds.to_bits() {
            return Err(Error::InvalidParameter {
                name: "trajectory",
                reason: format!(
                    "windows differ: [{}, {}]/{} vs [{}, {}]/{}",
                    self.s0,
                    self.s_end(),
                    self.len(),
                    other.s0,
                    other.s_end(),
                    other.len()
                ),
            });
        }
        Ok(())
    }

    /// `self + a·other` on the same window.
    pub fn axpy(&self, a: f64, other: &Trajectory) -> Result<Trajectory> {
        self.same_window(other)?;
        let mut out = self.clone();
        for (x, y) in out.values.iter_mut().zip(&other.values) {
            x.axpy(a, y);
        }
        for (x, y) in out.derivs.iter_mut().zip(&other.derivs) {
            x.axpy(a, y);
        }
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> Trajectory {
        let mut out = self.clone();
        out.values.iter_mut().chain(out.derivs.iter_mut()).for_each(|f| f.scale(a));
        out
    }

    /// Applies a linear, time-independent operator to values and derivatives.
    pub fn map_linear<F>(&self, mut op: F) -> Result<Trajectory>
    where
        F: FnMut(&SpectralField) -> Result<SpectralField>,
    {
        let values = self.values.iter().map(&mut op).collect::<Result<Vec<_>>>()?;
        let derivs = self.derivs.iter().map(&mut op).collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.s0, self.ds, values, derivs)
    }

    /// Largest relative mismatch between centred differences of the values
    /// and the stored derivatives at interior samples, in the H norm.
    pub fn derivative_mismatch(&self, sp: &Spectral) -> f64 {
        let scale = self.derivs.iter().map(|d| sp.norm_h(d)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        (1..self.len().saturating_sub(1))
            .map(|i| {
                let mut fd = &self.values[i + 1] - &self.values[i - 1];
                fd.scale(0.5 / self.ds);
                sp.norm_h(&(&fd - &self.derivs[i])) / scale
            })
            .fold(0.0, f64::max)
    }

    /// Cubic Hermite interpolation inside the window, the left endpoint
    /// value before it, and [`Error::ProviderGap`] after it.
    pub fn at(&self, s: f64) -> Result<SpectralField> {
        let x = (s - self.s0) / self.ds;
        let last = (self.len() - 1) as f64;
        if x <= 0.0 {
            return Ok(self.values[0].clone());
        }
        if x > last + 1e-9 {
            return Err(Error::ProviderGap(s));
        }
        let x = x.min(last);
        let i = (x.floor() as usize).min(self.len().saturating_sub(2));
        let t = x - i as f64;
        if self.len() == 1 || t == 0.0 {
            return Ok(self.values[i].clone());
        }
        if t == 1.0 {
            return Ok(self.values[i + 1].clone());
        }
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut out = self.values[i].clone();
        out.scale(h00);
        out.axpy(h10 * self.ds, &self.derivs[i]);
        out.axpy(h01, &self.values[i + 1]);
        out.axpy(h11 * self.ds, &self.derivs[i + 1]);
        Ok(out)
    }
}

impl FieldSource for Trajectory {
    fn field_at(&self, s: f64) -> Result<SpectralField> {
        self.at(s)
    }
}

/// `‖v‖_{X,0} = max_s ‖v(s)‖/(νκ₀)` and `‖v‖_X = ‖v‖_{X,0} + max_s ‖v'(s)‖/(ν²κ₀³)`.
pub fn x_norms(sp: &Spectral, v: &Trajectory, params: &PhysicalParams) -> Result<XNorms> {
    if v.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let (nu, k0) = (params.nu, params.kappa0());
    let x0 = v.values.iter().map(|f| sp.norm_v(f)).fold(0.0, f64::max) / (nu * k0);
    let d = v.derivs.iter().map(|f| sp.norm_v(f)).fold(0.0, f64::max) / (nu * nu * k0 * k0 * k0);
    Ok(XNorms { x: x0 + d, x0 })
}
