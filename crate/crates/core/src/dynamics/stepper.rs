//! Time steppers for systems `du_i/dt = -L_i u_i + f_i + N_i(t, u)` where
//! `L_i` is diagonal in Fourier space and `f_i` is time independent.
//!
//! Both schemes advance `q_i = u_i − L_i⁻¹ f_i`, so the constant forcing is
//! integrated exactly and a steady balance `L u = f + N(u)` with `N(u) = 0`
//! stays fixed to round-off.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::field::SpectralField;
use crate::Result;

/// Time discretization of the nonlinear and feedback terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Crank–Nicolson for the linear part, second-order Adams–Bashforth
    /// for the rest; the first step uses forward Euler for the rest.
    Cnab2,
    /// Integrating-factor (Lawson) fourth-order Runge–Kutta.
    IfRk4,
}

pub(crate) struct LinearPart {
    /// `L` per flat mode index.
    pub decay: Vec<f64>,
    /// `L⁻¹ f`, absent for unforced fields.
    pub offset: Option<SpectralField>,
}

pub(crate) struct Stepper {
    integrator: Integrator,
    dt: f64,
    parts: Vec<LinearPart>,
    e_full: Vec<Vec<f64>>,
    e_half: Vec<Vec<f64>>,
    cn_explicit: Vec<Vec<f64>>,
    cn_implicit_inv: Vec<Vec<f64>>,
    previous: Option<Vec<SpectralField>>,
}

fn scaled(a: &SpectralField, factors: &[f64]) -> SpectralField {
    let mut out = a.clone();
    out.scale_modes(factors);
    out
}

impl Stepper {
    pub fn new(integrator: Integrator, dt: f64, parts: Vec<LinearPart>) -> Self {
        let map = |f: &dyn Fn(f64) -> f64| -> Vec<Vec<f64>> {
            parts.iter().map(|p| p.decay.iter().map(|&l| f(l)).collect()).collect()
        };
        let e_full = map(&|l| (-l * dt).exp());
        let e_half = map(&|l| (-l * dt / 2.0).exp());
        let cn_explicit = map(&|l| 1.0 - l * dt / 2.0);
        let cn_implicit_inv = map(&|l| 1.0 / (1.0 + l * dt / 2.0));
        Stepper { integrator, dt, parts, e_full, e_half, cn_explicit, cn_implicit_inv, previous: None }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn shifted(&self, u: &[SpectralField]) -> Vec<SpectralField> {
        u.iter()
            .zip(&self.parts)
            .map(|(f, p)| match &p.offset {
                Some(o) => f - o,
                None => f.clone(),
            })
            .collect()
    }

    fn unshift(&self, q: &mut [SpectralField]) {
        for (f, p) in q.iter_mut().zip(&self.parts) {
            if let Some(o) = &p.offset {
                f.axpy(1.0, o);
            }
        }
    }

    /// Advances `u` from `t` to `t + dt`.
    pub fn step<F>(&mut self, t: f64, u: &mut [SpectralField], rhs: &mut F) -> Result<()>
    where
        F: FnMut(f64, &[SpectralField], &mut [SpectralField]) -> Result<()>,
    {
        match self.integrator {
            Integrator::IfRk4 => self.step_rk4(t, u, rhs),
            Integrator::Cnab2 => self.step_cnab2(t, u, rhs),
        }
    }

    fn step_rk4<F>(&mut self, t: f64, u: &mut [SpectralField], rhs: &mut F) -> Result<()>
    where
        F: FnMut(f64, &[SpectralField], &mut [SpectralField]) -> Result<()>,
    {
        let h = self.dt;
        let m = u.len();
        let q = self.shifted(u);
        let mut a = u.to_vec();
        rhs(t, u, &mut a)?;

        let mut q2: Vec<SpectralField> = (0..m)
            .map(|i| {
                let mut x = q[i].clone();
                x.axpy(h / 2.0, &a[i]);
                x.scale_modes(&self.e_half[i]);
                x
            })
            .collect();
        self.unshift(&mut q2);
        let mut b = u.to_vec();
        rhs(t + h / 2.0, &q2, &mut b)?;

        let eq_half: Vec<SpectralField> = (0..m).map(|i| scaled(&q[i], &self.e_half[i])).collect();
        let mut q3: Vec<SpectralField> = (0..m)
            .map(|i| {
                let mut x = eq_half[i].clone();
                x.axpy(h / 2.0, &b[i]);
                x
            })
            .collect();
        self.unshift(&mut q3);
        let mut c = u.to_vec();
        rhs(t + h / 2.0, &q3, &mut c)?;

        let mut q4: Vec<SpectralField> = (0..m)
            .map(|i| {
                let mut x = scaled(&q[i], &self.e_full[i]);
                x.axpy(h, &scaled(&c[i], &self.e_half[i]));
                x
            })
            .collect();
        self.unshift(&mut q4);
        let mut d = u.to_vec();
        rhs(t + h, &q4, &mut d)?;

        for i in 0..m {
            // E q + h/6 (E a + 2 E½ (b + c) + d)
            let mut bc = b[i].clone();
            bc.axpy(1.0, &c[i]);
            bc.scale_modes(&self.e_half[i]);
            let mut acc = a[i].clone();
            acc.scale_modes(&self.e_full[i]);
            acc.axpy(2.0, &bc);
            acc.axpy(1.0, &d[i]);
            let mut next = scaled(&q[i], &self.e_full[i]);
            next.axpy(h / 6.0, &acc);
            if let Some(o) = &self.parts[i].offset {
                next.axpy(1.0, o);
            }
            u[i] = next;
        }
        Ok(())
    }

    fn step_cnab2<F>(&mut self, t: f64, u: &mut [SpectralField], rhs: &mut F) -> Result<()>
    where
        F: FnMut(f64, &[SpectralField], &mut [SpectralField]) -> Result<()>,
    {
        let h = self.dt;
        let q = self.shifted(u);
        let mut n_now = u.to_vec();
        rhs(t, u, &mut n_now)?;
        for i in 0..u.len() {
            let mut next = scaled(&q[i], &self.cn_explicit[i]);
            match &self.previous {
                Some(prev) => {
                    next.axpy(1.5 * h, &n_now[i]);
                    next.axpy(-0.5 * h, &prev[i]);
                }
                None => next.axpy(h, &n_now[i]),
            }
            next.scale_modes(&self.cn_implicit_inv[i]);
            u[i] = next;
        }
        self.unshift(u);
        self.previous = Some(n_now);
        Ok(())
    }

    /// Exact field derivative `-L(u − L⁻¹f) + N(t, u)` for field `i`.
    pub fn derivative(&self, i: usize, u: &SpectralField, nonlinear: &SpectralField) -> SpectralField {
        let mut out = match &self.parts[i].offset {
            Some(o) => u - o,
            None => u.clone(),
        };
        out.scale_modes(&self.parts[i].decay);
        out.scale(-1.0);
        out.axpy(1.0, nonlinear);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    fn single(g: Grid, c: f64) -> SpectralField {
        SpectralField::single_mode(g, 1, 0, [Complex64::new(0.0, 0.0), Complex64::new(c, 0.0)]).unwrap()
    }

    /// du/dt = -λu + f + cos(t)·e: exact solution by variation of constants.
    fn run(integrator: Integrator, dt: f64) -> f64 {
        let g = Grid::new(16, 2.0 * core::f64::consts::PI).unwrap();
        let lam = 3.0;
        let decay: Vec<f64> = (0..g.len()).map(|i| g.k_squared(i) * lam).collect();
        let f = single(g, 0.7);
        let offset = {
            let mut o = f.clone();
            o.scale(1.0 / lam);
            o
        };
        let mut st = Stepper::new(integrator, dt, alloc::vec![LinearPart { decay, offset: Some(offset) }]);
        let mut u = alloc::vec![single(g, 0.2)];
        let e = single(g, 1.0);
        let steps = (1.0 / dt).round() as usize;
        for s in 0..steps {
            st.step(s as f64 * dt, &mut u, &mut |t, _, out| {
                out[0] = e.clone();
                out[0].scale(t.cos());
                Ok(())
            })
            .unwrap();
        }
        // u(t) = e^{-λt}u₀ + (1 − e^{-λt}) f/λ + ∫ e^{-λ(t−s)} cos s ds
        let t = 1.0;
        let el = (-lam * t).exp();
        let forced = (lam * t.cos() + t.sin() - lam * el) / (lam * lam + 1.0);
        let exact = el * 0.2 + (1.0 - el) * 0.7 / lam + forced;
        (u[0].coefficient(1, 0)[1].re - exact).abs()
    }

    #[test]
    fn convergence_orders() {
        let (a, b) = (run(Integrator::IfRk4, 0.05), run(Integrator::IfRk4, 0.025));
        assert!((a / b).log2() > 3.7, "rk4 order {}", (a / b).log2());
        let (a, b) = (run(Integrator::Cnab2, 0.01), run(Integrator::Cnab2, 0.005));
        assert!((a / b).log2() > 1.8, "cnab2 order {}", (a / b).log2());
    }
}
