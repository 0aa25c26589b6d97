//! Adaptive Dormand–Prince 5(4) for a scalar ODE `y' = f(t, y)`.

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dp45Config {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dp45Config {
    fn default() -> Self {
        Dp45Config { rtol: 1e-6, atol: 1e-12, initial_step: 1e-3, max_step: f64::INFINITY, max_steps: 100_000 }
    }
}

/// An accepted point of the integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPoint {
    pub t: f64,
    pub y: f64,
    pub dydt: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `(t0, y0)` towards `t_end`. `observe` sees every accepted
/// point, starting with the initial one, and stops the run by returning
/// `false`. The right-hand side may fail; the error is propagated after the
/// points accepted so far have been observed.
pub fn integrate_scalar<F, O>(mut f: F, t0: f64, y0: f64, t_end: f64, cfg: &Dp45Config, mut observe: O) -> Result<ScalarPoint>
where
    F: FnMut(f64, f64) -> Result<f64>,
    O: FnMut(&ScalarPoint) -> bool,
{
    if !(cfg.rtol > 0.0 && cfg.atol >= 0.0 && cfg.initial_step > 0.0) {
        return Err(Error::InvalidParameter { name: "dp45", reason: "tolerances and initial step must be positive".into() });
    }
    let mut p = ScalarPoint { t: t0, y: y0, dydt: f(t0, y0)? };
    if !observe(&p) || t0 >= t_end {
        return Ok(p);
    }
    let mut h = cfg.initial_step.min(cfg.max_step);
    let mut k = [0.0; 7];
    for _ in 0..cfg.max_steps {
        h = h.min(t_end - p.t);
        k[0] = p.dydt;
        for s in 1..7 {
            let y = p.y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(p.t + C[s] * h, y)?;
        }
        // the last stage is evaluated at the fifth-order solution (FSAL)
        let y_new = p.y + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let err = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
        let scale = cfg.atol + cfg.rtol * p.y.abs().max(y_new.abs());
        let ratio = (err / scale).abs();
        if !ratio.is_finite() {
            return Err(Error::Blowup { time: p.t, step: 0, what: "scalar ODE".into() });
        }
        if ratio <= 1.0 {
            p = ScalarPoint { t: p.t + h, y: y_new, dydt: k[6] };
            if !observe(&p) || p.t >= t_end {
                return Ok(p);
            }
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(cfg.max_step);
        if h < 1e-14 * p.t.abs().max(1.0) {
            return Err(Error::Condition("step size underflow in the scalar ODE".into()));
        }
    }
    Err(Error::Condition("scalar ODE exceeded the step budget".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let cfg = Dp45Config { rtol: 1e-10, atol: 1e-14, ..Default::default() };
        let end = integrate_scalar(|_, y| Ok(-2.0 * y), 0.0, 1.0, 3.0, &cfg, |_| true).unwrap();
        assert_eq!(end.t, 3.0);
        assert!((end.y - (-6f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn cubic_decay_is_monotone() {
        // y' = -y³ has y = 1/sqrt(1 + 2t)
        let mut last = f64::INFINITY;
        let cfg = Dp45Config::default();
        let end = integrate_scalar(
            |_, y| Ok(-y * y * y),
            0.0,
            1.0,
            1e6,
            &cfg,
            |p| {
                assert!(p.y <= last && p.dydt <= 0.0);
                last = p.y;
                true
            },
        )
        .unwrap();
        let exact = 1.0 / (1.0 + 2e6f64).sqrt();
        assert!((end.y - exact).abs() < 1e-5 * exact);
    }

    #[test]
    fn observer_stops_early_and_errors_propagate() {
        let cfg = Dp45Config::default();
        let p = integrate_scalar(|_, y| Ok(-y), 0.0, 1.0, 10.0, &cfg, |p| p.y > 0.5).unwrap();
        assert!(p.y <= 0.5 && p.t < 10.0);
        let r = integrate_scalar(|t, _| if t > 1.0 { Err(Error::EmptyWindow) } else { Ok(1.0) }, 0.0, 0.0, 5.0, &cfg, |_| true);
        assert_eq!(r, Err(Error::EmptyWindow));
    }
}
