//! The trajectory space, the W map, `g(v) = ‖v − JW(v)‖_{X,0}` and the
//! determining-form evolution `dv/dt = −g(v)²(v − Ju*)`.

mod trajectory;

use alloc::collections::BTreeMap;
use core::cell::RefCell;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::dynamics::{Integration, SolverConfig};
use crate::field::SpectralField;
use crate::interp::InterpolantSpec;
use crate::ode::{integrate_scalar, Dp45Config};
use crate::params::{grashof, PhysicalParams};
use crate::spectral::Spectral;
use crate::{Error, Result};

pub use trajectory::{x_norms, Trajectory, XNorms};

/// Length of the relaxation run that precedes the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreWindow {
    Fixed(f64),
    /// Start at `initial` and double until the window restriction changes by
    /// less than `tol` (relative, in the sup-over-window `V` norm).
    Adaptive { initial: f64, tol: f64, max_doublings: u32 },
}

/// Parameters of the W map and the determining form.
#[derive(Debug, Clone, PartialEq)]
pub struct DFormConfig {
    pub solver: SolverConfig,
    pub pre_window: PreWindow,
    /// Measured scale `R = 2 max ‖Ju‖_X`.
    pub r: f64,
    /// Ball radius `ρ = 4R`.
    pub rho: f64,
    /// `K ≥ (2ρ² + G²/μ + 1)^{1/2}`.
    pub k: f64,
    /// Leading part of each window excluded from `g` and the W comparisons:
    /// before the data starts the driving trajectory is held at its first
    /// value, and the nudged solution needs this long to forget that.
    pub burn_in: f64,
}

impl DFormConfig {
    /// `ρ = 4R`, the smallest admissible `K` and a burn-in of `25/(μνκ₀²)`,
    /// over which the nudging factor `exp(−μνκ₀²s)` falls below `10⁻¹⁰`.
    /// Requires `μ > 0` and checks
    /// the interpolant condition `2μh²κ₀²(c₁² + c₂) < 1/2` with the measured
    /// constants attached to `j`.
    pub fn new(params: &PhysicalParams, j: &InterpolantSpec, solver: SolverConfig, pre_window: PreWindow, r: f64) -> Result<Self> {
        let rho = 4.0 * r;
        let g = grashof(params)?;
        if !(params.mu > 0.0) {
            return Err(Error::InvalidParameter { name: "mu", reason: "the W map needs μ > 0".into() });
        }
        let k = (2.0 * rho * rho + g * g / params.mu + 1.0).sqrt();
        let burn_in = 25.0 / (params.mu * params.nu * params.kappa0().powi(2));
        let cfg = DFormConfig { solver, pre_window, r, rho, k, burn_in };
        cfg.validate(params, j)?;
        Ok(cfg)
    }

    pub fn validate(&self, params: &PhysicalParams, j: &InterpolantSpec) -> Result<()> {
        self.solver.validate()?;
        let g = grashof(params)?;
        if !(params.mu > 0.0) {
            return Err(Error::InvalidParameter { name: "mu", reason: "the W map needs μ > 0".into() });
        }
        let kmin = (2.0 * self.rho * self.rho + g * g / params.mu + 1.0).sqrt();
        if !(self.k >= kmin * (1.0 - 1e-12)) {
            return Err(Error::Condition(format!("K = {} is below (2ρ² + G²/μ + 1)^(1/2) = {kmin}", self.k)));
        }
        let c = j
            .constants()
            .ok_or_else(|| Error::Condition("interpolant constants must be measured before building the W map".into()))?;
        let h = j.h();
        let lhs = 2.0 * params.mu * h * h * params.kappa0().powi(2) * (c.c1 * c.c1 + c.c2);
        if !(lhs < 0.5) {
            return Err(Error::Condition(format!("2μh²κ₀²(c₁²+c₂) = {lhs} is not below 1/2")));
        }
        if !(self.burn_in >= 0.0) {
            return Err(Error::InvalidParameter { name: "burn_in", reason: format!("must be non-negative, got {}", self.burn_in) });
        }
        match self.pre_window {
            PreWindow::Fixed(t) | PreWindow::Adaptive { initial: t, .. } if !(t >= 0.0) => {
                Err(Error::InvalidParameter { name: "pre_window", reason: format!("must be non-negative, got {t}") })
            }
            _ => Ok(()),
        }
    }
}

/// Index of the first sample at or after `s₀ + burn_in`.
pub fn first_evaluated(v: &Trajectory, cfg: &DFormConfig) -> Result<usize> {
    let i = (cfg.burn_in / v.ds() - 1e-9).ceil().max(0.0) as usize;
    if i >= v.len() {
        return Err(Error::EmptyWindow);
    }
    Ok(i)
}

/// Output of [`compute_w`].
#[derive(Debug, Clone, PartialEq)]
pub struct WOutput {
    pub w: Trajectory,
    /// Relaxation length actually used.
    pub pre_window: f64,
    /// Relative change of the window restriction at the last doubling.
    pub pre_window_change: Option<f64>,
    pub v_norms: XNorms,
    pub warnings: Vec<String>,
}

fn steps_per_sample(v: &Trajectory, dt: f64) -> Result<usize> {
    let m = (v.ds() / dt).round();
    if m < 1.0 || ((m * dt - v.ds()).abs() > 1e-9 * v.ds()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("time step {dt} must divide the sample spacing {}", v.ds()),
        });
    }
    Ok(m as usize)
}

/// Solves the nudged equation driven by `v` from `w = 0` at `s₀ − T_pre`
/// (`T_pre` rounded up to whole samples) and returns the solution on the
/// window with its exact derivative from the equation.
fn relaxed_w(sp: &Spectral, v: &Trajectory, params: &PhysicalParams, j: &InterpolantSpec, solver: &SolverConfig, t_pre: f64) -> Result<(Trajectory, Vec<String>)> {
    let m = steps_per_sample(v, solver.dt)?;
    let n_pre = (t_pre / v.ds() - 1e-9).ceil().max(0.0) as usize;
    let start = v.s0() - n_pre as f64 * v.ds();
    let mut run = Integration::nudged(sp, params, solver, j, v, SpectralField::zeros(*sp.grid()), start)?;
    let total = (n_pre + v.len() - 1) * m;
    let mut values = Vec::with_capacity(v.len());
    let mut derivs = Vec::with_capacity(v.len());
    for step in 0..=total {
        if step > 0 {
            run.step()?;
        }
        if step % m == 0 && step / m >= n_pre {
            values.push(run.fields()[0].clone());
            derivs.push(run.derivative(0)?);
        }
    }
    let warnings = run.take_warnings();
    Ok((Trajectory::new(v.s0(), v.ds(), values, derivs)?, warnings))
}

fn sup_relative_change(sp: &Spectral, a: &Trajectory, b: &Trajectory) -> f64 {
    let scale = b.values().iter().map(|f| sp.norm_v(f)).fold(0.0, f64::max);
    let diff = a.values().iter().zip(b.values()).map(|(x, y)| sp.norm_v(&(x - y))).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// `W(v)`: the bounded solution of the nudged equation driven by `v`,
/// approximated by relaxation from zero data before the window.
pub fn compute_w(sp: &Spectral, v: &Trajectory, params: &PhysicalParams, j: &InterpolantSpec, cfg: &DFormConfig) -> Result<WOutput> {
    let v_norms = x_norms(sp, v, params)?;
    let mut warnings = Vec::new();
    if v_norms.x > cfg.rho {
        warnings.push(format!("‖v‖_X = {} exceeds ρ = {}", v_norms.x, cfg.rho));
    }
    match cfg.pre_window {
        PreWindow::Fixed(t) => {
            let (w, wr) = relaxed_w(sp, v, params, j, &cfg.solver, t)?;
            warnings.extend(wr);
            Ok(WOutput { w, pre_window: t, pre_window_change: None, v_norms, warnings })
        }
        PreWindow::Adaptive { initial, tol, max_doublings } => {
            let (mut w, wr) = relaxed_w(sp, v, params, j, &cfg.solver, initial)?;
            warnings.extend(wr);
            let mut t = initial;
            let mut change = f64::INFINITY;
            for _ in 0..max_doublings.max(1) {
                let (w2, wr) = relaxed_w(sp, v, params, j, &cfg.solver, 2.0 * t)?;
                warnings.extend(wr);
                change = sup_relative_change(sp, &w, &w2);
                w = w2;
                t *= 2.0;
                if change < tol {
                    break;
                }
            }
            if !(change < tol) {
                warnings.push(format!("pre-window change {change:e} still above {tol:e} at T_pre = {t}"));
            }
            Ok(WOutput { w, pre_window: t, pre_window_change: Some(change), v_norms, warnings })
        }
    }
}

/// `g(v)` together with the computed `W(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GValue {
    pub g: f64,
    pub w: WOutput,
}

/// `g(v) = ‖v − JW(v)‖_{X,0}`, the maximum taken after the burn-in.
pub fn g_value(sp: &Spectral, v: &Trajectory, params: &PhysicalParams, j: &InterpolantSpec, cfg: &DFormConfig) -> Result<GValue> {
    let first = first_evaluated(v, cfg)?;
    let w = compute_w(sp, v, params, j, cfg)?;
    let scale = params.nu * params.kappa0();
    let mut g: f64 = 0.0;
    for (vi, wi) in v.values().iter().zip(w.w.values()).skip(first) {
        g = g.max(sp.norm_v(&(vi - &j.apply(sp, wi)?)));
    }
    Ok(GValue { g: g / scale, w })
}

/// `g(Ju)` for a computed solution `u`: zero exactly when `Ju` is a steady
/// state of the determining form.
pub fn steady_residual(sp: &Spectral, u_run: &Trajectory, params: &PhysicalParams, j: &InterpolantSpec, cfg: &DFormConfig) -> Result<f64> {
    let ju = u_run.map_linear(|f| j.apply(sp, f))?;
    Ok(g_value(sp, &ju, params, j, cfg)?.g)
}

/// Samples an NSE solution from `u0` at `s0`: `n` samples `ds` apart, with
/// exact derivatives from the equation.
pub fn reference_trajectory(sp: &Spectral, u0: &SpectralField, params: &PhysicalParams, solver: &SolverConfig, s0: f64, ds: f64, n: usize) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    let probe = Trajectory::constant(s0, ds, 1, u0)?;
    let m = steps_per_sample(&probe, solver.dt)?;
    let mut run = Integration::nse(sp, params, solver, u0.clone(), s0)?;
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            for _ in 0..m {
                run.step()?;
            }
        }
        values.push(run.fields()[0].clone());
        derivs.push(run.derivative(0)?);
    }
    Trajectory::new(s0, ds, values, derivs)
}

/// Discretization floor of `g(Ju)` from one refinement of `dt` and `Δs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub g_base: f64,
    pub g_refined: f64,
    /// `max(10·|g_base − g_refined|, 10⁻¹²·‖Ju‖_{X,0})`
    pub eps_disc: f64,
}

/// Computes `g(Ju)` for the NSE solution from `u0` on a window of `n`
/// samples, at `(dt, Δs)` and at `(dt/2, Δs/2)` over the same window.
#[allow(clippy::too_many_arguments)]
pub fn refinement_floor(
    sp: &Spectral,
    u0: &SpectralField,
    params: &PhysicalParams,
    j: &InterpolantSpec,
    cfg: &DFormConfig,
    s0: f64,
    ds: f64,
    n: usize,
) -> Result<Refinement> {
    let base = reference_trajectory(sp, u0, params, &cfg.solver, s0, ds, n)?;
    let g_base = steady_residual(sp, &base, params, j, cfg)?;
    let fine_solver = SolverConfig { dt: cfg.solver.dt / 2.0, ..cfg.solver.clone() };
    let fine_cfg = DFormConfig { solver: fine_solver.clone(), ..cfg.clone() };
    let fine = reference_trajectory(sp, u0, params, &fine_solver, s0, ds / 2.0, 2 * n - 1)?;
    let g_refined = steady_residual(sp, &fine, params, j, &fine_cfg)?;
    let ju_scale = x_norms(sp, &base.map_linear(|f| j.apply(sp, f))?, params)?.x0;
    let eps_disc = (10.0 * (g_base - g_refined).abs()).max(1e-12 * ju_scale);
    Ok(Refinement { g_base, g_refined, eps_disc })
}

/// One accepted step of the determining-form evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionRow {
    pub t: f64,
    pub a: f64,
    pub g: f64,
    pub dadt: f64,
    /// `‖v(t) − Ju*‖_X = |a|·‖v₀ − Ju*‖_X`
    pub xnorm_dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// `|da/dt|` fell below the stopping tolerance.
    Converged,
    TimeLimit,
    /// `v₀ = Ju*`: nothing to evolve.
    FixedPoint,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub rows: Vec<EvolutionRow>,
    pub termination: Termination,
    /// `‖v₀ − Ju*‖_X`
    pub initial_distance: f64,
    /// Number of distinct W solves.
    pub g_evaluations: usize,
    pub warnings: Vec<String>,
}

/// Options of the scalar ray integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub ode: Dp45Config,
    /// Stop once `|da/dt|` drops below this.
    pub stop_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { ode: Dp45Config { rtol: 1e-6, atol: 1e-12, initial_step: 1e-2, ..Default::default() }, stop_tol: 1e-8 }
    }
}

/// Integrates `dv/dt = −g(v)²(v − Ju*)` from `v₀`. The solution stays on the
/// ray `v = Ju* + a(t)(v₀ − Ju*)`, so only the scalar `da/dt = −g²a` with
/// `a(0) = 1` is integrated. A failing `g` evaluation ends the run with the
/// rows accepted so far.
#[allow(clippy::too_many_arguments)]
pub fn evolve_determining_form(
    sp: &Spectral,
    v0: &Trajectory,
    u_star: &SpectralField,
    t_end: f64,
    params: &PhysicalParams,
    j: &InterpolantSpec,
    cfg: &DFormConfig,
    opts: &EvolveOptions,
) -> Result<EvolutionRecord> {
    let ju_star = j.apply(sp, u_star)?;
    let base = Trajectory::constant(v0.s0(), v0.ds(), v0.len(), &ju_star)?;
    let d = v0.axpy(-1.0, &base)?;
    let dist = x_norms(sp, &d, params)?.x;
    let mut warnings = Vec::new();
    if dist >= 3.0 * cfg.r {
        warnings.push(format!("‖v₀ − Ju*‖_X = {dist} is not below 3R = {}", 3.0 * cfg.r));
    }
    if dist == 0.0 {
        let g = g_value(sp, v0, params, j, cfg)?.g;
        return Ok(EvolutionRecord {
            rows: alloc::vec![EvolutionRow { t: 0.0, a: 1.0, g, dadt: 0.0, xnorm_dist: 0.0 }],
            termination: Termination::FixedPoint,
            initial_distance: 0.0,
            g_evaluations: 1,
            warnings,
        });
    }
    // g per trial value of a; the observer reads the value at accepted points
    let cache: RefCell<BTreeMap<u64, f64>> = RefCell::new(BTreeMap::new());
    let eval = |a: f64| -> Result<f64> {
        if let Some(&g) = cache.borrow().get(&a.to_bits()) {
            return Ok(g);
        }
        let v = base.axpy(a, &d)?;
        let g = g_value(sp, &v, params, j, cfg)?.g;
        cache.borrow_mut().insert(a.to_bits(), g);
        Ok(g)
    };
    let mut rows: Vec<EvolutionRow> = Vec::new();
    let mut converged = false;
    let result = integrate_scalar(
        |_, a| {
            let g = eval(a)?;
            Ok(-g * g * a)
        },
        0.0,
        1.0,
        t_end,
        &opts.ode,
        |p| {
            let g = cache.borrow().get(&p.y.to_bits()).copied().unwrap_or(f64::NAN);
            rows.push(EvolutionRow { t: p.t, a: p.y, g, dadt: p.dydt, xnorm_dist: p.y.abs() * dist });
            converged = p.dydt.abs() < opts.stop_tol;
            !converged
        },
    );
    let termination = match result {
        Ok(_) if converged => Termination::Converged,
        Ok(_) => Termination::TimeLimit,
        Err(e) => Termination::Failed(format!("{e}")),
    };
    let evaluations = cache.borrow().len();
    Ok(EvolutionRecord { rows, termination, initial_distance: dist, g_evaluations: evaluations, warnings })
}

/// Norms of `w` per sample: `(s, ‖w‖, ‖w'‖, |Aw|)`.
pub fn w_audit(sp: &Spectral, w: &Trajectory) -> Vec<(f64, f64, f64, f64)> {
    (0..w.len())
        .map(|i| (w.s_at(i), sp.norm_v(&w.values()[i]), sp.norm_v(&w.derivs()[i]), sp.norm_a(&w.values()[i])))
        .collect()
}

/// Observed `sup_s ‖w(s)‖` against both candidate bounds of the W map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WBounds {
    pub sup_norm_w: f64,
    /// `νκ₀K`, the bound derived for `‖w(s)‖`.
    pub derived: f64,
    /// `ν²κ₀²K²`, the form listed with the theorem.
    pub listed: f64,
}

pub fn w_bounds(sp: &Spectral, w: &Trajectory, params: &PhysicalParams, cfg: &DFormConfig) -> WBounds {
    let (nu, k0) = (params.nu, params.kappa0());
    WBounds {
        sup_norm_w: w.values().iter().map(|f| sp.norm_v(f)).fold(0.0, f64::max),
        derived: nu * k0 * cfg.k,
        listed: nu * nu * k0 * k0 * cfg.k * cfg.k,
    }
}

/// `sup_s ‖W(base + η·dir)(s) − W(base)(s)‖ / (νκ₀ η ‖dir‖_X)` for each `η`,
/// the supremum taken after the burn-in.
pub fn lipschitz_ratios(
    sp: &Spectral,
    base: &Trajectory,
    dir: &Trajectory,
    etas: &[f64],
    params: &PhysicalParams,
    j: &InterpolantSpec,
    cfg: &DFormConfig,
) -> Result<Vec<(f64, f64)>> {
    let first = first_evaluated(base, cfg)?;
    let w0 = compute_w(sp, base, params, j, cfg)?.w;
    let dn = x_norms(sp, dir, params)?.x;
    if dn == 0.0 {
        return Err(Error::InvalidParameter { name: "direction", reason: "perturbation direction is zero".into() });
    }
    let scale = params.nu * params.kappa0();
    etas.iter()
        .map(|&eta| {
            let w = compute_w(sp, &base.axpy(eta, dir)?, params, j, cfg)?.w;
            let diff = w.values().iter().zip(w0.values()).skip(first).map(|(a, b)| sp.norm_v(&(a - b))).fold(0.0, f64::max);
            Ok((eta, diff / (scale * eta * dn)))
        })
        .collect()
}
