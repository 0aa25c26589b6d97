//! Time integration of the Navier–Stokes equations and of the nudged
//! equation `dw/ds + νAw + B(w,w) = f − μνκ₀² 𝒫(Jw − v)`.

mod stepper;
mod sync;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::ensemble::{component_rng, random_solenoidal, SpectrumFamily};
use crate::field::SpectralField;
use crate::interp::{InterpolantKind, InterpolantSpec};
use crate::params::{grashof, PhysicalParams};
use crate::spectral::Spectral;
use crate::{Error, Result};

pub use stepper::Integrator;
use stepper::{LinearPart, Stepper};
pub use sync::{
    fit_decay_rate, run_cell, sync_experiment, threshold_sweep, DecayRecord, DecayRow, PhaseRow, SweepCell, SyncConfig,
    SyncStatus, WInit,
};

/// How the feedback term `−μνκ₀²𝒫Jw` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    /// Treated with the nonlinear term; requires `dt < 1/(μνκ₀²)`.
    Explicit,
    /// Folded into the diagonal linear part. Only for the modal projection,
    /// which commutes with `𝒫` and is diagonal in Fourier space.
    ImplicitModal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub resolution: usize,
    pub dt: f64,
    pub integrator: Integrator,
    pub feedback: FeedbackMode,
    pub spin_up_time: f64,
    pub seed: u64,
    /// Steps between recorded samples.
    pub sample_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            resolution: 64,
            dt: 5e-3,
            integrator: Integrator::IfRk4,
            feedback: FeedbackMode::Explicit,
            spin_up_time: 20.0,
            seed: 0,
            sample_every: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("time step must be positive, got {}", self.dt) });
        }
        if self.resolution < 16 || !self.resolution.is_multiple_of(2) {
            return Err(Error::InvalidResolution(self.resolution));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter { name: "sample_every", reason: "must be at least 1".into() });
        }
        if !(self.spin_up_time >= 0.0) {
            return Err(Error::InvalidParameter { name: "spin_up_time", reason: "must be non-negative".into() });
        }
        Ok(())
    }

    /// Rejects `dt ≥ 1/(μνκ₀²)` when the feedback is explicit.
    pub fn check_feedback(&self, params: &PhysicalParams, mu: f64) -> Result<()> {
        if mu > 0.0 && self.feedback == FeedbackMode::Explicit {
            let bound = 1.0 / (mu * params.nu * params.kappa0().powi(2));
            if self.dt >= bound {
                return Err(Error::FeedbackStability { dt: self.dt, bound });
            }
        }
        Ok(())
    }
}

/// Time-indexed field source `s ↦ v(s)` for the nudged equation.
pub trait FieldSource {
    fn field_at(&self, s: f64) -> Result<SpectralField>;
}

/// A source that returns the same field at every time.
pub struct ConstantSource(pub SpectralField);

impl FieldSource for ConstantSource {
    fn field_at(&self, _s: f64) -> Result<SpectralField> {
        Ok(self.0.clone())
    }
}

enum System<'a> {
    Nse,
    /// Single field `w` nudged towards `v(s)` from a source.
    Source { j: &'a InterpolantSpec, source: &'a dyn FieldSource, coef: f64, implicit: bool },
    /// Fields `[u, w]`: reference NSE run and nudged copy with `v = Ju`.
    Lockstep { j: &'a InterpolantSpec, coef: f64, implicit: bool },
}

/// A running integration. Owns its state; the spectral context, parameters,
/// interpolant and source are borrowed.
pub struct Integration<'a> {
    sp: &'a Spectral,
    system: System<'a>,
    stepper: Stepper,
    fields: Vec<SpectralField>,
    t0: f64,
    steps: u64,
    warnings: Vec<String>,
    cfl_warned: bool,
}

/// Indicator of modes kept by a modal projection (zero for other kinds).
fn modal_mask(sp: &Spectral, j: &InterpolantSpec) -> Vec<f64> {
    let g = sp.grid();
    match j.kind() {
        InterpolantKind::Modal { max_shell } => (0..g.len())
            .map(|i| {
                let (a, b) = g.wavevector(i);
                let s = (a * a + b * b) as u64;
                if s > 0 && s <= max_shell {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        _ => vec![0.0; g.len()],
    }
}

fn linear_part(sp: &Spectral, nu: f64, extra: Option<(&[f64], f64)>, forcing: &SpectralField) -> LinearPart {
    let mut decay: Vec<f64> = sp.k_squared().iter().map(|&k2| nu * k2).collect();
    if let Some((mask, coef)) = extra {
        for (d, m) in decay.iter_mut().zip(mask) {
            *d += coef * m;
        }
    }
    let offset = if forcing.max_abs() == 0.0 {
        None
    } else {
        let inv: Vec<f64> = decay.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        let mut o = forcing.clone();
        o.scale_modes(&inv);
        Some(o)
    };
    LinearPart { decay, offset }
}

fn check_state(sp: &Spectral, u: &SpectralField, what: &str) -> Result<()> {
    sp.grid().ensure_same(u.grid())?;
    let scale = u.max_abs().max(f64::MIN_POSITIVE);
    let div = u.divergence_max();
    if div > 1e-10 * scale * sp.grid().kappa0() * sp.grid().n() as f64 {
        return Err(Error::InvalidParameter { name: "initial state", reason: format!("{what} is not divergence free ({div:e})") });
    }
    Ok(())
}

impl<'a> Integration<'a> {
    pub fn nse(sp: &'a Spectral, params: &PhysicalParams, cfg: &SolverConfig, u0: SpectralField, t0: f64) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        check_state(sp, &u0, "u₀")?;
        let f = params.forcing_field(sp)?;
        let parts = vec![linear_part(sp, params.nu, None, &f)];
        Ok(Self::build(sp, System::Nse, cfg, parts, vec![u0], t0))
    }

    /// Nudged equation driven by `v(s)` from `source`; μ from `params`.
    pub fn nudged(
        sp: &'a Spectral,
        params: &PhysicalParams,
        cfg: &SolverConfig,
        j: &'a InterpolantSpec,
        source: &'a dyn FieldSource,
        w0: SpectralField,
        t0: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        check_state(sp, &w0, "w₀")?;
        j.check_grid(sp.grid())?;
        let implicit = Self::implicit(cfg, j)?;
        cfg.check_feedback(params, params.mu)?;
        let coef = params.mu * params.nu * params.kappa0().powi(2);
        let f = params.forcing_field(sp)?;
        let mask = modal_mask(sp, j);
        let extra = if implicit { Some((mask.as_slice(), coef)) } else { None };
        let parts = vec![linear_part(sp, params.nu, extra, &f)];
        Ok(Self::build(sp, System::Source { j, source, coef, implicit }, cfg, parts, vec![w0], t0))
    }

    /// Reference solution `u` and nudged copy `w` with `v = Ju`, advanced together.
    pub fn lockstep(
        sp: &'a Spectral,
        params: &PhysicalParams,
        cfg: &SolverConfig,
        j: &'a InterpolantSpec,
        u0: SpectralField,
        w0: SpectralField,
        t0: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        check_state(sp, &u0, "u₀")?;
        check_state(sp, &w0, "w₀")?;
        j.check_grid(sp.grid())?;
        let implicit = Self::implicit(cfg, j)?;
        cfg.check_feedback(params, params.mu)?;
        let coef = params.mu * params.nu * params.kappa0().powi(2);
        let f = params.forcing_field(sp)?;
        let mask = modal_mask(sp, j);
        let extra = if implicit { Some((mask.as_slice(), coef)) } else { None };
        let parts = vec![linear_part(sp, params.nu, None, &f), linear_part(sp, params.nu, extra, &f)];
        Ok(Self::build(sp, System::Lockstep { j, coef, implicit }, cfg, parts, vec![u0, w0], t0))
    }

    fn implicit(cfg: &SolverConfig, j: &InterpolantSpec) -> Result<bool> {
        match (cfg.feedback, j.kind()) {
            (FeedbackMode::Explicit, _) => Ok(false),
            (FeedbackMode::ImplicitModal, InterpolantKind::Modal { .. }) => Ok(true),
            (FeedbackMode::ImplicitModal, _) => Err(Error::InvalidParameter {
                name: "feedback",
                reason: format!("implicit feedback needs the modal interpolant, got {}", j.kind().name()),
            }),
        }
    }

    fn build(sp: &'a Spectral, system: System<'a>, cfg: &SolverConfig, parts: Vec<LinearPart>, fields: Vec<SpectralField>, t0: f64) -> Self {
        Integration {
            sp,
            system,
            stepper: Stepper::new(cfg.integrator, cfg.dt, parts),
            fields,
            t0,
            steps: 0,
            warnings: Vec::new(),
            cfl_warned: false,
        }
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.stepper.dt()
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Current state: `[u]`, `[w]` or `[u, w]` depending on the system.
    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn into_fields(self) -> Vec<SpectralField> {
        self.fields
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        core::mem::take(&mut self.warnings)
    }

    /// Everything but the diagonal linear part, for each field.
    fn nonlinear(sp: &Spectral, system: &System<'_>, t: f64, u: &[SpectralField], out: &mut [SpectralField]) -> Result<()> {
        for (o, f) in out.iter_mut().zip(u) {
            *o = sp.bilinear(f, f)?;
            o.scale(-1.0);
        }
        match *system {
            System::Nse => {}
            System::Source { j, source, coef, implicit } => {
                if coef != 0.0 {
                    // −coef 𝒫(Jw − v); with implicit treatment Jw lives in the linear part
                    let mut fb = source.field_at(t)?;
                    if !implicit {
                        fb.axpy(-1.0, &j.apply(sp, &u[0])?);
                    }
                    out[0].axpy(coef, &sp.project(&fb));
                }
            }
            System::Lockstep { j, coef, implicit } => {
                if coef != 0.0 {
                    let fb = if implicit { j.apply(sp, &u[0])? } else { j.apply(sp, &(&u[0] - &u[1]))? };
                    out[1].axpy(coef, &sp.project(&fb));
                }
            }
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        let (sp, system) = (self.sp, &self.system);
        self.stepper.step(t, &mut self.fields, &mut |s, u, out| Self::nonlinear(sp, system, s, u, out))?;
        self.steps += 1;
        for (i, f) in self.fields.iter().enumerate() {
            if !f.is_finite() {
                let what = if self.fields.len() == 2 && i == 0 { "reference field" } else { "state" };
                return Err(Error::Blowup { time: self.time(), step: self.steps, what: format!("non-finite {what}") });
            }
        }
        Ok(())
    }

    /// Advances until `time() ≥ t_end − dt/2`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.time() < t_end - 0.5 * self.dt() {
            self.step()?;
        }
        Ok(())
    }

    /// Exact time derivative of field `i` at the current state.
    pub fn derivative(&self, i: usize) -> Result<SpectralField> {
        let mut out = self.fields.clone();
        Self::nonlinear(self.sp, &self.system, self.time(), &self.fields, &mut out)?;
        Ok(self.stepper.derivative(i, &self.fields[i], &out[i]))
    }

    /// Records a warning if the advective CFL number exceeds 1.
    pub fn check_cfl(&mut self) {
        if self.cfl_warned {
            return;
        }
        let dx = self.sp.grid().length() / self.sp.grid().n() as f64;
        let umax = self.fields.iter().map(|f| self.sp.linf(f)).fold(0.0, f64::max);
        let cfl = umax * self.dt() / dx;
        if cfl > 1.0 {
            self.cfl_warned = true;
            self.warnings.push(format!("CFL number {cfl:.3} exceeds 1 at s = {}", self.time()));
        }
    }
}

/// A recorded state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Initial state, every `sample_every`-th step, and the final state.
    pub samples: Vec<Sample>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn final_state(&self) -> &SpectralField {
        &self.samples.last().expect("a run records at least its initial state").field
    }
}

fn record_run(mut run: Integration<'_>, t_end: f64, every: usize, field: usize) -> Result<RunOutput> {
    let mut samples = vec![Sample { s: run.time(), field: run.fields()[field].clone() }];
    while run.time() < t_end - 0.5 * run.dt() {
        run.step()?;
        let last = run.time() >= t_end - 0.5 * run.dt();
        if run.steps().is_multiple_of(every as u64) || last {
            run.check_cfl();
            samples.push(Sample { s: run.time(), field: run.fields()[field].clone() });
        }
    }
    Ok(RunOutput { samples, warnings: run.take_warnings() })
}

/// Integrates `du/dt + νAu + B(u,u) = f` from `u₀` at `s = 0` to `t_final`.
pub fn integrate_nse(sp: &Spectral, u0: &SpectralField, params: &PhysicalParams, cfg: &SolverConfig, t_final: f64) -> Result<RunOutput> {
    let run = Integration::nse(sp, params, cfg, u0.clone(), 0.0)?;
    record_run(run, t_final, cfg.sample_every, 0)
}

/// Integrates the nudged equation from `w₀` at `s0` to `s_final`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_nudged(
    sp: &Spectral,
    w0: &SpectralField,
    source: &dyn FieldSource,
    params: &PhysicalParams,
    j: &InterpolantSpec,
    cfg: &SolverConfig,
    s0: f64,
    s_final: f64,
) -> Result<RunOutput> {
    let run = Integration::nudged(sp, params, cfg, j, source, w0.clone(), s0)?;
    record_run(run, s_final, cfg.sample_every, 0)
}

/// Per-sample norms written to the diagnostics table. `E = |u|²/2`,
/// `Z = ‖u‖²/2`; the `delta_*` columns are norms of a comparison
/// difference (the nudging error, or the distance to a steady state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub s: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub norm_v: f64,
    pub norm_a: f64,
    pub delta_h: f64,
    pub delta_v: f64,
    pub delta_a: f64,
}

pub fn diagnostics_row(sp: &Spectral, s: f64, u: &SpectralField, delta: Option<&SpectralField>) -> DiagnosticsRow {
    let n = sp.parseval_norms(u);
    let d = delta.map(|d| sp.parseval_norms(d)).unwrap_or_default();
    DiagnosticsRow {
        s,
        energy: 0.5 * n.h * n.h,
        enstrophy: 0.5 * n.v * n.v,
        norm_v: n.v,
        norm_a: n.a,
        delta_h: d.h,
        delta_v: d.v,
        delta_a: d.a,
    }
}

/// Outcome of [`spin_up`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpinUp {
    pub field: SpectralField,
    pub norm_v: f64,
    /// `νκ₀G`
    pub norm_v_bound: f64,
    pub within_bound: bool,
    /// `(1/T)∫|Au|²` over the last `T = 1/(νκ₀²)` of the run.
    pub mean_au2: f64,
    /// `2ν²κ₀⁴G²`
    pub mean_au2_bound: f64,
    pub max_norm_a: f64,
    pub warnings: Vec<String>,
}

/// Relative tolerance of the absorbing-ball check.
pub const ABSORBING_TOL: f64 = 1e-3;

/// Runs from a seeded random state of enstrophy norm `νκ₀G` for
/// `cfg.spin_up_time` and checks the absorbing-ball bounds.
pub fn spin_up(sp: &Spectral, params: &PhysicalParams, cfg: &SolverConfig) -> Result<SpinUp> {
    cfg.validate()?;
    let g = grashof(params)?;
    let k0 = params.kappa0();
    let scale = params.nu * k0 * g;
    let u0 = if scale > 0.0 {
        let mut rng = component_rng(cfg.seed, "spin-up", 0);
        let kmax = sp.grid().dealias_cutoff().min(8);
        let mut u = random_solenoidal(sp, &mut rng, SpectrumFamily::Kolmogorov, kmax);
        let v = sp.norm_v(&u);
        u.scale(scale / v);
        u
    } else {
        SpectralField::zeros(*sp.grid())
    };
    let mut run = Integration::nse(sp, params, cfg, u0, 0.0)?;
    let t_end = cfg.spin_up_time;
    let window = 1.0 / (params.nu * k0 * k0);
    let mut integral = 0.0;
    let mut covered = 0.0;
    let mut max_a: f64 = 0.0;
    let mut prev = sp.norm_a(&run.fields()[0]).powi(2);
    while run.time() < t_end - 0.5 * run.dt() {
        run.step()?;
        if run.steps() % cfg.sample_every as u64 == 0 {
            run.check_cfl();
        }
        let cur = sp.norm_a(&run.fields()[0]).powi(2);
        if run.time() > t_end - window - 0.5 * run.dt() {
            integral += 0.5 * (prev + cur) * run.dt();
            covered += run.dt();
            max_a = max_a.max(cur.sqrt());
        }
        prev = cur;
    }
    let field = run.fields()[0].clone();
    let mut warnings = run.take_warnings();
    let norm_v = sp.norm_v(&field);
    let bound = scale;
    let within = norm_v <= bound * (1.0 + ABSORBING_TOL) || (bound == 0.0 && norm_v == 0.0);
    if !within {
        warnings.push(format!("‖u‖ = {norm_v:e} exceeds νκ₀G = {bound:e} after spin-up"));
    }
    if covered < window * 0.999 {
        warnings.push(format!("spin-up shorter than the averaging window {window}"));
    }
    let mean_au2 = if covered > 0.0 { integral / covered } else { prev };
    Ok(SpinUp {
        field,
        norm_v,
        norm_v_bound: bound,
        within_bound: within,
        mean_au2,
        mean_au2_bound: 2.0 * params.nu.powi(2) * k0.powi(4) * g * g,
        max_norm_a: max_a.max(prev.sqrt()),
        warnings,
    })
}

/// Boxed source built from a closure.
pub struct FnSource<F>(pub F);

impl<F: Fn(f64) -> Result<SpectralField>> FieldSource for FnSource<F> {
    fn field_at(&self, s: f64) -> Result<SpectralField> {
        (self.0)(s)
    }
}

impl<T: FieldSource + ?Sized> FieldSource for Box<T> {
    fn field_at(&self, s: f64) -> Result<SpectralField> {
        (**self).field_at(s)
    }
}

#[cfg(test)]
mod tests;
