//! Run configuration: a TOML file with one table per concern. Every key is
//! optional and unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dform_core::dynamics::{FeedbackMode, Integrator, SolverConfig, SyncConfig, WInit};
use dform_core::{InterpolantSpec, PhysicalParams};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed in `0..=i64::MAX`; every random component derives its own
    /// stream from it.
    pub seed: u64,
    pub physics: Physics,
    pub solver: Solver,
    pub interpolant: Interpolant,
    pub nudging: Nudging,
    pub simulate: Simulate,
    pub sweep: Sweep,
    pub dform: DForm,
    pub verify: Verify,
    pub constants: Constants,
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub nu: f64,
    pub length: f64,
    /// Kolmogorov forcing `a (sin(2π j x₂/L), 0)`; `j = 0` switches forcing off.
    pub forcing_mode: u32,
    /// Target Grashof number; sets the amplitude `a`.
    pub grashof: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorName {
    IfRk4,
    Cnab2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackName {
    Explicit,
    ImplicitModal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Solver {
    pub resolution: usize,
    pub dt: f64,
    pub integrator: IntegratorName,
    pub feedback: FeedbackName,
    pub spin_up_time: f64,
    /// Steps between recorded rows.
    pub sample_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    Modal,
    Volume,
    Nodal,
}

impl KindName {
    pub const ALL: [KindName; 3] = [KindName::Modal, KindName::Volume, KindName::Nodal];

    pub fn parse(s: &str) -> Option<KindName> {
        match s {
            "modal" => Some(KindName::Modal),
            "volume" => Some(KindName::Volume),
            "nodal" => Some(KindName::Nodal),
            _ => None,
        }
    }

    /// `N` is the largest kept shell `|k|²/κ₀²` for the modal kind and the
    /// number of cells or nodes per side otherwise.
    pub fn build(self, resolution: u64, length: f64) -> Result<InterpolantSpec> {
        let spec = match self {
            KindName::Modal => InterpolantSpec::modal(resolution, length),
            KindName::Volume => InterpolantSpec::volume(resolution as usize, length),
            KindName::Nodal => InterpolantSpec::nodal(resolution as usize, length),
        };
        spec.map_err(HarnessError::config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Interpolant {
    pub kind: KindName,
    pub resolution: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nudging {
    pub mu: f64,
    pub horizon: f64,
    pub threshold: f64,
    pub hold: f64,
    /// `‖w₀‖/‖u₀‖` of the random initial state; `0` starts from `w₀ = 0`.
    pub w0_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulate {
    /// `spin-up`, `steady`, `random`, `eigenmode` or `snapshot`.
    pub init: String,
    /// Wavevector of the `eigenmode` initial state.
    pub mode: [i64; 2],
    /// Source file of the `snapshot` initial state.
    pub snapshot: Option<PathBuf>,
    pub t_final: f64,
    /// Write a snapshot every this many recorded rows; `0` writes only the final state.
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub mu: Vec<f64>,
    pub modal: Vec<u64>,
    pub volume: Vec<u64>,
    pub nodal: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DForm {
    pub ds: f64,
    /// Window length including the burn-in.
    pub window: f64,
    pub pre_window: f64,
    /// Double the pre-window until the window changes by less than `pre_window_tol`.
    pub adaptive: bool,
    pub pre_window_tol: f64,
    /// Evolution time limit. Near `Ju*` the factor `g` is linear in `a`, so `a`
    /// decays only like `t^(-1/2)` and the run normally ends on `|da/dt| < 1e-8`.
    pub t_end: f64,
    /// Size of the initial perturbation `v₀ − Ju*` relative to `‖Ju*‖`.
    pub perturbation: f64,
    pub lipschitz_etas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Verify {
    pub ensemble_size: usize,
    pub heldout_size: usize,
    pub lemma_size: usize,
    pub kmax: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub ensemble_size: usize,
    pub kmax: i64,
    /// Grashof numbers of the spin-up runs that measure `c₀`.
    pub grashof: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
}


impl Default for Physics {
    fn default() -> Self {
        Physics { nu: 1.0, length: 2.0 * PI, forcing_mode: 2, grashof: 5.0 }
    }
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            resolution: 64,
            dt: 5e-3,
            integrator: IntegratorName::IfRk4,
            feedback: FeedbackName::Explicit,
            spin_up_time: 20.0,
            sample_every: 10,
        }
    }
}

impl Default for Interpolant {
    fn default() -> Self {
        Interpolant { kind: KindName::Modal, resolution: 24 }
    }
}

impl Default for Nudging {
    fn default() -> Self {
        Nudging { mu: 5.0, horizon: 8.0, threshold: 1e-8, hold: 1.0, w0_scale: 1.0 }
    }
}

impl Default for Simulate {
    fn default() -> Self {
        Simulate { init: "spin-up".into(), mode: [1, 0], snapshot: None, t_final: 5.0, snapshot_every: 0 }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            mu: vec![0.5, 2.0, 8.0, 20.0, 50.0, 120.0],
            modal: vec![1, 4, 16, 50, 130, 260],
            volume: vec![2, 4, 8, 12, 16, 20],
            nodal: vec![2, 4, 8, 12, 16, 20],
        }
    }
}

impl Default for DForm {
    fn default() -> Self {
        DForm {
            ds: 0.05,
            window: 10.0,
            pre_window: 10.0,
            adaptive: false,
            pre_window_tol: 1e-8,
            t_end: 1e6,
            perturbation: 0.2,
            lipschitz_etas: vec![1e-4, 1e-3, 1e-2],
        }
    }
}

impl Default for Verify {
    fn default() -> Self {
        Verify { ensemble_size: 1000, heldout_size: 1000, lemma_size: 10_000, kmax: 10 }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants { ensemble_size: 1000, kmax: 10, grashof: vec![1.0, 5.0, 20.0] }
    }
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: PathBuf::from("out") }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(HarnessError::config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(HarnessError::config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        // TOML integers are signed 64-bit
        if self.seed > i64::MAX as u64 {
            return Err(HarnessError::Config(format!("seed must be at most {}, got {}", i64::MAX, self.seed)));
        }
        let p = &self.physics;
        positive("physics.nu", p.nu)?;
        positive("physics.length", p.length)?;
        if !(p.grashof >= 0.0 && p.grashof.is_finite()) {
            return Err(HarnessError::Config(format!("physics.grashof must be non-negative, got {}", p.grashof)));
        }
        self.solver_config().validate().map_err(HarnessError::config)?;
        positive("solver.dt", self.solver.dt)?;
        if !(self.nudging.mu >= 0.0 && self.nudging.mu.is_finite()) {
            return Err(HarnessError::Config(format!("nudging.mu must be non-negative, got {}", self.nudging.mu)));
        }
        positive("nudging.horizon", self.nudging.horizon)?;
        positive("nudging.threshold", self.nudging.threshold)?;
        if !(self.nudging.hold >= 0.0 && self.nudging.w0_scale >= 0.0) {
            return Err(HarnessError::Config("nudging.hold and nudging.w0_scale must be non-negative".into()));
        }
        self.interpolant()?;
        positive("simulate.t_final", self.simulate.t_final)?;
        match self.simulate.init.as_str() {
            "spin-up" | "steady" | "random" | "eigenmode" => {}
            "snapshot" if self.simulate.snapshot.is_some() => {}
            "snapshot" => return Err(HarnessError::Config("simulate.init = \"snapshot\" needs simulate.snapshot".into())),
            other => return Err(HarnessError::Config(format!("unknown simulate.init `{other}`"))),
        }
        for &mu in &self.sweep.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(HarnessError::Config(format!("sweep.mu entries must be non-negative, got {mu}")));
            }
        }
        let d = &self.dform;
        for (name, x) in [("dform.ds", d.ds), ("dform.window", d.window), ("dform.t_end", d.t_end), ("dform.perturbation", d.perturbation)] {
            positive(name, x)?;
        }
        if !(d.pre_window >= 0.0 && d.pre_window_tol > 0.0) {
            return Err(HarnessError::Config("dform.pre_window must be non-negative and dform.pre_window_tol positive".into()));
        }
        if d.lipschitz_etas.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(HarnessError::Config("dform.lipschitz_etas must be positive".into()));
        }
        let v = &self.verify;
        if v.ensemble_size == 0 || v.kmax < 1 || self.constants.ensemble_size == 0 || self.constants.kmax < 1 {
            return Err(HarnessError::Config("ensembles need at least one member and kmax ≥ 1".into()));
        }
        if self.constants.grashof.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(HarnessError::Config("constants.grashof entries must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let p = &self.physics;
        let params = if p.forcing_mode == 0 || p.grashof == 0.0 {
            PhysicalParams::new(p.nu, p.length, dform_core::ForcingSpec::None, self.nudging.mu)
        } else {
            PhysicalParams::kolmogorov(p.nu, p.length, p.forcing_mode, p.grashof, self.nudging.mu)
        };
        params.map_err(HarnessError::config)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            resolution: s.resolution,
            dt: s.dt,
            integrator: match s.integrator {
                IntegratorName::IfRk4 => Integrator::IfRk4,
                IntegratorName::Cnab2 => Integrator::Cnab2,
            },
            feedback: match s.feedback {
                FeedbackName::Explicit => FeedbackMode::Explicit,
                FeedbackName::ImplicitModal => FeedbackMode::ImplicitModal,
            },
            spin_up_time: s.spin_up_time,
            seed: self.seed,
            sample_every: s.sample_every,
        }
    }

    pub fn interpolant(&self) -> Result<InterpolantSpec> {
        self.interpolant.kind.build(self.interpolant.resolution, self.physics.length)
    }

    pub fn sync_config(&self) -> SyncConfig {
        let n = &self.nudging;
        let defaults = SyncConfig {
            horizon: n.horizon,
            threshold: n.threshold,
            hold: n.hold,
            divergence_factor: 1e3,
            fit_floor: 1e-12,
            stop_when_synchronized: true,
            w0: WInit::Zero,
        };
        if n.w0_scale > 0.0 {
            SyncConfig { w0: WInit::Random { seed: self.seed, scale: n.w0_scale }, ..defaults }
        } else {
            defaults
        }
    }

    /// The sweep resolutions of one interpolant kind.
    pub fn sweep_resolutions(&self, kind: KindName) -> &[u64] {
        match kind {
            KindName::Modal => &self.sweep.modal,
            KindName::Volume => &self.sweep.volume,
            KindName::Nodal => &self.sweep.nodal,
        }
    }
}

/// Parses the `--interp kind:N` flag.
pub fn parse_interp(s: &str) -> Result<(KindName, u64)> {
    let bad = || HarnessError::Config(format!("--interp expects kind:N with kind in modal|volume|nodal, got `{s}`"));
    let (kind, n) = s.split_once(':').ok_or_else(bad)?;
    let kind = KindName::parse(kind).ok_or_else(bad)?;
    let n: u64 = n.parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((kind, n))
}
