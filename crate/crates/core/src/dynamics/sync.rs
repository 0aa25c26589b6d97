//! Synchronization of a nudged copy with a reference solution, and sweeps
//! over the nudging parameters.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use super::{diagnostics_row, DiagnosticsRow, Integration, SolverConfig};
use crate::ensemble::{component_rng, random_solenoidal, SpectrumFamily};
use crate::field::SpectralField;
use crate::interp::InterpolantSpec;
use crate::params::PhysicalParams;
use crate::spectral::Spectral;
use crate::{Error, Result};

/// Initial state of the nudged copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WInit {
    Zero,
    /// Seeded random solenoidal field with `‖w₀‖ = scale·‖u₀‖`.
    Random { seed: u64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncConfig {
    /// Run length.
    pub horizon: f64,
    /// Synchronized once `‖δ‖/‖u‖` stays below this for `hold`.
    pub threshold: f64,
    pub hold: f64,
    /// `‖δ‖` growth beyond this factor over its initial value counts as divergence.
    pub divergence_factor: f64,
    /// Relative level below which `‖δ‖` is round-off and excluded from the rate fit.
    pub fit_floor: f64,
    /// Stop as soon as synchronization has been held for `hold`.
    pub stop_when_synchronized: bool,
    pub w0: WInit,
}

impl SyncConfig {
    /// Defaults scaled by the viscous time `1/(νκ₀²)`.
    pub fn for_params(params: &PhysicalParams) -> Self {
        let tv = 1.0 / (params.nu * params.kappa0().powi(2));
        SyncConfig {
            horizon: 8.0 * tv,
            threshold: 1e-8,
            hold: tv,
            divergence_factor: 1e3,
            fit_floor: 1e-12,
            stop_when_synchronized: true,
            w0: WInit::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncStatus {
    Synchronized,
    NotSynchronized,
    Diverged,
}

impl SyncStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SyncStatus::Synchronized => "synchronized",
            SyncStatus::NotSynchronized => "not_synchronized",
            SyncStatus::Diverged => "diverged",
        }
    }
}

/// One recorded time of a synchronization run: reference norms and the
/// norms of `δ = w − u`.
pub type DecayRow = DiagnosticsRow;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRecord {
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `log ‖δ‖` over the final half of the part of
    /// the run where `‖δ‖/‖u‖` is above the round-off floor.
    pub rate: Option<f64>,
    pub status: SyncStatus,
    /// First time from which `‖δ‖/‖u‖ < threshold` held until the end.
    pub sync_time: Option<f64>,
    pub final_relative: f64,
    pub mu: f64,
    pub h: f64,
    pub kind: &'static str,
    pub warnings: Vec<String>,
}

/// Slope of `log y` against `s` over the final half (in time) of the points
/// with `y > floor`, up to the last such point.
pub fn fit_decay_rate(points: &[(f64, f64)], floor: f64) -> Option<f64> {
    let above: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, y)| y > floor && y.is_finite()).collect();
    let last = above.last()?.0;
    let first = above.first()?.0;
    let mid = 0.5 * (first + last);
    let sel: Vec<(f64, f64)> = above.into_iter().filter(|&(s, _)| s >= mid).map(|(s, y)| (s, y.ln())).collect();
    if sel.len() < 2 {
        return None;
    }
    let n = sel.len() as f64;
    let (ms, my) = sel.iter().fold((0.0, 0.0), |(a, b), &(s, y)| (a + s / n, b + y / n));
    let (sxy, sxx) = sel.iter().fold((0.0, 0.0), |(a, b), &(s, y)| (a + (s - ms) * (y - my), b + (s - ms) * (s - ms)));
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

fn initial_w(sp: &Spectral, u0: &SpectralField, init: WInit) -> SpectralField {
    match init {
        WInit::Zero => SpectralField::zeros(*sp.grid()),
        WInit::Random { seed, scale } => {
            let mut rng = component_rng(seed, "sync-w0", 0);
            let kmax = sp.grid().dealias_cutoff().min(8);
            let mut w = random_solenoidal(sp, &mut rng, SpectrumFamily::Kolmogorov, kmax);
            let target = scale * sp.norm_v(u0);
            let v = sp.norm_v(&w);
            if v > 0.0 {
                w.scale(target / v);
            }
            w
        }
    }
}

/// Runs `u` (from `u0`) and the nudged `w` in lockstep at relaxation
/// strength `mu`, recording `‖δ‖` every `cfg.sample_every` steps.
///
/// Numerical blow-up of the nudged copy is reported as divergence.
pub fn sync_experiment(
    sp: &Spectral,
    params: &PhysicalParams,
    j: &InterpolantSpec,
    mu: f64,
    cfg: &SolverConfig,
    sync: &SyncConfig,
    u0: &SpectralField,
) -> Result<DecayRecord> {
    if !(sync.horizon > 0.0 && sync.threshold > 0.0 && sync.hold >= 0.0) {
        return Err(Error::InvalidParameter { name: "sync", reason: "horizon and threshold must be positive".into() });
    }
    let p = PhysicalParams { mu, ..params.clone() };
    let w0 = initial_w(sp, u0, sync.w0);
    let mut run = Integration::lockstep(sp, &p, cfg, j, u0.clone(), w0, 0.0)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let delta0 = sp.norm_v(&(&run.fields()[1] - &run.fields()[0]));
    let mut below_since: Option<f64> = None;
    let mut status = SyncStatus::NotSynchronized;
    // returns (‖δ‖/‖u‖, ‖δ‖)
    let observe = |run: &Integration<'_>, rows: &mut Vec<DecayRow>, record: bool| -> (f64, f64) {
        let (u, w) = (&run.fields()[0], &run.fields()[1]);
        let row = diagnostics_row(sp, run.time(), u, Some(&(w - u)));
        if record {
            rows.push(row);
        }
        let rel = if row.norm_v > 0.0 { row.delta_v / row.norm_v } else { row.delta_v };
        (rel, row.delta_v)
    };
    let mut rel = observe(&run, &mut rows, true).0;
    if rel < sync.threshold {
        below_since = Some(0.0);
    }
    while run.time() < sync.horizon - 0.5 * run.dt() {
        match run.step() {
            Ok(()) => {}
            Err(Error::Blowup { time, .. }) => {
                warnings.push(format!("blow-up at s = {time}"));
                status = SyncStatus::Diverged;
                break;
            }
            Err(e) => return Err(e),
        }
        let last = run.time() >= sync.horizon - 0.5 * run.dt();
        let record = run.steps() % cfg.sample_every as u64 == 0 || last;
        let (r, delta) = observe(&run, &mut rows, record);
        rel = r;
        if rel < sync.threshold {
            below_since.get_or_insert(run.time());
        } else {
            below_since = None;
        }
        let diverged = delta0 > 0.0 && delta > sync.divergence_factor * delta0;
        let held = below_since.is_some_and(|s| run.time() - s >= sync.hold - 0.5 * run.dt());
        if diverged || (held && sync.stop_when_synchronized) {
            if diverged {
                status = SyncStatus::Diverged;
            }
            if !record {
                observe(&run, &mut rows, true);
            }
            break;
        }
    }
    warnings.extend(run.take_warnings());
    let t_end = run.time();
    if status != SyncStatus::Diverged {
        if let Some(s) = below_since {
            if t_end - s >= sync.hold - 0.5 * run.dt() {
                status = SyncStatus::Synchronized;
            }
        }
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.s, r.delta_v)).collect();
    let scale = rows.iter().map(|r| r.norm_v).fold(0.0, f64::max);
    let rate = fit_decay_rate(&points, sync.fit_floor * scale.max(f64::MIN_POSITIVE));
    Ok(DecayRecord {
        rows,
        rate,
        status,
        sync_time: if status == SyncStatus::Synchronized { below_since } else { None },
        final_relative: rel,
        mu,
        h: j.h(),
        kind: j.kind().name(),
        warnings,
    })
}

/// One `(μ, J)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub mu: f64,
    pub interp: InterpolantSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    pub mu: f64,
    pub h: f64,
    pub kind: &'static str,
    pub resolution: u64,
    pub decay_rate: Option<f64>,
    pub synchronized: bool,
    pub status: String,
    pub dt: f64,
}

/// Runs one cell. The time step is reduced to `0.5/(μνκ₀²)` when the
/// explicit feedback bound requires it; failures become a row with status
/// `error: …` instead of aborting the sweep.
pub fn run_cell(
    sp: &Spectral,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    sync: &SyncConfig,
    u0: &SpectralField,
    cell: &SweepCell,
) -> PhaseRow {
    let mut c = cfg.clone();
    if cell.mu > 0.0 && c.feedback == super::FeedbackMode::Explicit {
        let bound = 1.0 / (cell.mu * params.nu * params.kappa0().powi(2));
        if c.dt >= bound {
            // keep the sampling cadence in time
            let factor = (2.0 * c.dt / bound).ceil();
            c.dt /= factor;
            c.sample_every = c.sample_every.saturating_mul(factor as usize).max(1);
        }
    }
    let base = PhaseRow {
        mu: cell.mu,
        h: cell.interp.h(),
        kind: cell.interp.kind().name(),
        resolution: cell.interp.kind().resolution(),
        decay_rate: None,
        synchronized: false,
        status: String::new(),
        dt: c.dt,
    };
    match sync_experiment(sp, params, &cell.interp, cell.mu, &c, sync, u0) {
        Ok(rec) => PhaseRow {
            decay_rate: rec.rate,
            synchronized: rec.status == SyncStatus::Synchronized,
            status: rec.status.as_str().into(),
            ..base
        },
        Err(e) => PhaseRow { status: format!("error: {e}"), ..base },
    }
}

/// Sequential sweep; rows come back in cell order.
pub fn threshold_sweep(
    sp: &Spectral,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    sync: &SyncConfig,
    u0: &SpectralField,
    cells: &[SweepCell],
) -> Vec<PhaseRow> {
    cells.iter().map(|c| run_cell(sp, params, cfg, sync, u0, c)).collect()
}
