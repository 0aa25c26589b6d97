//! The experiments behind the subcommands. Each writes its CSV files to the
//! output directory and returns a short report for the terminal.
//!
//! Randomness: every random component draws from its own ChaCha8 stream,
//! selected by the master seed and a component label (see
//! [`dform_core::ensemble::component_rng`]).

use std::path::{Path, PathBuf};

use dform_core::dform::{
    evolve_determining_form, g_value, first_evaluated, lipschitz_ratios, reference_trajectory, refinement_floor, w_audit, w_bounds,
    x_norms, DFormConfig, EvolveOptions, PreWindow, Termination, Trajectory,
};
use dform_core::dynamics::{diagnostics_row, integrate_nse, spin_up, sync_experiment, SolverConfig, SweepCell};
use dform_core::ensemble::{component_rng, random_solenoidal, EnsembleSpec, FieldClass, SpectrumFamily};
use dform_core::inequality::{
    admissible_region, identity_sample, inequality_sample, lemma_member, IdentityReport, InequalityEstimate, InequalityId,
    LemmaReport, NonlinearConstants,
};
use dform_core::interp::{approx_sample, fit_approx_constants, ApproxConstants, ConstantEstimate};
use dform_core::params::grashof;
use dform_core::{Grid, InterpolantSpec, PhysicalParams, Spectral, SpectralField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{KindName, RunConfig};
use crate::error::{HarnessError, Result};
use crate::output::{self, write_csv, write_csv_with_header};
use crate::snapshot::{load_snapshot, save_snapshot, Snapshot};
use crate::sweep::{parallel_sweep, with_pool};

/// Everything a subcommand needs, built and validated from a [`RunConfig`].
pub struct Context {
    pub cfg: RunConfig,
    pub sp: Spectral,
    pub params: PhysicalParams,
    pub solver: SolverConfig,
    pub interp: InterpolantSpec,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(cfg.solver.resolution, cfg.physics.length).map_err(HarnessError::config)?;
        let sp = Spectral::new(grid);
        let params = cfg.params()?;
        let solver = cfg.solver_config();
        let interp = cfg.interpolant()?;
        interp.check_grid(sp.grid()).map_err(HarnessError::config)?;
        Ok(Context { cfg, sp, params, solver, interp })
    }

    pub fn out(&self) -> &Path {
        &self.cfg.output.dir
    }

    fn steady_state(&self) -> Result<SpectralField> {
        self.params
            .steady_state(&self.sp)?
            .ok_or_else(|| HarnessError::Config("this experiment needs a forcing with a known steady state".into()))
    }
}

/// What a subcommand reports back.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Report {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn warnings(&mut self, ws: &[String]) {
        self.lines.extend(ws.iter().map(|w| format!("warning: {w}")));
    }
}

/// Band limit `kmax` clamped to the dealiased band of the grid.
pub fn band(sp: &Spectral, kmax: i64) -> i64 {
    kmax.min(sp.grid().dealias_cutoff())
}

// ---------------------------------------------------------------------------
// Parallel measurements

/// Approximation constants of `j` over `size` solenoidal fields of the
/// `interp-constants` stream.
pub fn interp_constants(sp: &Spectral, j: &InterpolantSpec, seed: u64, size: usize, kmax: i64) -> Result<ConstantEstimate> {
    let ens = EnsembleSpec::new(seed, size, band(sp, kmax), FieldClass::Solenoidal).with_label("interp-constants");
    ens.validate(sp)?;
    let samples = with_pool(|| {
        (0..size).into_par_iter().map(|i| approx_sample(j, sp, &ens.member(sp, i))).collect::<dform_core::Result<Vec<_>>>()
    })?;
    Ok(fit_approx_constants(&samples)?)
}

/// Largest ratio of `id` over `ens`, evaluated in parallel.
pub fn inequality_constant(id: InequalityId, sp: &Spectral, ens: &EnsembleSpec) -> Result<InequalityEstimate> {
    ens.validate(sp)?;
    let ratios = with_pool(|| {
        (0..ens.size).into_par_iter().map(|i| inequality_sample(id, sp, ens, i)).collect::<dform_core::Result<Vec<_>>>()
    })?;
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    if skipped == ens.size {
        return Err(HarnessError::Numerical(dform_core::Error::Condition(format!("every sample of {} is degenerate", id.as_str()))));
    }
    let constant = ratios.iter().flatten().fold(0.0, |a: f64, &b| a.max(b));
    Ok(InequalityEstimate { id, constant, samples: ens.size, skipped })
}

/// Samples of `ens` whose ratio exceeds `constant`.
pub fn count_violations(id: InequalityId, constant: f64, sp: &Spectral, ens: &EnsembleSpec) -> Result<usize> {
    ens.validate(sp)?;
    let flags = with_pool(|| {
        (0..ens.size)
            .into_par_iter()
            .map(|i| Ok(inequality_sample(id, sp, ens, i)?.is_some_and(|r| r > constant)))
            .collect::<dform_core::Result<Vec<bool>>>()
    })?;
    Ok(flags.into_iter().filter(|&b| b).count())
}

pub fn identity_suite(sp: &Spectral, ens: &EnsembleSpec) -> Result<IdentityReport> {
    ens.validate(sp)?;
    let reps = with_pool(|| (0..ens.size).into_par_iter().map(|i| identity_sample(sp, ens, i)).collect::<dform_core::Result<Vec<_>>>())?;
    Ok(reps.iter().fold(IdentityReport::default(), |a, b| a.merge(b)))
}

pub fn linf_lemma(sp: &Spectral, ens: &EnsembleSpec, n_set: &[f64]) -> Result<LemmaReport> {
    ens.validate(sp)?;
    let empty = LemmaReport { samples: 0, checks: 0, violations: 0, worst_ratio: 0.0, worst_n: f64::NAN };
    let reps: Vec<LemmaReport> = with_pool(|| (0..ens.size).into_par_iter().map(|i| lemma_member(sp, &ens.member(sp, i), n_set)).collect());
    Ok(reps.iter().fold(empty, |a, b| a.merge(b)))
}

/// Surrogate for `c₀`: the largest `max|Au|/(νκ₀²G³)` over spin-up runs at
/// the given Grashof numbers (Kolmogorov forcing at `mode`).
pub fn measure_c0(sp: &Spectral, nu: f64, mode: u32, grashofs: &[f64], solver: &SolverConfig) -> Result<f64> {
    let length = sp.grid().length();
    let runs = with_pool(|| {
        grashofs
            .par_iter()
            .map(|&g| {
                let p = PhysicalParams::kolmogorov(nu, length, mode, g, 0.0)?;
                let s = spin_up(sp, &p, solver)?;
                Ok(s.max_norm_a / (nu * p.kappa0().powi(2) * g.powi(3)))
            })
            .collect::<dform_core::Result<Vec<f64>>>()
    })?;
    Ok(runs.into_iter().fold(0.0, f64::max))
}

/// `c_T` and `c_B` from the `inequality` stream, with a measured `c₀`.
pub fn nonlinear_constants(sp: &Spectral, seed: u64, size: usize, kmax: i64, c0: f64) -> Result<NonlinearConstants> {
    let ens = EnsembleSpec::new(seed, size, band(sp, kmax), FieldClass::Solenoidal).with_label("inequality");
    let c_t = inequality_constant(InequalityId::Titi, sp, &ens)?.constant;
    let c_b = inequality_constant(InequalityId::Brezis, sp, &ens)?.constant;
    Ok(NonlinearConstants { c_t, c_b, c0 })
}

/// Random solenoidal field of the `label` stream with `‖u‖ = norm_v`.
fn random_field(sp: &Spectral, seed: u64, label: &str, norm_v: f64) -> SpectralField {
    let mut rng = component_rng(seed, label, 0);
    let mut u = random_solenoidal(sp, &mut rng, SpectrumFamily::Kolmogorov, band(sp, 8));
    let v = sp.norm_v(&u);
    if v > 0.0 {
        u.scale(norm_v / v);
    }
    u
}

/// `u = (k₂, −k₁)/|k| · sin(k·x)`, a Stokes eigenfunction with `‖u‖_∞ = 1`.
pub fn eigenmode(sp: &Spectral, k1: i64, k2: i64) -> Result<SpectralField> {
    let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
    let c = Complex64::new(0.0, -0.5);
    SpectralField::single_mode(*sp.grid(), k1, k2, [c * (k2 as f64 / r), c * (-(k1 as f64) / r)]).map_err(HarnessError::config)
}

// ---------------------------------------------------------------------------
// Subcommands

fn initial_state(ctx: &Context, report: &mut Report) -> Result<SpectralField> {
    let sim = &ctx.cfg.simulate;
    match sim.init.as_str() {
        "spin-up" => {
            let s = spin_up(&ctx.sp, &ctx.params, &ctx.solver)?;
            report.warnings(&s.warnings);
            report.line(format!("spin-up: ‖u‖ = {:.6e} (bound νκ₀G = {:.6e})", s.norm_v, s.norm_v_bound));
            Ok(s.field)
        }
        "steady" => ctx.steady_state(),
        "random" => {
            let scale = ctx.params.nu * ctx.params.kappa0() * grashof(&ctx.params)?.max(1.0);
            Ok(random_field(&ctx.sp, ctx.cfg.seed, "simulate-init", scale))
        }
        "eigenmode" => eigenmode(&ctx.sp, sim.mode[0], sim.mode[1]),
        _ => {
            let path = sim.snapshot.as_ref().expect("validated");
            let snap = load_snapshot(path)?;
            if snap.field.grid() != ctx.sp.grid() {
                return Err(HarnessError::Config(format!(
                    "snapshot grid {} does not match the configured grid {}",
                    snap.field.grid().describe(),
                    ctx.sp.grid().describe()
                )));
            }
            Ok(snap.field)
        }
    }
}

/// Free NSE run. `delta_*` columns measure the distance to the steady state
/// (zero without forcing).
pub fn simulate(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    let u0 = initial_state(ctx, &mut report)?;
    let reference = ctx.params.steady_state(&ctx.sp)?.unwrap_or_else(|| SpectralField::zeros(*ctx.sp.grid()));
    let run = integrate_nse(&ctx.sp, &u0, &ctx.params, &ctx.solver, ctx.cfg.simulate.t_final)?;
    report.warnings(&run.warnings);
    let rows: Vec<_> = run.samples.iter().map(|s| diagnostics_row(&ctx.sp, s.s, &s.field, Some(&(&s.field - &reference)))).collect();
    report.files.push(write_csv(ctx.out(), "diagnostics.csv", &output::diagnostics_rows(&rows))?);
    let every = ctx.cfg.simulate.snapshot_every;
    if every > 0 {
        for (i, s) in run.samples.iter().enumerate().step_by(every) {
            let path = ctx.out().join(format!("snapshot_{i:06}.dfl"));
            save_snapshot(&Snapshot { field: s.field.clone(), nu: ctx.params.nu, time: s.s }, &path)?;
            report.files.push(path);
        }
    }
    let last = run.samples.last().expect("a run has samples");
    let path = ctx.out().join("final.dfl");
    save_snapshot(&Snapshot { field: last.field.clone(), nu: ctx.params.nu, time: last.s }, &path)?;
    report.files.push(path);
    let end = rows.last().expect("a run has rows");
    report.line(format!("t = {}: E = {:.6e}, ‖u‖ = {:.6e}, ‖u − u*‖ = {:.6e}", end.s, end.energy, end.norm_v, end.delta_v));
    if ctx.cfg.simulate.init == "eigenmode" && grashof(&ctx.params)? == 0.0 {
        let (k1, k2) = (ctx.cfg.simulate.mode[0], ctx.cfg.simulate.mode[1]);
        let lambda = ((k1 * k1 + k2 * k2) as f64) * ctx.params.kappa0().powi(2);
        let h0 = rows[0].delta_h;
        let dev = rows.iter().map(|r| (r.delta_h - h0 * (-ctx.params.nu * lambda * r.s).exp()).abs() / h0).fold(0.0, f64::max);
        report.line(format!("eigenmode decay: max relative deviation from exp(−νλt) = {dev:.3e}"));
    }
    Ok(report)
}

/// `2μκ₀²c_J h²`
pub fn mucond1(params: &PhysicalParams, mu: f64, j: &InterpolantSpec, c: &ApproxConstants) -> f64 {
    2.0 * mu * params.kappa0().powi(2) * c.c_j() * j.h().powi(2)
}

/// Spins up a reference flow and nudges a copy towards its interpolant.
pub fn sync(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    let mu = ctx.cfg.nudging.mu;
    ctx.solver.check_feedback(&ctx.params, mu).map_err(HarnessError::config)?;
    let spin = spin_up(&ctx.sp, &ctx.params, &ctx.solver)?;
    report.warnings(&spin.warnings);
    let c = &ctx.cfg.constants;
    let est = interp_constants(&ctx.sp, &ctx.interp, ctx.cfg.seed, c.ensemble_size, c.kmax)?;
    let cond = mucond1(&ctx.params, mu, &ctx.interp, &est.constants);
    let rec = sync_experiment(&ctx.sp, &ctx.params, &ctx.interp, mu, &ctx.solver, &ctx.cfg.sync_config(), &spin.field)?;
    report.warnings(&rec.warnings);
    report.files.push(write_csv(ctx.out(), "decay.csv", &output::diagnostics_rows(&rec.rows))?);
    report.files.push(write_csv(ctx.out(), "sync_summary.csv", &[output::SyncSummaryCsv::new(&rec, Some(cond))])?);
    report.line(format!(
        "μ = {mu}, {} J with h = {:.4}: {} (final ‖δ‖/‖u‖ = {:.3e}, rate {}), 2μκ₀²c_J h² = {cond:.3}",
        rec.kind,
        rec.h,
        rec.status.as_str(),
        rec.final_relative,
        rec.rate.map_or("n/a".into(), |r| format!("{r:.4}")),
    ));
    Ok(report)
}

/// The `(μ, J)` grid of the `[sweep]` table, in kind, resolution, μ order.
pub fn sweep_cells(cfg: &RunConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for kind in KindName::ALL {
        for &n in cfg.sweep_resolutions(kind) {
            let interp = kind.build(n, cfg.physics.length)?;
            cells.extend(cfg.sweep.mu.iter().map(|&mu| SweepCell { mu, interp: interp.clone() }));
        }
    }
    Ok(cells)
}

pub fn sweep(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    let cells = sweep_cells(&ctx.cfg)?;
    let rows = if cells.is_empty() {
        Vec::new()
    } else {
        let spin = spin_up(&ctx.sp, &ctx.params, &ctx.solver)?;
        report.warnings(&spin.warnings);
        parallel_sweep(&ctx.sp, &ctx.params, &ctx.solver, &ctx.cfg.sync_config(), &spin.field, &cells)
    };
    let csv: Vec<output::PhaseCsv> = rows.iter().map(output::PhaseCsv::from).collect();
    report.files.push(write_csv_with_header(ctx.out(), "phase.csv", &output::PHASE_HEADER, &csv)?);
    let synced = rows.iter().filter(|r| r.synchronized).count();
    let failed = rows.iter().filter(|r| r.status.starts_with("error")).count();
    report.line(format!("{} cells: {synced} synchronized, {failed} failed", rows.len()));
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct LipschitzCsv {
    eta: f64,
    ratio: f64,
}

/// Samples per window and the check that `dt` divides `ds`.
fn window_samples(ctx: &Context) -> Result<usize> {
    let d = &ctx.cfg.dform;
    let per = d.ds / ctx.solver.dt;
    if (per - per.round()).abs() > 1e-9 * per.max(1.0) || per.round() < 1.0 {
        return Err(HarnessError::Config(format!("dform.ds = {} must be a multiple of solver.dt = {}", d.ds, ctx.solver.dt)));
    }
    Ok((d.window / d.ds).round() as usize + 1)
}

/// W map, steady residual, refinement floor, Lipschitz ratios and the
/// determining-form evolution around a spun-up reference flow.
pub fn dform(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    let (sp, d) = (&ctx.sp, &ctx.cfg.dform);
    let n = window_samples(ctx)?;
    let u_star = ctx.steady_state()?;
    let mu = ctx.cfg.nudging.mu;
    let params = PhysicalParams { mu, ..ctx.params.clone() };
    let c = &ctx.cfg.constants;
    let est = interp_constants(sp, &ctx.interp, ctx.cfg.seed, c.ensemble_size, c.kmax)?;
    let j = ctx.interp.clone().with_constants(est.constants);
    let spin = spin_up(sp, &params, &ctx.solver)?;
    report.warnings(&spin.warnings);
    let u = reference_trajectory(sp, &spin.field, &params, &ctx.solver, 0.0, d.ds, n)?;
    let ju = u.map_linear(|f| j.apply(sp, f))?;
    let r = 2.0 * x_norms(sp, &ju, &params)?.x;
    let pre_window = if d.adaptive {
        PreWindow::Adaptive { initial: d.pre_window, tol: d.pre_window_tol, max_doublings: 6 }
    } else {
        PreWindow::Fixed(d.pre_window)
    };
    let cfg = DFormConfig::new(&params, &j, ctx.solver.clone(), pre_window, r).map_err(HarnessError::config)?;
    let first = first_evaluated(&ju, &cfg).map_err(|_| {
        HarnessError::Config(format!("dform.window = {} does not extend past the burn-in {}", d.window, cfg.burn_in))
    })?;

    let gv = g_value(sp, &ju, &params, &j, &cfg)?;
    let (g_ju, wout) = (gv.g, gv.w);
    report.warnings(&wout.warnings);
    let audit: Vec<output::WAuditCsv> = w_audit(sp, &wout.w).iter().map(output::WAuditCsv::from).collect();
    report.files.push(write_csv(ctx.out(), "w_audit.csv", &audit)?);
    let scale = u.values().iter().map(|f| sp.norm_v(f)).fold(0.0, f64::max);
    let w_err = wout.w.values()[first..].iter().zip(&u.values()[first..]).map(|(a, b)| sp.norm_v(&(a - b))).fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    let refine = refinement_floor(sp, &spin.field, &params, &j, &cfg, 0.0, d.ds, n)?;
    let bounds = w_bounds(sp, &wout.w, &params, &cfg);

    let mut bump = j.apply(sp, &random_field(sp, ctx.cfg.seed, "dform-v0", 1.0))?;
    let ju_star = j.apply(sp, &u_star)?;
    bump.scale(d.perturbation * sp.norm_v(&ju_star).max(f64::MIN_POSITIVE) / sp.norm_v(&bump));
    let bump = Trajectory::constant(0.0, d.ds, n, &bump)?;
    let lips = lipschitz_ratios(sp, &ju, &bump, &d.lipschitz_etas, &params, &j, &cfg)?;
    let lips_csv: Vec<LipschitzCsv> = lips.iter().map(|&(eta, ratio)| LipschitzCsv { eta, ratio }).collect();
    report.files.push(write_csv(ctx.out(), "lipschitz.csv", &lips_csv)?);

    let v0 = ju.axpy(1.0, &bump)?;
    let rec = evolve_determining_form(sp, &v0, &u_star, d.t_end, &params, &j, &cfg, &EvolveOptions::default())?;
    report.warnings(&rec.warnings);
    let evo: Vec<output::EvolutionCsv> = rec.rows.iter().map(output::EvolutionCsv::from).collect();
    report.files.push(write_csv(ctx.out(), "evolution.csv", &evo)?);
    let last = rec.rows.last().copied();
    let summary = output::summary(
        &[
            ("R", r),
            ("rho", cfg.rho),
            ("K", cfg.k),
            ("burn_in", cfg.burn_in),
            ("pre_window", wout.pre_window),
            ("w_sup_relative_error", w_err),
            ("g_Ju", g_ju),
            ("sup_norm_w", bounds.sup_norm_w),
            ("bound_w_derived", bounds.derived),
            ("bound_w_listed", bounds.listed),
            ("initial_distance", rec.initial_distance),
            ("final_a", last.map_or(f64::NAN, |r| r.a)),
            ("final_dadt", last.map_or(f64::NAN, |r| r.dadt)),
            ("g_evaluations", rec.g_evaluations as f64),
            ("converged", f64::from(u8::from(rec.termination == Termination::Converged))),
        ]
        .into_iter()
        .chain(output::refinement_summary(&refine))
        .collect::<Vec<_>>(),
    );
    report.files.push(write_csv(ctx.out(), "dform_summary.csv", &summary)?);
    report.line(format!("R = {r:.4e}, K = {:.4e}, burn-in {:.3}", cfg.k, cfg.burn_in));
    report.line(format!("sup ‖W(Ju) − u‖/‖u‖ after burn-in = {w_err:.3e}"));
    report.line(format!("g(Ju) = {g_ju:.3e}, ε_disc = {:.3e}", refine.eps_disc));
    report.line(format!("evolution: {:?} after {} rows, {} W solves", rec.termination, rec.rows.len(), rec.g_evaluations));
    Ok(report)
}

/// Identity suite, inequality constants with a held-out check, and the
/// sup-norm lemma.
pub fn verify(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    let (sp, v, seed) = (&ctx.sp, &ctx.cfg.verify, ctx.cfg.seed);
    let kmax = band(sp, v.kmax);
    let ids = EnsembleSpec::new(seed, v.ensemble_size, kmax, FieldClass::Solenoidal).with_label("identity");
    let rep = identity_suite(sp, &ids)?;
    let identities = [("flip", rep.flip), ("ortho", rep.ortho), ("moveu", rep.moveu)].map(|(identity, x)| output::IdentityCsv {
        identity,
        max_violation: x,
        samples: rep.samples,
        passed: x < IdentityReport::TOLERANCE,
    });
    report.files.push(write_csv(ctx.out(), "identities.csv", &identities)?);
    report.line(format!(
        "identities over {} triples: flip {:.2e}, ortho {:.2e}, moveu {:.2e} ({})",
        rep.samples,
        rep.flip,
        rep.ortho,
        rep.moveu,
        if rep.passed() { "pass" } else { "FAIL" }
    ));

    let est = EnsembleSpec::new(seed, v.ensemble_size, kmax, FieldClass::Solenoidal).with_label("inequality");
    let held = EnsembleSpec::new(seed, v.heldout_size, kmax, FieldClass::Solenoidal).with_label("heldout");
    let mut rows = Vec::new();
    let mut total_violations = 0;
    for id in InequalityId::ALL {
        let e = inequality_constant(id, sp, &est)?;
        let viol = if v.heldout_size > 0 { Some(count_violations(id, e.constant, sp, &held)?) } else { None };
        total_violations += viol.unwrap_or(0);
        rows.push(output::InequalityCsv {
            id: id.as_str(),
            constant: e.constant,
            ensemble_size: e.samples,
            resolution: sp.grid().n(),
            seed,
            skipped: e.skipped,
            heldout_violations: viol,
        });
    }
    report.files.push(write_csv(ctx.out(), "inequalities.csv", &rows)?);
    report.line(format!("{} inequality constants estimated; {total_violations} held-out violations", rows.len()));

    if v.lemma_size > 0 {
        let mut lem = EnsembleSpec::new(seed, v.lemma_size, kmax, FieldClass::Scalar).with_label("lemma");
        lem.aligned_every = 4;
        let ns: Vec<f64> = (3..=64).map(f64::from).collect();
        let l = linf_lemma(sp, &lem, &ns)?;
        report.files.push(write_csv(
            ctx.out(),
            "lemma.csv",
            &[output::LemmaCsv { samples: l.samples, checks: l.checks, violations: l.violations, worst_ratio: l.worst_ratio, worst_n: l.worst_n }],
        )?);
        report.line(format!("sup-norm lemma: {} violations in {} checks (worst ratio {:.4})", l.violations, l.checks, l.worst_ratio));
    }
    Ok(report)
}

/// Interpolant constants for every kind and resolution of the sweep grid,
/// the nonlinear constants, and the admissible thresholds.
pub fn constants(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    let (sp, c, seed) = (&ctx.sp, &ctx.cfg.constants, ctx.cfg.seed);
    let g = grashof(&ctx.params)?;
    let k0 = ctx.params.kappa0();
    let mut specs = Vec::new();
    for kind in KindName::ALL {
        for &n in ctx.cfg.sweep_resolutions(kind) {
            let j = kind.build(n, ctx.cfg.physics.length)?;
            if j.check_grid(sp.grid()).is_err() {
                report.line(format!("skipping {}:{n}, finer than the grid", kind_name(kind)));
                continue;
            }
            let est = interp_constants(sp, &j, seed, c.ensemble_size, c.kmax)?;
            specs.push(j.with_constants(est.constants));
        }
    }
    let rows: Vec<output::ConstantsCsv> = specs
        .iter()
        .map(|j| {
            let k = j.constants().expect("measured");
            output::ConstantsCsv {
                kind: j.kind().name(),
                h: j.h(),
                c1: k.c1,
                c2: k.c2,
                c1t: k.c1t,
                c2t: k.c2t,
                cJ: k.c_j(),
                ensemble_seed: seed,
                resolution: j.kind().resolution(),
            }
        })
        .collect();
    report.files.push(write_csv_with_header(
        ctx.out(),
        "constants.csv",
        &["kind", "h", "c1", "c2", "c1t", "c2t", "cJ", "ensemble_seed", "resolution"],
        &rows,
    )?);

    let mode = ctx.cfg.physics.forcing_mode.max(1);
    let c0 = measure_c0(sp, ctx.params.nu, mode, &c.grashof, &ctx.solver)?;
    let nl = nonlinear_constants(sp, seed, c.ensemble_size, c.kmax, c0)?;
    report.line(format!("c_T = {:.4}, c_B = {:.4}, c0 = {:.4}", nl.c_t, nl.c_b, nl.c0));
    let mut thresholds = Vec::new();
    if g > 0.0 {
        for (margin, factor) in [("measured", 1.0), ("2x", 2.0)] {
            let nlm = nl.inflated(factor);
            for j in &specs {
                let k = j.constants().expect("measured");
                let km = ApproxConstants { c1: k.c1 * factor, c2: k.c2 * factor, c1t: k.c1t * factor, c2t: k.c2t * factor };
                let region = admissible_region(g, k0, &nlm, &km)?;
                for &mu in &ctx.cfg.sweep.mu {
                    thresholds.push(output::ThresholdCsv {
                        margin,
                        kind: j.kind().name(),
                        resolution: j.kind().resolution(),
                        h: j.h(),
                        mu,
                        grashof: g,
                        c_T: nlm.c_t,
                        c_B: nlm.c_b,
                        c0: nlm.c0,
                        mu_min_sync: region.mu_min_sync,
                        h_max: region.h_max(mu),
                        sync_admissible: region.sync_admissible(mu, j.h()),
                        h_max_W: region.h_max_w(mu),
                    });
                }
                if margin == "measured" && j == &specs[0] {
                    report.line(format!("μ_min_sync = {:.4} at G = {g}", region.mu_min_sync));
                    report.warnings(&region.warnings);
                }
            }
        }
    } else {
        report.line("no forcing: thresholds not defined");
    }
    report.files.push(write_csv_with_header(
        ctx.out(),
        "thresholds.csv",
        &[
            "margin", "kind", "resolution", "h", "mu", "grashof", "c_T", "c_B", "c0", "mu_min_sync", "h_max", "sync_admissible", "h_max_W",
        ],
        &thresholds,
    )?);
    Ok(report)
}

fn kind_name(k: KindName) -> &'static str {
    match k {
        KindName::Modal => "modal",
        KindName::Volume => "volume",
        KindName::Nodal => "nodal",
    }
}
