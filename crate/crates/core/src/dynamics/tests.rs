use super::*;
use crate::grid::Grid;
use crate::params::ForcingSpec;
use core::f64::consts::PI;
use num_complex::Complex64;

fn spectral(n: usize) -> Spectral {
    Spectral::new(Grid::new(n, 2.0 * PI).unwrap())
}

fn unforced() -> PhysicalParams {
    PhysicalParams::new(1.0, 2.0 * PI, ForcingSpec::None, 0.0).unwrap()
}

fn eigenmode(sp: &Spectral, k1: i64, k2: i64, amp: f64) -> SpectralField {
    // direction k^⊥ keeps the mode divergence free
    let c = Complex64::new(0.0, -amp / 2.0);
    SpectralField::single_mode(*sp.grid(), k1, k2, [c * k2 as f64, -c * k1 as f64]).unwrap()
}

fn cfg(n: usize, dt: f64, integrator: Integrator) -> SolverConfig {
    SolverConfig { resolution: n, dt, integrator, sample_every: 1, ..SolverConfig::default() }
}

#[test]
fn eigenmode_decays_exactly() {
    for n in [32, 64] {
        let sp = spectral(n);
        let u0 = eigenmode(&sp, 1, 2, 0.8);
        let lambda = 5.0;
        let t = 1.0 / lambda;
        let c = SolverConfig { dt: t / 40.0, ..cfg(n, 1.0, Integrator::IfRk4) };
        let out = integrate_nse(&sp, &u0, &unforced(), &c, t).unwrap();
        let last = out.samples.last().unwrap();
        assert!((last.s - t).abs() < 1e-12);
        let ratio = sp.norm_h(&last.field) / sp.norm_h(&u0);
        assert!((ratio - (-1f64).exp()).abs() < 1e-12, "n = {n}: {ratio}");
    }
}

#[test]
fn crank_nicolson_decay_matches_its_amplification_factor() {
    let sp = spectral(16);
    let u0 = eigenmode(&sp, 1, 1, 1.0);
    let dt = 0.05;
    let out = integrate_nse(&sp, &u0, &unforced(), &cfg(16, dt, Integrator::Cnab2), 1.0).unwrap();
    let g = (1.0 - dt) / (1.0 + dt);
    let ratio = sp.norm_h(out.final_state()) / sp.norm_h(&u0);
    assert!((ratio - g.powi(20)).abs() < 1e-12);
}

#[test]
fn kolmogorov_steady_state_is_held() {
    let sp = spectral(32);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 5.0, 0.0).unwrap();
    let ustar = params.steady_state(&sp).unwrap().unwrap();
    for integrator in [Integrator::IfRk4, Integrator::Cnab2] {
        let out = integrate_nse(&sp, &ustar, &params, &SolverConfig { sample_every: 100, ..cfg(32, 0.01, integrator) }, 10.0).unwrap();
        let d = sp.norm_h(&(out.final_state() - &ustar)) / sp.norm_h(&ustar);
        assert!(d < 1e-12, "{integrator:?}: {d:e}");
    }
}

#[test]
fn energy_balance_of_the_exact_derivative() {
    // d/dt |u|²/2 = −ν‖u‖² + (f, u) because (B(u,u), u) = 0
    let sp = spectral(32);
    let params = PhysicalParams::kolmogorov(0.7, 2.0 * PI, 2, 5.0, 0.0).unwrap();
    let mut rng = component_rng(3, "energy", 0);
    let mut u = random_solenoidal(&sp, &mut rng, SpectrumFamily::Kolmogorov, 8);
    u.scale(3.0);
    let run = Integration::nse(&sp, &params, &SolverConfig::default(), u.clone(), 0.0).unwrap();
    let du = run.derivative(0).unwrap();
    let f = params.forcing_field(&sp).unwrap();
    let lhs = du.inner(&u);
    let rhs = -params.nu * sp.norm_v(&u).powi(2) + f.inner(&u);
    assert!((lhs - rhs).abs() < 1e-11 * rhs.abs().max(params.nu * sp.norm_v(&u).powi(2)));
}

#[test]
fn zero_feedback_leaves_the_copy_bit_identical() {
    let sp = spectral(16);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 10.0, 0.0).unwrap();
    let mut rng = component_rng(9, "bit", 0);
    let u0 = random_solenoidal(&sp, &mut rng, SpectrumFamily::Shallow, 5);
    let j = InterpolantSpec::volume(4, 2.0 * PI).unwrap();
    let c = cfg(16, 0.01, Integrator::IfRk4);
    let mut run = Integration::lockstep(&sp, &params, &c, &j, u0.clone(), u0.clone(), 0.0).unwrap();
    let mut solo = Integration::nse(&sp, &params, &c, u0, 0.0).unwrap();
    for _ in 0..50 {
        run.step().unwrap();
        solo.step().unwrap();
    }
    assert_eq!(run.fields()[0], run.fields()[1]);
    assert_eq!(run.fields()[0], solo.fields()[0]);
}

#[test]
fn steady_state_is_fixed_under_nudging_towards_its_interpolant() {
    let sp = spectral(32);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 5.0, 3.0).unwrap();
    let ustar = params.steady_state(&sp).unwrap().unwrap();
    for j in [InterpolantSpec::volume(8, 2.0 * PI).unwrap(), InterpolantSpec::nodal(8, 2.0 * PI).unwrap()] {
        let src = ConstantSource(j.apply(&sp, &ustar).unwrap());
        let out = integrate_nudged(&sp, &ustar, &src, &params, &j, &cfg(32, 0.01, Integrator::IfRk4), 0.0, 2.0).unwrap();
        let d = sp.norm_h(&(out.final_state() - &ustar)) / sp.norm_h(&ustar);
        assert!(d < 1e-12, "{}: {d:e}", j.kind().name());
    }
}

#[test]
fn explicit_feedback_bound_is_enforced() {
    let sp = spectral(16);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 1.0, 100.0).unwrap();
    let j = InterpolantSpec::volume(4, 2.0 * PI).unwrap();
    let c = cfg(16, 0.01, Integrator::IfRk4);
    let z = SpectralField::zeros(*sp.grid());
    let err = Integration::lockstep(&sp, &params, &c, &j, z.clone(), z.clone(), 0.0).err().unwrap();
    assert!(matches!(err, Error::FeedbackStability { .. }), "{err:?}");
    // implicit treatment lifts the bound for the modal projection only
    let implicit = SolverConfig { feedback: FeedbackMode::ImplicitModal, ..c };
    assert!(Integration::lockstep(&sp, &params, &implicit, &j, z.clone(), z.clone(), 0.0).is_err());
    let m = InterpolantSpec::modal(8, 2.0 * PI).unwrap();
    assert!(Integration::lockstep(&sp, &params, &implicit, &m, z.clone(), z, 0.0).is_ok());
}

#[test]
fn implicit_and_explicit_modal_feedback_agree() {
    let sp = spectral(16);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 5.0, 2.0).unwrap();
    let mut rng = component_rng(1, "modal", 0);
    let u0 = random_solenoidal(&sp, &mut rng, SpectrumFamily::Kolmogorov, 5);
    let j = InterpolantSpec::modal(8, 2.0 * PI).unwrap();
    let z = SpectralField::zeros(*sp.grid());
    let run = |feedback, dt: f64| {
        let c = SolverConfig { feedback, ..cfg(16, dt, Integrator::IfRk4) };
        let mut r = Integration::lockstep(&sp, &params, &c, &j, u0.clone(), z.clone(), 0.0).unwrap();
        r.advance_to(1.0).unwrap();
        r.into_fields().pop().unwrap()
    };
    let a = run(FeedbackMode::Explicit, 0.005);
    let b = run(FeedbackMode::ImplicitModal, 0.005);
    assert!(sp.norm_h(&(&a - &b)) < 1e-7 * sp.norm_h(&a));
}

#[test]
fn divergent_initial_state_is_rejected() {
    let sp = spectral(16);
    let bad = SpectralField::single_mode(*sp.grid(), 1, 0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    assert!(Integration::nse(&sp, &unforced(), &SolverConfig::default(), bad, 0.0).is_err());
}

#[test]
fn spin_up_enters_the_absorbing_ball() {
    let sp = spectral(32);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 5.0, 0.0).unwrap();
    let c = SolverConfig { spin_up_time: 4.0, dt: 0.01, resolution: 32, ..SolverConfig::default() };
    let s = spin_up(&sp, &params, &c).unwrap();
    assert!(s.within_bound, "{} > {}", s.norm_v, s.norm_v_bound);
    assert!(s.mean_au2 <= s.mean_au2_bound);
    assert!(s.warnings.is_empty(), "{:?}", s.warnings);
    let again = spin_up(&sp, &params, &c).unwrap();
    assert_eq!(s.field, again.field);
}

#[test]
fn spin_up_of_an_unforced_flow_stays_zero() {
    let sp = spectral(16);
    let c = SolverConfig { spin_up_time: 1.0, resolution: 16, ..SolverConfig::default() };
    let s = spin_up(&sp, &unforced(), &c).unwrap();
    assert_eq!(s.norm_v, 0.0);
    assert!(s.within_bound);
}

#[test]
fn decay_rate_fit_recovers_an_exponential() {
    let pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, 3.0 * (-2.5 * i as f64 * 0.1).exp())).collect();
    assert!((fit_decay_rate(&pts, 0.0).unwrap() + 2.5).abs() < 1e-12);
    // points at or below the floor are ignored
    let mut floored = pts.clone();
    floored.extend((0..20).map(|i| (5.0 + i as f64 * 0.1, 1e-20)));
    assert!((fit_decay_rate(&floored, 1e-15).unwrap() + 2.5).abs() < 1e-12);
    assert_eq!(fit_decay_rate(&[(0.0, 1.0)], 0.0), None);
}

#[test]
fn nudging_synchronizes_and_zero_feedback_does_not() {
    let sp = spectral(32);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 5.0, 0.0).unwrap();
    let c = SolverConfig { resolution: 32, dt: 0.01, sample_every: 10, ..SolverConfig::default() };
    let mut rng = component_rng(4, "sync-test", 0);
    let mut u0 = params.steady_state(&sp).unwrap().unwrap();
    let mut p = random_solenoidal(&sp, &mut rng, SpectrumFamily::Kolmogorov, 6);
    p.scale(0.1 * sp.norm_h(&u0));
    u0.axpy(1.0, &p);
    let j = InterpolantSpec::modal(24, 2.0 * PI).unwrap();
    let mut sync = SyncConfig::for_params(&params);
    sync.w0 = WInit::Random { seed: 4, scale: 1.0 };
    let rec = sync_experiment(&sp, &params, &j, 5.0, &c, &sync, &u0).unwrap();
    assert_eq!(rec.status, SyncStatus::Synchronized, "{:?}", rec.final_relative);
    assert!(rec.rate.unwrap() < -1.0);
    let none = sync_experiment(&sp, &params, &j, 0.0, &c, &sync, &u0).unwrap();
    assert_eq!(none.status, SyncStatus::NotSynchronized);
    assert!(none.final_relative > 1e-8);
}

#[test]
fn sweep_reduces_dt_for_strong_feedback_and_keeps_order() {
    let sp = spectral(16);
    let params = PhysicalParams::kolmogorov(1.0, 2.0 * PI, 2, 1.0, 0.0).unwrap();
    let c = SolverConfig { resolution: 16, dt: 0.02, sample_every: 5, ..SolverConfig::default() };
    let mut sync = SyncConfig::for_params(&params);
    sync.horizon = 0.5;
    let u0 = params.steady_state(&sp).unwrap().unwrap();
    let j = InterpolantSpec::volume(4, 2.0 * PI).unwrap();
    let cells: Vec<SweepCell> = [1.0, 100.0].iter().map(|&mu| SweepCell { mu, interp: j.clone() }).collect();
    let rows = threshold_sweep(&sp, &params, &c, &sync, &u0, &cells);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].dt, 0.02);
    assert!(rows[1].dt < 0.01);
    assert_eq!(rows[1].mu, 100.0);
    assert!(!rows[1].status.starts_with("error"), "{}", rows[1].status);
}
