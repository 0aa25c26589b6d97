use super::*;
use crate::ensemble::FieldClass;
use crate::grid::Grid;
use core::f64::consts::PI;
use num_complex::Complex64;

fn spectral(n: usize, l: f64) -> Spectral {
    Spectral::new(Grid::new(n, l).unwrap())
}

/// `u = a sin(k·x) k^⊥/|k|`
fn sine_mode(sp: &Spectral, k1: i64, k2: i64, a: f64) -> SpectralField {
    let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
    let c = Complex64::new(0.0, -a / 2.0);
    SpectralField::single_mode(*sp.grid(), k1, k2, [c * (k2 as f64 / r), c * (-(k1 as f64) / r)]).unwrap()
}

#[test]
fn zero_fields_have_no_violations() {
    let sp = spectral(16, 1.0);
    let z = SpectralField::zeros(*sp.grid());
    let r = identity_violations(&sp, &z, &z, &z).unwrap();
    assert_eq!((r.flip, r.ortho, r.moveu), (0.0, 0.0, 0.0));
}

#[test]
fn identities_hold_on_random_triples() {
    let sp = spectral(32, 2.0 * PI);
    let ens = EnsembleSpec::new(17, 40, 10, FieldClass::Solenoidal).with_label("identity-test");
    let r = check_identity_suite(&sp, &ens).unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.samples, 40);
}

#[test]
fn agmon_ratio_of_one_mode_is_closed_form() {
    // ‖u‖_∞ = a, |u| = aL/√2, |Au| = |k|²κ₀²|u|, so the ratio is √2/(L|k|κ₀)
    for (l, (k1, k2)) in [(2.0 * PI, (1, 2)), (1.0, (3, 0))] {
        let sp = spectral(32, l);
        let u = sine_mode(&sp, k1, k2, 0.7);
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt() * 2.0 * PI / l;
        let expect = 2f64.sqrt() / (l * k);
        let got = inequality_ratio(InequalityId::Agmon, &sp, &u, &u).unwrap().unwrap();
        assert!((got - expect).abs() < 1e-12 * expect, "{got} vs {expect}");
    }
}

#[test]
fn l4_norm_of_one_mode_is_closed_form() {
    // ∫ a⁴ sin⁴ = 3a⁴L²/8
    let l = 2.0 * PI;
    let sp = spectral(32, l);
    let u = sine_mode(&sp, 2, 1, 1.3);
    let expect = 1.3 * (3.0f64 / 8.0).powf(0.25) * l.sqrt();
    assert!((l4_norm(&sp, &u) - expect).abs() < 1e-12 * expect);
}

#[test]
fn ratios_are_scale_invariant() {
    let sp = spectral(32, 2.0 * PI);
    let ens = EnsembleSpec::new(5, 4, 8, FieldClass::Solenoidal);
    for id in InequalityId::ALL {
        for i in 0..2 {
            let (u, v) = (ens.member(&sp, 2 * i), ens.member(&sp, 2 * i + 1));
            let base = inequality_ratio(id, &sp, &u, &v).unwrap().unwrap();
            let (mut cu, mut cv) = (u.clone(), v.clone());
            cu.scale(37.5);
            cv.scale(1e-3);
            let scaled = inequality_ratio(id, &sp, &cu, &cv).unwrap().unwrap();
            assert!((scaled - base).abs() < 1e-12 * base, "{}: {base} vs {scaled}", id.as_str());
        }
    }
}

#[test]
fn poincare_ratios_never_exceed_one() {
    let sp = spectral(32, 3.0);
    let ens = EnsembleSpec::new(8, 200, 10, FieldClass::Solenoidal);
    for id in [InequalityId::PoincareV, InequalityId::PoincareA] {
        let e = estimate_inequality_constant(id, &sp, &ens).unwrap();
        assert!(e.constant <= 1.0 + 1e-14 && e.constant > 0.0, "{}: {}", id.as_str(), e.constant);
    }
}

#[test]
fn estimates_are_maxima_over_the_ensemble() {
    let sp = spectral(32, 2.0 * PI);
    let ens = EnsembleSpec::new(2, 30, 8, FieldClass::Solenoidal);
    for id in [InequalityId::Titi, InequalityId::Ladyzhenskaya, InequalityId::HalfB13] {
        let e = estimate_inequality_constant(id, &sp, &ens).unwrap();
        assert_eq!(e.samples, 30);
        assert_eq!(e.skipped, 0);
        assert_eq!(count_violations(id, e.constant, &sp, &ens).unwrap(), 0);
        assert!(count_violations(id, 0.99 * e.constant, &sp, &ens).unwrap() >= 1);
    }
    let empty = EnsembleSpec::new(2, 0, 8, FieldClass::Solenoidal);
    assert_eq!(estimate_inequality_constant(InequalityId::Agmon, &sp, &empty), Err(Error::EmptyEnsemble));
}

#[test]
fn ids_round_trip_through_names() {
    for id in InequalityId::ALL {
        assert_eq!(InequalityId::parse(id.as_str()), Some(id));
    }
    assert_eq!(InequalityId::parse("nope"), None);
}

#[test]
fn lemma_constant_at_one() {
    assert!((lemma_constant(1.0) - 8f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
}

#[test]
fn lemma_is_strict_for_the_lowest_mode() {
    // φ = cos x on [0, 2π]²: ‖φ‖_∞ = 1, |∇φ| = |Δφ| = √2 π
    let sp = spectral(16, 2.0 * PI);
    let phi = SpectralField::single_mode(*sp.grid(), 1, 0, [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    assert!((sp.sobolev_norm(&phi, 0.5) - 2f64.sqrt() * PI).abs() < 1e-13);
    for n in 3..=64 {
        let n = n as f64;
        let rhs = lemma_constant(n) * 2f64.sqrt() * PI + 2f64.sqrt() * PI / (PI.sqrt() * n);
        assert!((lemma_rhs(&sp, &phi, n) - rhs).abs() < 1e-12 * rhs);
        assert!(sp.linf(&phi) < rhs);
    }
}

#[test]
fn lemma_holds_on_a_scalar_ensemble() {
    let sp = spectral(32, 2.0 * PI);
    let mut ens = EnsembleSpec::new(21, 200, 10, FieldClass::Scalar).with_label("lemma-test");
    ens.aligned_every = 4;
    let ns: Vec<f64> = (3..=64).map(|n| n as f64).collect();
    let r = check_linf_lemma(&sp, &ens, &ns).unwrap();
    assert_eq!(r.violations, 0);
    assert_eq!(r.checks, 200 * 62);
    assert!(r.worst_ratio > 0.0 && r.worst_ratio < 1.0);
    assert!(check_linf_lemma(&sp, &ens, &[0.0]).is_err());
}

#[test]
fn thresholds_by_hand() {
    let ones = NonlinearConstants { c_t: 1.0, c_b: 1.0, c0: 1.0 };
    let j = ApproxConstants { c1: 1.0, c2: 2.0, c1t: 0.0, c2t: 0.0 };
    let r = admissible_region(1.0, 1.0, &ones, &j).unwrap();
    assert!((r.mu_min_sync - 2.0 * 2f64.ln()).abs() < 1e-14);
    assert_eq!(r.c_j, 3.0);
    assert!(r.warnings.is_empty());
    let mu = 7.0;
    let h = r.h_max(mu);
    assert!((2.0 * mu * r.c_j * h * h - 1.0).abs() < 1e-14);
    let hw = r.h_max_w(mu);
    assert!((2.0 * mu * hw * hw * (j.c1 * j.c1 + j.c2) - 0.5).abs() < 1e-14);
    assert_eq!((r.c4, r.c5), (720.0, 3.0 * 8f64.sqrt()));
    let (lo, hi) = r.mu_range_w(2.0);
    assert!((lo - 720.0 * 4.0 * (4.0 * r.c5).ln()).abs() < 1e-9 && hi == 2.0 * lo);
    assert!(r.sync_admissible(2.0, 0.1) && !r.sync_admissible(1.0, 0.1) && !r.sync_admissible(2.0, r.h_max(2.0)));
    let low = admissible_region(0.5, 1.0, &ones, &j).unwrap();
    assert_eq!(low.warnings.len(), 1);
    assert!(admissible_region(1.0, 1.0, &NonlinearConstants { c_t: 0.0, ..ones }, &j).is_err());
    let inflated = ones.inflated(2.0);
    assert_eq!(inflated.c_t, 2.0);
}
