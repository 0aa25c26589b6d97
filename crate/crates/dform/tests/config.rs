use dform::config::{parse_interp, KindName, RunConfig};
use dform::HarnessError;
use proptest::prelude::*;

#[test]
fn defaults_round_trip_through_toml() {
    let cfg = RunConfig::default();
    let text = cfg.to_toml().unwrap();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    assert!(text.contains("[physics]") && text.contains("[solver]"));
}

#[test]
fn empty_file_gives_defaults() {
    assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
}

#[test]
fn partial_sections_keep_other_defaults() {
    let cfg = RunConfig::from_toml("seed = 9\n[solver]\nresolution = 32\nintegrator = \"cnab2\"\n").unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.solver.resolution, 32);
    assert_eq!(cfg.solver.dt, RunConfig::default().solver.dt);
    assert_eq!(cfg.solver_config().integrator, dform_core::dynamics::Integrator::Cnab2);
}

#[test]
fn unknown_keys_are_rejected() {
    for bad in ["colour = 1", "[physics]\nviscosity = 1.0", "[nope]\na = 1", "[solver]\nintegrator = \"euler\""] {
        let err = RunConfig::from_toml(bad).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)), "{bad}");
        assert_eq!(err.exit_code(), 1);
    }
}

#[test]
fn invalid_values_are_rejected() {
    for bad in [
        "[physics]\nnu = 0.0",
        "[physics]\nlength = -1.0",
        "[solver]\nresolution = 17",
        "[solver]\ndt = 0.0",
        "[nudging]\nmu = -1.0",
        "[simulate]\ninit = \"snapshot\"",
        "[simulate]\ninit = \"banana\"",
        "[interpolant]\nresolution = 0\nkind = \"volume\"",
    ] {
        assert!(RunConfig::from_toml(bad).is_err(), "{bad}");
    }
}

#[test]
fn seeds_beyond_the_toml_integer_range_are_rejected() {
    let cfg = RunConfig { seed: i64::MAX as u64 + 1, ..RunConfig::default() };
    assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
    assert!(cfg.to_toml().is_err());
    let max = RunConfig { seed: i64::MAX as u64, ..RunConfig::default() };
    assert_eq!(RunConfig::from_toml(&max.to_toml().unwrap()).unwrap(), max);
}

#[test]
fn interp_flag_parsing() {
    assert_eq!(parse_interp("volume:8").unwrap(), (KindName::Volume, 8));
    assert_eq!(parse_interp("modal:24").unwrap(), (KindName::Modal, 24));
    for bad in ["volume", "cubic:4", "nodal:x", "nodal:0", ""] {
        assert!(parse_interp(bad).is_err(), "{bad}");
    }
}

#[test]
fn interpolant_spacing_follows_the_kind() {
    let l = 2.0 * std::f64::consts::PI;
    assert!((KindName::Volume.build(8, l).unwrap().h() - l / 8.0).abs() < 1e-15);
    assert!((KindName::Nodal.build(16, 1.0).unwrap().h() - 1.0 / 16.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn arbitrary_values_round_trip_bit_exactly(
        seed in 0..=i64::MAX as u64,
        nu in 1e-300f64..1e300,
        dt in 1e-12f64..1.0,
        mu in 0.0f64..1e6,
        g in 0.0f64..1e4,
        mus in proptest::collection::vec(0.0f64..1e3, 0..6),
        etas in proptest::collection::vec(1e-9f64..1.0, 1..4),
    ) {
        let mut cfg = RunConfig { seed, ..RunConfig::default() };
        cfg.physics.nu = nu;
        cfg.physics.grashof = g;
        cfg.solver.dt = dt;
        cfg.nudging.mu = mu;
        cfg.sweep.mu = mus;
        cfg.dform.lipschitz_etas = etas;
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back.physics.nu.to_bits(), nu.to_bits());
        prop_assert_eq!(back.solver.dt.to_bits(), dt.to_bits());
        prop_assert_eq!(back, cfg);
    }
}
