use approx::assert_relative_eq;

use casimir_core::analytic::{phi_rational, single_round_trip, RationalModel, ZETA3};
use casimir_core::fitting::{max_deviation, sample_phi, validate_model, PhiSample};
use casimir_core::geometry::PhysicalGeometry;
use casimir_core::physical::{
    dimensional_free_energy, force, force_finite_difference, validity_check, ExactSolver, PhysicalConditions,
    RationalApprox, SingleRoundTrip, ValidityWarning,
};
use casimir_core::scattering::{AccuracySpec, KernelVariant};

#[test]
fn thermal_energy_at_room_temperature() {
    let c = PhysicalConditions::new(300.0, 1e-8).unwrap();
    let e = dimensional_free_energy(&c, 1.0).unwrap();
    assert_relative_eq!(e.joules, -4.1419e-21, max_relative = 1e-4);
    assert_relative_eq!(e.joules, -c.temperature * e.entropy, max_relative = 1e-15);
    let zero = dimensional_free_energy(&c, 0.0).unwrap();
    assert_eq!((zero.joules, zero.entropy), (0.0, 0.0));
}

#[test]
fn validity_warnings() {
    let c = PhysicalConditions::with_ell_t(300.0, 1e-8, 1e-7).unwrap();
    let far = PhysicalGeometry::two_spheres(1e-6, 1e-6, 1e-6).unwrap();
    assert!(validity_check(&far, &c).is_empty());

    let close = PhysicalGeometry::two_spheres(2e-8, 1e-6, 1e-6).unwrap();
    let w = validity_check(&close, &c);
    assert!(w.iter().any(|w| matches!(w, ValidityWarning::Screening { .. })));

    let mid = PhysicalGeometry::two_spheres(5e-8, 1e-6, 1e-6).unwrap();
    let w = validity_check(&mid, &c);
    assert_eq!(w.len(), 1);
    assert!(matches!(w[0], ValidityWarning::Matsubara { .. }));
}

#[test]
fn analytic_and_numerical_forces_agree() {
    let c = PhysicalConditions::new(300.0, 1e-8).unwrap();
    let g = PhysicalGeometry::two_spheres(3e-7, 1e-6, 2e-6).unwrap();
    for model in [RationalApprox(RationalModel::table_i())] {
        let a = force(&g, &c, &model).unwrap();
        let n = force_finite_difference(&g, &c, &model).unwrap();
        assert!(a < 0.0);
        assert_relative_eq!(a, n, max_relative = 1e-6);
    }
    let a = force(&g, &c, &SingleRoundTrip).unwrap();
    let n = force_finite_difference(&g, &c, &SingleRoundTrip).unwrap();
    assert_relative_eq!(a, n, max_relative = 1e-6);
}

#[test]
fn exact_force_is_close_to_the_approximation() {
    let c = PhysicalConditions::new(300.0, 1e-8).unwrap();
    let g = PhysicalGeometry::plane_sphere(5e-7, 1e-6).unwrap();
    let exact = ExactSolver { variant: KernelVariant::DielectricInElectrolyte, accuracy: AccuracySpec::quick() };
    let fe = force(&g, &c, &exact).unwrap();
    let fa = force(&g, &c, &RationalApprox(RationalModel::table_i())).unwrap();
    assert!((fe / fa - 1.0).abs() < 1e-2, "{fe} {fa}");
}

#[test]
fn force_decays_as_inverse_fourth_power() {
    let c = PhysicalConditions::new(300.0, 1e-8).unwrap();
    let at = |l: f64| force(&PhysicalGeometry::plane_sphere(l, 1e-6).unwrap(), &c, &SingleRoundTrip).unwrap();
    let r = at(4e-4) / at(2e-4);
    assert_relative_eq!(r, 1.0 / 16.0, max_relative = 2e-2);
    assert!(at(1e-2).abs() < 1e-12 * at(1e-7).abs());
}

#[test]
fn sampled_phi_endpoints_and_model_deviation() {
    let acc = AccuracySpec::quick();
    let ys = [1.0 + 1e-2, 1.3, 2.0, 11.0, 101.0];
    let samples = sample_phi(0.1, &ys, &acc).unwrap();
    assert!(samples.windows(2).all(|w| w[1].phi < w[0].phi));
    assert!(samples[0].phi < ZETA3 && samples[0].phi > 1.1);
    assert!((samples[4].phi - 1.0).abs() < 1e-3);
    let dev = max_deviation(&RationalModel::table_i(), &samples).unwrap();
    assert!(dev < 1.3e-3, "{dev}");

    let direct = validate_model(&RationalModel::table_i(), &ys, &[0.1], &acc).unwrap();
    assert_relative_eq!(dev, direct, max_relative = 1e-12);
}

#[test]
fn degenerate_model_measures_distance_from_one() {
    let flat = RationalModel::new(vec![0.5, 2.0], vec![0.5, 2.0], 0.0).unwrap();
    assert_eq!(phi_rational(1.3, &flat).unwrap(), 1.0);
    let y = 1.0 + 1e-3;
    let s = PhiSample { y, u: 0.1, phi: 1.19, err: 0.0 };
    assert_relative_eq!(max_deviation(&flat, &[s]).unwrap(), 0.19, max_relative = 1e-12);
    assert!(single_round_trip(y, 0.1).unwrap() > 0.0);
}
