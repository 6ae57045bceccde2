use std::f64::consts::PI;

use approx::assert_relative_eq;
use levitorque_core::lifshitz::*;
use levitorque_core::materials::{catalog, DielectricModel, MaterialSet};
use levitorque_core::Error;
use proptest::prelude::*;

const D0: f64 = 266e-9;
const T: f64 = 300.0;

fn solver(plate: &str) -> CasimirSolver {
    CasimirSolver::new(
        MaterialSet::with_plate(plate).unwrap(),
        RodGeometry::default_silica(),
        QuadratureSpec::default(),
    )
    .unwrap()
}

fn isotropic_solver() -> CasimirSolver {
    let mut m = MaterialSet::with_plate("batio3").unwrap();
    m.plate = m.plate.isotropic_from_perp();
    CasimirSolver::new(m, RodGeometry::default_silica(), QuadratureSpec::default()).unwrap()
}

#[test]
fn rod_geometry_formulas() {
    let r = RodGeometry::default_silica();
    let v = PI * 20e-9f64.powi(2) * 200e-9;
    assert_relative_eq!(r.volume(), v, max_relative = 1e-12);
    assert_relative_eq!(r.mass(), 2200.0 * v, max_relative = 1e-12);
    assert_relative_eq!(r.moment_of_inertia(), 2200.0 * PI * 20e-9f64.powi(2) * 200e-9f64.powi(3) / 12.0, max_relative = 1e-12);
    assert!(RodGeometry::new(30e-9, 20e-9, 2200.0).is_err());
}

#[test]
fn result_is_attractive_and_consistent() {
    let r = solver("batio3").evaluate(D0, PI / 4.0, T).unwrap();
    assert!(r.g_per_length < 0.0);
    assert!(r.force < 0.0);
    assert_eq!(r.free_energy, r.g_per_length * 200e-9);
    assert!(r.est_rel_error < QuadratureSpec::default().max_rel_error);
    assert!(r.n_terms > 3);
}

#[test]
fn free_function_wrappers_agree_with_solver() {
    let m = MaterialSet::with_plate("calcite").unwrap();
    let rod = RodGeometry::default_silica();
    let q = QuadratureSpec::default();
    let r = solver("calcite").evaluate(300e-9, 0.3, T).unwrap();
    assert_eq!(free_energy_per_length(300e-9, 0.3, &m, &rod, T, &q).unwrap(), r);
    assert_eq!(casimir_force(300e-9, 0.3, &m, &rod, T, &q).unwrap(), r.force);
    assert_eq!(casimir_torque(300e-9, 0.3, &m, &rod, T, &q).unwrap(), r.torque);
}

#[test]
fn domain_errors() {
    let s = solver("batio3");
    assert!(matches!(s.evaluate(99e-9, 0.1, T), Err(Error::Domain(_))));
    assert!(matches!(s.evaluate(D0, f64::NAN, T), Err(Error::Domain(_))));
    assert!(matches!(s.evaluate(D0, 0.1, 0.0), Err(Error::Domain(_))));
}

#[test]
fn starved_term_budget_is_a_convergence_failure() {
    let q = QuadratureSpec { max_terms: 4, ..QuadratureSpec::default() };
    let s = CasimirSolver::new(MaterialSet::with_plate("batio3").unwrap(), RodGeometry::default_silica(), q).unwrap();
    assert!(matches!(s.evaluate(D0, 0.5, T), Err(Error::Convergence(_))));
}

#[test]
fn force_matches_finite_difference_of_energy() {
    let s = solver("batio3");
    for d in [150e-9, D0, 450e-9] {
        let h = 1e-3 * d;
        let up = s.evaluate(d + h, 0.6, T).unwrap().free_energy;
        let dn = s.evaluate(d - h, 0.6, T).unwrap().free_energy;
        let fd = -(up - dn) / (2.0 * h);
        let f = s.evaluate(d, 0.6, T).unwrap().force;
        assert_relative_eq!(f, fd, max_relative = 1e-4);
    }
}

#[test]
fn torque_matches_finite_difference_of_energy() {
    let s = solver("calcite");
    for theta in [0.3, PI / 4.0, 1.2, 2.5] {
        let h = 1e-4;
        let up = s.evaluate(D0, theta + h, T).unwrap().free_energy;
        let dn = s.evaluate(D0, theta - h, T).unwrap().free_energy;
        let fd = -(up - dn) / (2.0 * h);
        let m = s.evaluate(D0, theta, T).unwrap().torque;
        assert_relative_eq!(m, fd, max_relative = 1e-4);
    }
}

#[test]
fn primed_sum_weight_identity() {
    let s = solver("batio3");
    let half = s.evaluate(D0, 0.7, T).unwrap();
    let full = s.evaluate_weighted(D0, 0.7, T, 1.0).unwrap();
    let t0 = s.matsubara_term(0, D0, 0.7, T).unwrap();
    assert_relative_eq!(full.g_per_length - half.g_per_length, 0.5 * t0, max_relative = 1e-9);
}

#[test]
fn energy_scales_with_radius_squared() {
    let m = MaterialSet::with_plate("batio3").unwrap();
    let q = QuadratureSpec::default();
    let thin = CasimirSolver::new(m.clone(), RodGeometry::new(200e-9, 20e-9, 2200.0).unwrap(), q.clone()).unwrap();
    let thick = CasimirSolver::new(m, RodGeometry::new(200e-9, 40e-9, 2200.0).unwrap(), q).unwrap();
    let a = thin.evaluate(D0, 0.4, T).unwrap().g_per_length;
    let b = thick.evaluate(D0, 0.4, T).unwrap().g_per_length;
    assert_relative_eq!(b / a, 4.0, max_relative = 1e-12);
}

#[test]
fn identical_media_give_zero() {
    let one = DielectricModel::Constant { value: 1.0 };
    let mut m = MaterialSet::with_plate("calcite").unwrap();
    m.plate.eps_par = one;
    m.plate.eps_perp = one;
    m.rod.model = one;
    let s = CasimirSolver::new(m, RodGeometry::default_silica(), QuadratureSpec::default()).unwrap();
    let r = s.evaluate(D0, 0.9, T).unwrap();
    assert_eq!(r.g_per_length, 0.0);
    assert_eq!(r.torque, 0.0);
}

#[test]
fn torque_vanishes_on_the_axes_and_is_odd() {
    let s = solver("batio3");
    let h = s.angular_harmonics(D0, T).unwrap();
    let m0 = h.torque_amplitude().abs();
    assert!(h.torque(0.0).abs() < 1e-3 * m0);
    assert!(h.torque(PI / 2.0).abs() < 1e-3 * m0);
    for k in 0..12 {
        let th = k as f64 * PI / 12.0;
        assert!((h.torque(th) + h.torque(-th)).abs() < 1e-12 * m0);
        assert!((h.torque(th) + h.torque(th + PI / 2.0)).abs() < 1e-2 * m0);
    }
    // the harmonic reconstruction agrees with direct evaluation
    let direct = s.evaluate(D0, 0.37, T).unwrap();
    assert_relative_eq!(h.torque(0.37), direct.torque, max_relative = 1e-9);
    assert_relative_eq!(h.force(0.37), direct.force, max_relative = 1e-9);
    assert_relative_eq!(h.g_per_length(0.37), direct.g_per_length, max_relative = 1e-9);
}

#[test]
fn isotropic_plate_has_no_torque() {
    let m0 = solver("batio3").angular_harmonics(D0, T).unwrap().torque_amplitude().abs();
    let s = isotropic_solver();
    for k in 0..8 {
        let th = k as f64 * PI / 8.0;
        assert!(s.evaluate(D0, th, T).unwrap().torque.abs() < 1e-3 * m0);
    }
}

#[test]
fn quadrature_doubling_is_stable() {
    let m = MaterialSet::with_plate("batio3").unwrap();
    let q = QuadratureSpec::default();
    let a = CasimirSolver::new(m.clone(), RodGeometry::default_silica(), q.clone()).unwrap();
    let b = CasimirSolver::new(m, RodGeometry::default_silica(), q.refined(2)).unwrap();
    let ga = a.evaluate(D0, PI / 4.0, T).unwrap().g_per_length;
    let gb = b.evaluate(D0, PI / 4.0, T).unwrap().g_per_length;
    assert!(((ga - gb) / gb).abs() < 1e-3);
}

#[test]
fn separation_ratio_against_dense_quadrature() {
    let m = MaterialSet::with_plate("batio3").unwrap();
    let dense = CasimirSolver::new(m, RodGeometry::default_silica(), QuadratureSpec::default().refined(4)).unwrap();
    let s = solver("batio3");
    let ratio = |s: &CasimirSolver| {
        s.evaluate(532e-9, PI / 4.0, T).unwrap().g_per_length / s.evaluate(D0, PI / 4.0, T).unwrap().g_per_length
    };
    let oracle = ratio(&dense);
    assert_relative_eq!(ratio(&s), oracle, max_relative = 1e-5);
    assert_relative_eq!(oracle, GOLDEN_RATIO_532_266, max_relative = 1e-6);
}

const GOLDEN_RATIO_532_266: f64 = 0.072666075766862;

#[test]
fn calcite_is_weaker_than_barium_titanate() {
    let b = solver("batio3").evaluate(D0, PI / 4.0, T).unwrap();
    let c = solver("calcite").evaluate(D0, PI / 4.0, T).unwrap();
    assert!(c.force.abs() < b.force.abs());
    assert!(c.torque.abs() < b.torque.abs());
}

#[test]
fn sweep_reports_grid_index_of_failures() {
    let s = solver("calcite");
    let pts = SweepGrid::Separation(vec![120e-9, 200e-9, 400e-9]).points(0.0, PI / 4.0, T).unwrap();
    let rows = sweep(&s, &pts).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1].force.abs() < w[0].force.abs()));

    let q = QuadratureSpec { max_terms: 4, ..QuadratureSpec::default() };
    let starved = CasimirSolver::new(MaterialSet::with_plate("calcite").unwrap(), RodGeometry::default_silica(), q).unwrap();
    match sweep(&starved, &pts) {
        Err(Error::GridPoint { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected a grid-point failure, got {other:?}"),
    }
    assert!(SweepGrid::Angle(vec![0.1, 0.3, 0.2]).points(D0, 0.0, T).is_err());
    assert!(SweepGrid::Temperature(vec![]).points(D0, 0.0, T).is_err());
}

#[test]
fn sweep_csv_layout() {
    let s = solver("calcite");
    let pts = SweepGrid::Angle(vec![0.1, 0.2]).points(D0, 0.0, T).unwrap();
    let rows = sweep(&s, &pts).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d_m,theta_rad,T_K,g_J_per_m,G_J,F_N,M_Nm,n_terms,est_rel_err");
    assert_eq!(lines.count(), 2);
}

#[test]
fn table_reproduces_direct_evaluation() {
    let s = solver("batio3");
    let table = CasimirTable::build(&s, 100e-9, 600e-9, 40, T).unwrap();
    for d in [130e-9, 257.3e-9, 410e-9] {
        let r = s.evaluate(d, 0.8, T).unwrap();
        assert_relative_eq!(table.torque(d, 0.8), r.torque, max_relative = 1e-4);
        assert_relative_eq!(table.force(d, 0.8), r.force, max_relative = 1e-4);
    }
    assert_eq!(table.d_range(), (100e-9, 600e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn isotropic_plate_torque_is_negligible(theta in 0.0f64..PI, d in 150e-9f64..600e-9) {
        let r = isotropic_solver().evaluate(d, theta, T).unwrap();
        let reference = solver("batio3").evaluate(d, PI / 4.0, T).unwrap().torque.abs();
        prop_assert!(r.torque.abs() < 1e-3 * reference);
    }

    #[test]
    fn energy_even_in_theta(theta in 0.0f64..PI) {
        let s = solver("calcite");
        let a = s.evaluate(D0, theta, T).unwrap();
        let b = s.evaluate(D0, -theta, T).unwrap();
        prop_assert!((a.g_per_length - b.g_per_length).abs() <= 1e-12 * a.g_per_length.abs());
        prop_assert!((a.torque + b.torque).abs() <= 1e-10 * a.torque.abs().max(1e-40));
    }
}

#[test]
fn catalog_has_both_plates() {
    for p in catalog::PLATES {
        assert!(MaterialSet::with_plate(p).is_ok());
    }
}
