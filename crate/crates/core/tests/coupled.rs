use std::sync::Arc;

use biofilm_core::coupled::{
    height_explicit_update, height_flux_residual, mixture_velocity, run_slabs, solve_time_slab, CoupledProblem,
    SlabState, SweepConfig,
};
use biofilm_core::error::Error;
use biofilm_core::fem::{Degree, Field, Space};
use biofilm_core::geometry::{build_strip_mesh, DeformationMap};
use biofilm_core::mechanics::{MaterialParams, TractionLoad};
use biofilm_core::profile::{Constant, UniformGrowth};

fn problem(n: usize, pi: f64) -> CoupledProblem {
    let map = DeformationMap::graph_height(Arc::new(UniformGrowth { base: 1.0, growth: 0.1 }), 1.0, 0.1, 10.0)
        .unwrap();
    let mut mp = MaterialParams::unit();
    mp.pi = pi;
    mp.p_ext = Arc::new(Constant(1.0));
    CoupledProblem {
        reference: Arc::new(build_strip_mesh(1.0, &Constant(1.0), n, n).unwrap()),
        map,
        mp,
        load: TractionLoad::ExteriorPressure,
        e_ext: Arc::new(Constant(0.0)),
        e0: 0.0,
    }
}

fn forced() -> SweepConfig {
    let mut cfg = SweepConfig::default();
    cfg.fraction.force = true;
    cfg
}

fn p2_field(n: usize, f: impl Fn([f64; 2]) -> [f64; 2]) -> Field {
    let mesh = Arc::new(build_strip_mesh(1.0, &Constant(1.0), n, n).unwrap());
    Field::interpolate_vector(Space::new(mesh, Degree::P2), f)
}

#[test]
fn null_data_stays_trivial() {
    let slabs = run_slabs(&problem(6, 0.0), &[0.0, 0.2, 0.4], &SweepConfig::default()).unwrap();
    for s in &slabs {
        assert!(s.sweeps() <= 2);
        assert!(s.v_s.max_abs() < 1e-10 && s.u_s.max_abs() < 1e-10);
        assert!(s.phi_s.max_abs() < 1e-10);
        assert!(s.c.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(s.div_consistency < 1e-10);
    }
}

#[test]
fn fractions_sum_to_one() {
    let slabs = run_slabs(&problem(6, 1e-3), &[0.0, 0.1], &forced()).unwrap();
    for s in &slabs {
        for (a, b) in s.phi_f.values().iter().zip(s.phi_s.values()) {
            assert!((a + b - 1.0).abs() <= 1e-15);
        }
    }
}

fn max_field_gap(a: &SlabState, b: &SlabState) -> f64 {
    a.fields()
        .iter()
        .zip(b.fields().iter())
        .map(|((_, x), (_, y))| x.l2_distance(y).unwrap() / x.l2_norm().max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn resolving_the_same_slab_is_a_fixed_point() {
    let p = problem(6, 1e-3);
    let cfg = forced();
    let first = solve_time_slab(&p, 0.1, None, &cfg).unwrap();
    let again = solve_time_slab(&p, 0.1, Some(&first), &cfg).unwrap();
    assert!(max_field_gap(&first, &again) < 1e-7, "{}", max_field_gap(&first, &again));
}

#[test]
fn small_osmotic_modulus_contracts() {
    let slabs = run_slabs(&problem(8, 1e-3), &[0.0, 0.1, 0.2], &forced()).unwrap();
    for s in &slabs {
        assert!(s.sweeps() <= 10);
        let ratios = s.contraction_ratios();
        assert!(ratios.iter().skip(1).all(|&r| r < 0.8), "{ratios:?}");
    }
}

#[test]
fn first_sweep_admissibility_is_enforced() {
    let err = solve_time_slab(&problem(6, 1e-3), 0.1, None, &SweepConfig::default()).unwrap_err();
    match err {
        Error::Stage { stage, source } => {
            assert_eq!(stage, "volume_fraction");
            assert!(matches!(*source, Error::Inadmissible(_)));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_budget_exhaustion_is_reported() {
    let mut cfg = forced();
    cfg.max_iters = 2;
    let err = solve_time_slab(&problem(6, 1e-3), 0.1, None, &cfg).unwrap_err();
    match err {
        Error::SlabNotConverged { history, .. } => assert_eq!(history.len(), 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn slab_inputs_are_validated() {
    let p = problem(4, 0.0);
    let cfg = SweepConfig::default();
    let later = solve_time_slab(&p, 0.3, None, &cfg).unwrap();
    assert!(solve_time_slab(&p, 0.2, Some(&later), &cfg).is_err());
    assert!(solve_time_slab(&p, 11.0, None, &cfg).is_err());
    for mutate in [
        (|c: &mut SweepConfig| c.max_iters = 0) as fn(&mut SweepConfig),
        |c| c.rel_tol = 0.0,
        |c| c.relaxation = 1.5,
        |c| c.phi_inf = 1.0,
        |c| c.substeps = 0,
    ] {
        let mut bad = SweepConfig::default();
        mutate(&mut bad);
        assert!(bad.validate().is_err());
    }
}

#[test]
fn height_flux_vanishes_at_rest() {
    let r = height_flux_residual(&p2_field(6, |_| [0.0, 0.0]), &|_| 0.0).unwrap();
    assert_eq!(r.norm(), 0.0);
    assert_eq!(r.x1.len(), 7);
    assert!(r.height.iter().all(|h| (h - 1.0).abs() < 1e-15));
}

#[test]
fn height_flux_cancels_rigid_lift() {
    let v = 0.4;
    let r = height_flux_residual(&p2_field(6, |_| [0.0, v]), &|_| v).unwrap();
    assert!(r.norm() < 1e-14);
}

#[test]
fn height_flux_is_exact_for_quadratic_fields() {
    // int_0^1 x1^2 dx2 = x1^2, d/dx1 = 2 x1, bottom v2 = x1 / 2
    let r = height_flux_residual(&p2_field(5, |x| [x[0] * x[0], 0.5 * x[0] + x[1]]), &|_| 0.0).unwrap();
    for (x, d) in r.x1.iter().zip(&r.divergence) {
        assert!((d - 1.5 * x).abs() < 1e-12, "{x}: {d}");
    }
}

#[test]
fn height_flux_needs_quadratic_vectors() {
    let mesh = Arc::new(build_strip_mesh(1.0, &Constant(1.0), 4, 4).unwrap());
    let v = Field::zeros(Space::new(mesh, Degree::P1), 2);
    assert!(height_flux_residual(&v, &|_| 0.0).is_err());
}

#[test]
fn explicit_height_update_cases() {
    let still = height_flux_residual(&p2_field(4, |_| [0.0, 0.0]), &|_| 0.0).unwrap();
    let u = height_explicit_update(&still, 0.1, 0.5).unwrap();
    assert!(u.experimental);
    assert_eq!(u.height, still.height);

    let lift = height_flux_residual(&p2_field(4, |_| [0.0, 0.2]), &|_| 0.0).unwrap();
    let u = height_explicit_update(&lift, 0.1, 0.5).unwrap();
    assert_eq!(u.dt, 0.1);
    assert!(u.height.iter().all(|h| (h - 1.02).abs() < 1e-14));

    // limited so that no column moves by more than 0.1 floor
    let u = height_explicit_update(&lift, 10.0, 0.5).unwrap();
    assert!((u.dt - 0.25).abs() < 1e-14);
    assert!(u.height.iter().all(|h| (h - 1.05).abs() < 1e-14));

    let sink = height_flux_residual(&p2_field(4, |_| [0.0, -2.0]), &|_| 0.0).unwrap();
    let u = height_explicit_update(&sink, 0.1, 0.999).unwrap();
    assert_eq!(u.clipped.len(), u.height.len());
    assert!(u.height.iter().all(|&h| h == 0.999));
    assert!(height_explicit_update(&sink, 0.0, 0.5).is_err());
}

#[test]
fn mixture_velocity_at_rest_is_zero() {
    let p = problem(6, 0.0);
    let s = &run_slabs(&p, &[0.0], &SweepConfig::default()).unwrap()[0];
    assert!(mixture_velocity(&p.mp, s).unwrap().max_abs() < 1e-10);
}
