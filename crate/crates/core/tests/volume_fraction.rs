use std::sync::Arc;

use biofilm_core::error::Error;
use biofilm_core::fem::{Degree, Field, Space};
use biofilm_core::geometry::build_strip_mesh;
use biofilm_core::mechanics::MaterialParams;
use biofilm_core::profile::Constant;
use biofilm_core::volume_fraction::{
    check_admissibility, solid_fraction, solve_fraction, solve_fraction_regularized, ContinuationOptions, Growth,
};
use proptest::prelude::*;

fn spaces(n: usize) -> (Arc<Space>, Arc<Space>) {
    let mesh = Arc::new(build_strip_mesh(1.0, &Constant(1.0), n, n).unwrap());
    (Space::new(mesh.clone(), Degree::P1), Space::new(mesh, Degree::P2))
}

fn contracting(vs: &Arc<Space>, beta: f64) -> Field {
    Field::interpolate_vector(vs.clone(), |x| [-beta * x[0], -beta * x[1]])
}

#[test]
fn zero_velocity_is_admissible() {
    let (_, vs) = spaces(6);
    let r = check_admissibility(&Field::zeros(vs, 2), &MaterialParams::unit()).unwrap();
    assert!(r.admissible);
    assert_eq!((r.max_div, r.max_flux_normal, r.grad_norm), (0.0, 0.0, 0.0));
}

#[test]
fn contracting_field_admissibility_threshold() {
    let (_, vs) = spaces(6);
    let mp = MaterialParams::unit();
    let r = check_admissibility(&contracting(&vs, 0.1), &mp).unwrap();
    assert!(r.admissible, "{r:?}");
    assert!((r.max_div + 0.2).abs() < 1e-12);
    assert!(r.max_flux_normal <= 1e-12);
    let r = check_admissibility(&contracting(&vs, 0.3), &mp).unwrap();
    assert!(!r.admissible, "{r:?}");
}

#[test]
fn uniform_drift_is_inadmissible() {
    let (_, vs) = spaces(6);
    let v = Field::interpolate_vector(vs, |_| [1.0, 0.0]);
    let r = check_admissibility(&v, &MaterialParams::unit()).unwrap();
    assert!(!r.admissible);
    assert!((r.max_flux_normal - 1.0).abs() < 1e-12);
}

#[test]
fn inadmissible_field_is_refused_unless_forced() {
    let (sp, vs) = spaces(6);
    let v = Field::interpolate_vector(vs, |_| [0.2, 0.0]);
    let mp = MaterialParams::unit();
    let err = solve_fraction(&sp, &v, &mp, Growth::Constant(1.0), ContinuationOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Inadmissible(_)));
    let opts = ContinuationOptions {
        force: true,
        ..Default::default()
    };
    let (_, diag) = solve_fraction(&sp, &v, &mp, Growth::Constant(1.0), opts).unwrap();
    assert!(diag.forced);
}

#[test]
fn regularized_with_zero_velocity_is_one() {
    let (sp, vs) = spaces(6);
    for eps in [1e-6, 1e-2, 1.0] {
        let phi = solve_fraction_regularized(&sp, &Field::zeros(vs.clone(), 2), Growth::Constant(0.7), eps).unwrap();
        assert!(phi.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    }
}

#[test]
fn regularized_contracting_field_constant() {
    let (sp, vs) = spaces(16);
    let beta = 0.1;
    let phi = solve_fraction_regularized(&sp, &contracting(&vs, beta), Growth::Constant(1.0), 1e-6).unwrap();
    let closed = 1.0 / (1.0 + 2.0 * beta);
    assert!(phi.values().iter().all(|v| (v - closed).abs() < 1e-4));
}

#[test]
fn nonpositive_eps_is_rejected() {
    let (sp, vs) = spaces(4);
    assert!(solve_fraction_regularized(&sp, &Field::zeros(vs, 2), Growth::Constant(1.0), 0.0).is_err());
}

#[test]
fn zero_velocity_converges_immediately() {
    let (sp, vs) = spaces(6);
    let (phi, diag) = solve_fraction(
        &sp,
        &Field::zeros(vs, 2),
        &MaterialParams::unit(),
        Growth::Constant(1.0),
        ContinuationOptions::default(),
    )
    .unwrap();
    assert_eq!(diag.history.len(), 2);
    assert!(diag.history[1].cauchy < 1e-12);
    assert!(phi.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
}

#[test]
fn cauchy_differences_decay() {
    let (sp, vs) = spaces(12);
    let v = Field::interpolate_vector(vs, |x| [-0.05 * x[0] * x[0], -0.05 * x[1] * x[1]]);
    let (_, diag) =
        solve_fraction(&sp, &v, &MaterialParams::unit(), Growth::Constant(1.0), ContinuationOptions::default())
            .unwrap();
    let c: Vec<f64> = diag.history.iter().skip(1).map(|s| s.cauchy).collect();
    assert!(c.len() >= 3);
    assert!(c.windows(2).all(|w| w[1] <= w[0]), "{c:?}");
}

#[test]
fn continuation_start_does_not_matter() {
    let (sp, vs) = spaces(12);
    let v = Field::interpolate_vector(vs, |x| [-0.05 * x[0] * x[0], -0.05 * x[1] * x[1]]);
    let mp = MaterialParams::unit();
    let base = ContinuationOptions::default();
    let (a, da) = solve_fraction(&sp, &v, &mp, Growth::Constant(1.0), base).unwrap();
    let half = ContinuationOptions {
        eps0: Some(da.history[0].eps / 2.0),
        ..base
    };
    let (b, _) = solve_fraction(&sp, &v, &mp, Growth::Constant(1.0), half).unwrap();
    assert!(a.l2_distance(&b).unwrap() <= 10.0 * base.tol);
}

#[test]
fn quadratic_sink_satisfies_bounds_and_gradient_estimate() {
    let (sp, vs) = spaces(16);
    let beta = 0.05;
    let v = Field::interpolate_vector(vs, |x| [-beta * x[0] * x[0], -beta * x[1] * x[1]]);
    let mp = MaterialParams::unit();
    let (phi, diag) = solve_fraction(&sp, &v, &mp, Growth::Constant(1.0), ContinuationOptions::default()).unwrap();
    assert!(diag.admissibility.admissible);
    assert!(phi.min() >= -1e-8 && phi.max() <= 1.0 + 1e-8, "[{}, {}]", phi.min(), phi.max());
    assert!(diag.grad_bound > 0.0);
    assert!(diag.grad_phi <= diag.grad_bound + 1e-6, "{} > {}", diag.grad_phi, diag.grad_bound);
}

#[test]
fn solid_fraction_complements() {
    let (sp, _) = spaces(4);
    let ones = Field::constant(sp.clone(), 1.0);
    assert!(solid_fraction(&ones).max_abs() == 0.0);
    let s = solid_fraction(&Field::constant(sp.clone(), 0.8));
    assert!(s.values().iter().all(|v| (v - 0.2).abs() < 1e-15));
}

proptest! {
    #[test]
    fn solid_and_fluid_sum_to_one(values in prop::collection::vec(0.0f64..1.0, 25)) {
        let (sp, _) = spaces(4);
        let phi = Field::from_values(sp, 1, values).unwrap();
        let s = solid_fraction(&phi);
        for (a, b) in phi.values().iter().zip(s.values()) {
            prop_assert!((a + b - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn contracting_fields_stay_in_bounds(beta in 0.01f64..0.2, k in 0.9f64..2.0) {
        let (sp, vs) = spaces(8);
        let mut mp = MaterialParams::unit();
        mp.k_s = k;
        let (phi, _) = solve_fraction(&sp, &contracting(&vs, beta), &mp, Growth::Constant(k), ContinuationOptions::default()).unwrap();
        prop_assert!(phi.min() >= -1e-8 && phi.max() <= 1.0 + 1e-8);
        let closed = k / (k + 2.0 * beta);
        prop_assert!(phi.values().iter().all(|v| (v - closed).abs() < 1e-6));
    }
}
