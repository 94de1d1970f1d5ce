use std::sync::Arc;

use biofilm_core::concentration::{coercivity_margin, diameter, solve_concentration, MONOD_PASSES};
use biofilm_core::error::Error;
use biofilm_core::fem::{Degree, Field, Space};
use biofilm_core::geometry::{build_strip_mesh, build_strip_mesh_with, FacetTag, StripOptions};
use biofilm_core::mechanics::{MaterialParams, MonodMode};
use biofilm_core::profile::Constant;

fn spaces(length: f64, nx: usize, ny: usize) -> (Arc<Space>, Arc<Space>) {
    let mesh = Arc::new(build_strip_mesh(length, &Constant(1.0), nx, ny).unwrap());
    (Space::new(mesh.clone(), Degree::P1), Space::new(mesh, Degree::P2))
}

fn column(n: usize) -> (Arc<Space>, Arc<Space>) {
    let opts = StripOptions {
        lateral: FacetTag::GammaPlus,
    };
    let mesh = Arc::new(build_strip_mesh_with(0.25, &Constant(1.0), n / 4, n, opts).unwrap());
    (Space::new(mesh.clone(), Degree::P1), Space::new(mesh, Degree::P2))
}

fn swirl(vs: &Arc<Space>, a: f64) -> Field {
    Field::interpolate_vector(vs.clone(), |x| [a * x[1] * (1.0 - x[1]), -a * x[0] * x[1]])
}

#[test]
fn no_biomass_no_flow_keeps_boundary_value() {
    let (sp, vs) = spaces(1.0, 6, 6);
    let mut mp = MaterialParams::unit();
    mp.c0 = 0.8;
    let (c, report) = solve_concentration(&sp, &Field::zeros(vs, 2), &Field::zeros(sp.clone(), 1), &mp).unwrap();
    assert!(c.values().iter().all(|v| (v - 0.8).abs() < 1e-12));
    assert_eq!(report.negative_at, None);
}

#[test]
fn margin_examples() {
    let (_, vs) = spaces(3f64.sqrt(), 4, 4);
    let mp = MaterialParams::unit();
    assert!((diameter(vs.mesh()) - 2.0).abs() < 1e-12);
    assert_eq!(coercivity_margin(vs.mesh(), &Field::zeros(vs.clone(), 2), &mp), 1.0);
    let v = Field::interpolate_vector(vs.clone(), |_| [0.0, 0.1]);
    assert!((coercivity_margin(vs.mesh(), &v, &mp) - 0.8).abs() < 1e-12);
}

#[test]
fn strong_flow_is_refused() {
    let (sp, vs) = spaces(1.0, 4, 4);
    let v = Field::interpolate_vector(vs, |_| [1.0, 0.0]);
    let err = solve_concentration(&sp, &v, &Field::zeros(sp.clone(), 1), &MaterialParams::unit()).unwrap_err();
    assert!(matches!(err, Error::NotCoercive(m) if m <= 0.0));
}

#[test]
fn column_matches_closed_form_at_mid_height() {
    let mut mp = MaterialParams::unit();
    mp.k_c = 0.5;
    mp.d = 0.8;
    mp.c0 = 1.0;
    let a = mp.k_c * mp.g_c / mp.d;
    for n in [8, 16] {
        let (sp, vs) = column(n);
        let (c, report) =
            solve_concentration(&sp, &Field::zeros(vs, 2), &Field::constant(sp.clone(), 1.0), &mp).unwrap();
        let mid = sp.nodes().iter().position(|x| x[0] == 0.0 && (x[1] - 0.5).abs() < 1e-12).unwrap();
        let exact = 1.0 + a * (0.125 - 0.5);
        let h = 1.0 / n as f64;
        assert!((c.values()[mid] - exact).abs() <= h * h, "n={n}");
        assert!(report.min >= 0.0);
    }
}

#[test]
fn too_little_substrate_is_flagged() {
    let (sp, vs) = column(8);
    let mut mp = MaterialParams::unit();
    mp.c0 = 0.3;
    let (_, report) = solve_concentration(&sp, &Field::zeros(vs, 2), &Field::constant(sp.clone(), 1.0), &mp).unwrap();
    let at = report.negative_at.expect("negative concentration not flagged");
    assert!((at[1] - 1.0).abs() < 1e-12);
}

#[test]
fn substratum_trace_is_exact() {
    let (sp, vs) = spaces(1.0, 8, 8);
    let mut mp = MaterialParams::unit();
    mp.c0 = 2.0;
    let phi = Field::interpolate(sp.clone(), |x| 0.5 + 0.3 * x[0]);
    let (c, _) = solve_concentration(&sp, &swirl(&vs, 0.3), &phi, &mp).unwrap();
    for node in sp.boundary_nodes(FacetTag::GammaMinus) {
        assert_eq!(c.values()[node], 2.0);
    }
}

#[test]
fn repeated_solves_are_identical() {
    let (sp, vs) = spaces(1.0, 8, 8);
    let phi = Field::interpolate(sp.clone(), |x| x[0] * x[1]);
    let v = swirl(&vs, 0.2);
    let mp = MaterialParams::unit();
    let (a, _) = solve_concentration(&sp, &v, &phi, &mp).unwrap();
    let (b, _) = solve_concentration(&sp, &v, &phi, &mp).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn superposition_in_biomass_and_boundary_value() {
    let (sp, vs) = spaces(1.0, 8, 8);
    let v = swirl(&vs, 0.2);
    let solve = |phi: &Field, c0: f64| {
        let mut mp = MaterialParams::unit();
        mp.c0 = c0;
        solve_concentration(&sp, &v, phi, &mp).unwrap().0
    };
    let p1 = Field::interpolate(sp.clone(), |x| x[0]);
    let p2 = Field::interpolate(sp.clone(), |x| 1.0 - x[1] * x[1]);
    let combo = p1.map_values(|v| 2.0 * v).axpy(-0.5, &p2).unwrap();
    let lhs = solve(&combo, 2.0 * 1.5 - 0.5 * 0.4);
    let rhs = solve(&p1, 1.5).map_values(|v| 2.0 * v).axpy(-0.5, &solve(&p2, 0.4)).unwrap();
    let gap = lhs.l2_distance(&rhs).unwrap();
    assert!(gap <= 1e-10 * lhs.l2_norm(), "{gap}");
}

#[test]
fn live_monod_relinearizes() {
    let (sp, vs) = column(16);
    let mut mp = MaterialParams::unit();
    mp.monod = MonodMode::Live;
    mp.c0 = 1.0;
    mp.monod_k_c = 0.5;
    let phi = Field::constant(sp.clone(), 1.0);
    let (c, report) = solve_concentration(&sp, &Field::zeros(vs.clone(), 2), &phi, &mp).unwrap();
    assert_eq!(report.monod_changes.len(), MONOD_PASSES);
    let last = report.monod_changes[MONOD_PASSES - 1];
    assert!(last < report.monod_changes[1] && last < 1e-2, "{:?}", report.monod_changes);
    assert!(c.min() > 0.0 && c.max() <= 1.0 + 1e-12);
    // saturating uptake consumes less than the frozen factor g_c = 1
    mp.monod = MonodMode::Frozen;
    let (frozen, _) = solve_concentration(&sp, &Field::zeros(vs, 2), &phi, &mp).unwrap();
    assert!(c.min() > frozen.min());
}
