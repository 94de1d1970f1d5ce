use std::f64::consts::PI;
use std::sync::Arc;

use biofilm_core::fem::{
    apply_dirichlet, assemble_scalar, solve_constrained, Constraints, Degree, Field, ScalarForm, SolveOptions, Space,
};
use biofilm_core::geometry::{build_strip_mesh, DeformationMap, FacetTag};
use biofilm_core::math::{Mat2, Vec2};
use biofilm_core::moving_diffusion::{
    homogenize, pullback_coefficients, solve_moving_diffusion, solve_with_exterior, DiffusionOptions,
    DiffusionProblem, DiffusionTrajectory, Stepper,
};
use biofilm_core::profile::{AffineField, Constant, SharedSignal, Signal, SineBump, UniformGrowth};

fn unit_space(n: usize) -> Arc<Space> {
    Space::new(Arc::new(build_strip_mesh(1.0, &Constant(1.0), n, n).unwrap()), Degree::P1)
}

fn still() -> DeformationMap {
    DeformationMap::graph_height(Arc::new(Constant(1.0)), 1.0, 0.1, 10.0).unwrap()
}

fn growing() -> DeformationMap {
    DeformationMap::graph_height(Arc::new(UniformGrowth { base: 1.0, growth: 0.5 }), 1.0, 0.1, 10.0).unwrap()
}

fn bump() -> DeformationMap {
    let h = SineBump {
        base: 1.0,
        amplitude: 0.4,
        length: 1.0,
    };
    DeformationMap::graph_height(Arc::new(h), 1.0, 0.1, 10.0).unwrap()
}

fn zero(_: Vec2, _: f64) -> f64 {
    0.0
}

fn bubble(x: Vec2) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn run(
    space: &Arc<Space>,
    map: &DeformationMap,
    source: &(dyn Fn(Vec2, f64) -> f64 + Sync),
    boundary: &(dyn Fn(Vec2, f64) -> f64 + Sync),
    e0: &Field,
    opts: DiffusionOptions,
) -> DiffusionTrajectory {
    let problem = DiffusionProblem {
        map,
        kappa: 0.7,
        source,
        boundary,
    };
    solve_moving_diffusion(space, problem, e0, opts).unwrap()
}

#[test]
fn identity_map_coefficients() {
    let f = |y: Vec2, t: f64| y[0] + y[1] * t;
    let c = pullback_coefficients(&still(), 2.0, &f, [0.3, 0.6], 0.4).unwrap();
    assert_eq!(c.a, [[2.0, 0.0], [0.0, 2.0]]);
    assert_eq!(c.b, [0.0, 0.0]);
    assert_eq!((c.c, c.c_rate), (1.0, 0.0));
    assert!((c.f_tilde - (0.3 + 0.24)).abs() < 1e-15);
}

#[test]
fn vertical_stretch_coefficients() {
    let nu = AffineField {
        offset: [0.0, 0.0],
        gradient: [[0.0, 0.0], [0.0, 1.0]],
    };
    let map = DeformationMap::linear_field(Arc::new(nu), 1.0, Arc::new(Constant(1.0)), 0.9).unwrap();
    let kappa = 1.5;
    let mut seed = 17u32;
    let mut next = || {
        seed = seed.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        f64::from(seed >> 8) / f64::from(1u32 << 24)
    };
    for _ in 0..5 {
        let (x, t) = ([next(), next()], 0.8 * next());
        let c = pullback_coefficients(&map, kappa, &zero, x, t).unwrap();
        let expect_a: Mat2 = [[kappa * (1.0 + t), 0.0], [0.0, kappa / (1.0 + t)]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.a[i][j] - expect_a[i][j]).abs() < 1e-13);
            }
        }
        assert!((c.c - (1.0 + t)).abs() < 1e-14);
        assert!(c.b[0].abs() < 1e-14 && (c.b[1] + x[1]).abs() < 1e-13);
    }
}

#[test]
fn pulled_back_diffusion_is_positive_definite() {
    let map = bump();
    let kappa = 0.9;
    let mut seed = 5u32;
    let mut next = || {
        seed = seed.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        f64::from(seed >> 8) / f64::from(1u32 << 24)
    };
    for _ in 0..100 {
        let (x, t) = ([next(), next()], 3.0 * next());
        let c = pullback_coefficients(&map, kappa, &zero, x, t).unwrap();
        let jd = map.jacobian_at(x, t).unwrap();
        let a = c.a;
        assert!((a[0][1] - a[1][0]).abs() < 1e-14);
        let (tr, det) = (a[0][0] + a[1][1], a[0][0] * a[1][1] - a[0][1] * a[1][0]);
        let min_eig = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
        let j = jd.jacobian;
        let frob2 = j[0][0] * j[0][0] + j[0][1] * j[0][1] + j[1][0] * j[1][0] + j[1][1] * j[1][1];
        assert!(min_eig >= kappa * jd.det / frob2 * (1.0 - 1e-12) && min_eig > 0.0);
    }
}

#[test]
fn zero_data_stays_zero() {
    let sp = unit_space(6);
    let map = growing();
    let mut stepper = Stepper::new(
        sp.clone(),
        DiffusionProblem {
            map: &map,
            kappa: 1.0,
            source: &zero,
            boundary: &zero,
        },
        &Field::zeros(sp.clone(), 1),
        0.0,
        1.0,
    )
    .unwrap();
    stepper.step(0.1).unwrap();
    assert_eq!(stepper.state().max_abs(), 0.0);
    assert!((stepper.time() - 0.1).abs() < 1e-15);
}

/// Implicit Euler heat solve on the fixed unit square, assembled directly.
fn fixed_domain_heat(sp: &Arc<Space>, u0: &Field, f: impl Fn(Vec2) -> f64, kappa: f64, dt: f64, steps: usize) -> Field {
    let mut u = u0.clone();
    for _ in 0..steps {
        let prev = u.clone();
        let form = ScalarForm {
            diffusion: Some(&|_| [[dt * kappa, 0.0], [0.0, dt * kappa]]),
            reaction: Some(&|_| 1.0),
            source: Some(&|qp| prev.scalar_at(qp) + dt * f(qp.x)),
            ..Default::default()
        };
        let mut bc = Constraints::new();
        for tag in [FacetTag::GammaMinus, FacetTag::GammaPlus] {
            bc.add_tag(sp, tag, 1, |_| [0.0, 0.0]).unwrap();
        }
        let sys = apply_dirichlet(assemble_scalar(sp, &form).unwrap(), &bc).unwrap();
        let x = solve_constrained(&sys, &SolveOptions::with_tol(1e-14)).unwrap().x;
        u = Field::from_values(sp.clone(), 1, x).unwrap();
    }
    u
}

#[test]
fn still_domain_matches_fixed_heat_solve() {
    let sp = unit_space(8);
    let e0 = Field::interpolate(sp.clone(), bubble);
    let f = |y: Vec2, _t: f64| y[0] * (1.0 - y[0]);
    let traj = run(&sp, &still(), &f, &zero, &e0, DiffusionOptions::new(0.2, 0.05));
    let reference = fixed_domain_heat(&sp, &e0, |x| x[0] * (1.0 - x[0]), 0.7, 0.05, 4);
    let gap = traj.last().l2_distance(&reference).unwrap();
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn constants_are_steady_on_a_moving_domain() {
    let sp = unit_space(8);
    let e_ext = 0.35;
    let g = move |_: Vec2, _: f64| e_ext;
    for map in [growing(), bump()] {
        let traj = run(&sp, &map, &zero, &g, &Field::constant(sp.clone(), e_ext), DiffusionOptions::new(0.5, 0.1));
        for s in &traj.states {
            assert!(s.values().iter().all(|v| (v - e_ext).abs() < 1e-10));
        }
    }
}

#[test]
fn energy_does_not_grow_without_data() {
    let sp = unit_space(10);
    let e0 = Field::interpolate(sp.clone(), bubble);
    for map in [growing(), bump()] {
        let traj = run(&sp, &map, &zero, &zero, &e0, DiffusionOptions::new(1.0, 0.05));
        for w in traj.energy.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{:?}", traj.energy);
        }
    }
}

#[test]
fn runs_are_linear_in_the_data() {
    let sp = unit_space(8);
    let map = bump();
    let opts = DiffusionOptions::new(0.3, 0.05);
    let f1 = |y: Vec2, t: f64| y[0] * y[1] + t;
    let f2 = |y: Vec2, t: f64| (3.0 * t).sin() * y[1];
    let diff = |y: Vec2, t: f64| f1(y, t) - f2(y, t);
    let e1 = Field::interpolate(sp.clone(), bubble);
    let e2 = Field::interpolate(sp.clone(), |x| x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]));
    let a = run(&sp, &map, &f1, &zero, &e1, opts);
    let b = run(&sp, &map, &f2, &zero, &e2, opts);
    let c = run(&sp, &map, &diff, &zero, &e1.axpy(-1.0, &e2).unwrap(), opts);
    let gap = a.last().axpy(-1.0, b.last()).unwrap().l2_distance(c.last()).unwrap();
    assert!(gap <= 1e-10 * c.last().l2_norm().max(1.0), "{gap}");
    let again = run(&sp, &map, &f1, &zero, &e1, opts);
    assert_eq!(again.last().values(), a.last().values());
}

#[test]
fn nodal_values_respect_the_bound() {
    let sp = unit_space(10);
    let map = growing();
    let e0 = Field::interpolate(sp.clone(), |x| 0.8 * bubble(x));
    let f = |y: Vec2, _t: f64| 0.5 * y[0];
    let t_end = 0.6;
    let traj = run(&sp, &map, &f, &zero, &e0, DiffusionOptions::new(t_end, 0.05));
    // c = det J >= 1 on a growing strip
    let bound = 0.8 + t_end * 0.5 + 1e-10;
    assert!(traj.states.iter().all(|s| s.max() <= bound));
}

struct Sine;

impl Signal for Sine {
    fn value(&self, t: f64) -> f64 {
        t.sin()
    }
    fn rate(&self, t: f64) -> f64 {
        t.cos()
    }
}

#[test]
fn homogenization_round_trip() {
    let sp = unit_space(4);
    let e0 = Field::interpolate(sp.clone(), |x| x[0]);
    let identity = homogenize(&e0, Arc::new(Constant(0.0)), 0.0);
    assert_eq!(identity.initial.values(), e0.values());
    assert_eq!(identity.reconstruct(&e0, 3.0).values(), e0.values());
    let g: SharedSignal = Arc::new(Sine);
    let hom = homogenize(&e0, g, 0.5);
    let back = hom.reconstruct(&hom.initial, 0.5);
    assert!(back.l2_distance(&e0).unwrap() < 1e-15);
}

#[test]
fn exterior_signal_with_matching_data_is_reproduced() {
    let sp = unit_space(8);
    let map = growing();
    let g: SharedSignal = Arc::new(Sine);
    let e0 = Field::constant(sp.clone(), 0.0);
    // e0 = g(0) and f = g', so e = g(t) everywhere
    let f = |_: Vec2, t: f64| t.cos();
    let traj = solve_with_exterior(&sp, &map, 1.0, &f, g, &e0, DiffusionOptions::new(1.0, 0.1)).unwrap();
    for (s, &t) in traj.states.iter().zip(&traj.times) {
        assert!(s.values().iter().all(|v| (v - t.sin()).abs() < 1e-10), "t = {t}");
    }
}

#[test]
fn exterior_signal_sets_the_boundary_trace() {
    let sp = unit_space(8);
    let map = bump();
    let e0 = Field::interpolate(sp.clone(), bubble);
    let f = |y: Vec2, _t: f64| y[1];
    let traj = solve_with_exterior(&sp, &map, 1.0, &f, Arc::new(Sine), &e0, DiffusionOptions::new(0.5, 0.05)).unwrap();
    let mut boundary = sp.boundary_nodes(FacetTag::GammaMinus);
    boundary.extend(sp.boundary_nodes(FacetTag::GammaPlus));
    for (s, &t) in traj.states.iter().zip(&traj.times) {
        for &k in &boundary {
            assert!((s.values()[k] - t.sin()).abs() < 1e-14);
        }
    }
}

#[test]
fn trajectory_pushes_forward_to_current_positions() {
    let sp = unit_space(4);
    let map = growing();
    let traj = run(&sp, &map, &zero, &zero, &Field::zeros(sp.clone(), 1), DiffusionOptions::new(0.4, 0.2));
    assert_eq!(traj.times.len(), 3);
    for (x, y, _) in traj.push_forward(2, &map).unwrap() {
        assert!((y[0] - x[0]).abs() < 1e-14);
        assert!((y[1] - 1.2 * x[1]).abs() < 1e-14);
    }
}

#[test]
fn invalid_options_are_rejected() {
    let sp = unit_space(4);
    let map = still();
    let e0 = Field::zeros(sp.clone(), 1);
    let problem = DiffusionProblem {
        map: &map,
        kappa: 1.0,
        source: &zero,
        boundary: &zero,
    };
    let mut bad = Vec::new();
    bad.push(DiffusionOptions::new(1.0, 0.0));
    let mut theta = DiffusionOptions::new(1.0, 0.1);
    theta.theta = 0.3;
    bad.push(theta);
    bad.push(DiffusionOptions::new(11.0, 0.1));
    for opts in bad {
        assert!(solve_moving_diffusion(&sp, problem, &e0, opts).is_err(), "{opts:?}");
    }
}
