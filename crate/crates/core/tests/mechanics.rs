use std::f64::consts::PI;
use std::sync::Arc;

use biofilm_core::fem::{Degree, Field, Space};
use biofilm_core::geometry::{build_strip_mesh_with, DeformationMap, FacetTag, StripOptions};
use biofilm_core::math::{Mat2, Vec2};
use biofilm_core::mechanics::{
    darcy_fluid_velocity, solve_displacement, solve_pressure, solve_pressure_rate, solve_velocity,
    traction_correction, BoundaryLoad, MaterialParams, PressureMode, RateBoundary, TractionField, TractionInputs,
    TractionLoad, TractionVariant,
};
use biofilm_core::profile::{AffineField, Constant, Ramp};

fn space(n: usize, degree: Degree, lateral: FacetTag) -> Arc<Space> {
    let mesh = build_strip_mesh_with(1.0, &Constant(1.0), n, n, StripOptions { lateral }).unwrap();
    Space::new(Arc::new(mesh), degree)
}

fn clamped(n: usize, degree: Degree) -> Arc<Space> {
    space(n, degree, FacetTag::GammaMinus)
}

fn max_gap(f: &Field, exact: impl Fn(Vec2) -> Vec2) -> f64 {
    let mut gap: f64 = 0.0;
    for (k, x) in f.space().nodes().iter().enumerate() {
        let (a, b) = (f.node(k), exact(*x));
        for i in 0..f.components() {
            gap = gap.max((a[i] - b[i]).abs());
        }
    }
    gap
}

fn elastic_params(lambda: f64, mu: f64) -> MaterialParams {
    let mut mp = MaterialParams::unit();
    mp.elastic.lambda = lambda;
    mp.elastic.mu = mu;
    mp
}

#[test]
fn pressure_rate_vanishes_without_data() {
    let sp = clamped(8, Degree::P1);
    let e = Field::zeros(sp.clone(), 1);
    let p = solve_pressure_rate(&sp, &MaterialParams::unit(), &e, 0.0, RateBoundary::Exterior).unwrap();
    assert!(p.max_abs() < 1e-14);
}

#[test]
fn pressure_rate_follows_exterior_rate() {
    let sp = clamped(8, Degree::P2);
    let mut mp = MaterialParams::unit();
    mp.p_ext = Arc::new(Ramp { value: 2.0, slope: 3.0 });
    let e = Field::zeros(sp.clone(), 1);
    let p = solve_pressure_rate(&sp, &mp, &e, 0.4, RateBoundary::Exterior).unwrap();
    assert!(max_gap(&p, |_| [3.0, 0.0]) < 1e-10);
}

#[test]
fn pressure_rate_harmonic_pair() {
    let mp = elastic_params(1.5, 0.75);
    let m = 2.0 * 0.75 + 1.5;
    for degree in [Degree::P1, Degree::P2] {
        let sp = clamped(8, degree);
        let e = Field::interpolate(sp.clone(), |x| x[0] * x[1]);
        let trace = |x: Vec2| m * x[0] * x[1];
        let p = solve_pressure_rate(&sp, &mp, &e, 0.0, RateBoundary::Function(&trace)).unwrap();
        assert!(max_gap(&p, |x| [trace(x), 0.0]) < 1e-9, "{degree:?}");
    }
}

#[test]
fn velocity_vanishes_without_data() {
    let sp = clamped(6, Degree::P2);
    let p_rate = Field::zeros(Space::new(sp.mesh().clone(), Degree::P1), 1);
    let v = solve_velocity(&sp, &MaterialParams::unit(), &p_rate, &BoundaryLoad::zeros(sp.mesh())).unwrap();
    assert!(v.max_abs() < 1e-14);
}

#[test]
fn balanced_pressure_rate_gives_no_motion() {
    let c = 0.7;
    let sp = clamped(8, Degree::P2);
    let p_rate = Field::constant(Space::new(sp.mesh().clone(), Degree::P1), c);
    let g = BoundaryLoad::sample(&sp, |fp| Ok([-c * fp.normal[0], -c * fp.normal[1]])).unwrap();
    let v = solve_velocity(&sp, &MaterialParams::unit(), &p_rate, &g).unwrap();
    assert!(v.max_abs() < 1e-10, "{}", v.max_abs());
}

/// Traction `sigma n` of the field `(0, alpha x2)` on the free faces of the
/// unit square: left, right and top.
fn uniaxial_traction(lambda: f64, mu: f64, alpha: f64, x: Vec2, n: Vec2) -> Vec2 {
    let s = [[lambda * alpha, 0.0], [0.0, (lambda + 2.0 * mu) * alpha]];
    [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]].map(|v| if x[1] < 0.0 { 0.0 } else { v })
}

#[test]
fn velocity_recovers_uniaxial_stretch() {
    let (lambda, mu, alpha) = (1.3, 0.6, 0.25);
    let mp = elastic_params(lambda, mu);
    let sp = space(4, Degree::P2, FacetTag::GammaPlus);
    let p_rate = Field::zeros(Space::new(sp.mesh().clone(), Degree::P1), 1);
    let g = BoundaryLoad::sample(&sp, |fp| Ok(uniaxial_traction(lambda, mu, alpha, fp.x, fp.normal))).unwrap();
    let v = solve_velocity(&sp, &mp, &p_rate, &g).unwrap();
    assert!(max_gap(&v, |x| [0.0, alpha * x[1]]) < 1e-9);
}

/// Position-dependent stand-in for `sigma n` on the three free faces.
struct FaceTraction {
    lambda: f64,
    mu: f64,
    alpha: f64,
}

impl TractionField for FaceTraction {
    fn value(&self, x: Vec2, _t: f64) -> Vec2 {
        let n = if x[0] < 1e-12 {
            [-1.0, 0.0]
        } else if x[0] > 1.0 - 1e-12 {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        uniaxial_traction(self.lambda, self.mu, self.alpha, x, n)
    }
    fn rate(&self, _x: Vec2, _t: f64) -> Vec2 {
        [0.0, 0.0]
    }
    fn gradient(&self, _x: Vec2, _t: f64) -> Mat2 {
        [[0.0; 2]; 2]
    }
}

#[test]
fn displacement_recovers_uniaxial_stretch() {
    let (lambda, mu, alpha) = (0.8, 1.1, 0.1);
    let mp = elastic_params(lambda, mu);
    let sp = space(4, Degree::P2, FacetTag::GammaPlus);
    let s1 = Space::new(sp.mesh().clone(), Degree::P1);
    let zero = Field::zeros(s1, 1);
    let load = TractionLoad::Field(Arc::new(FaceTraction { lambda, mu, alpha }));
    let u = solve_displacement(&sp, &mp, &zero, &zero, &load, 0.0).unwrap();
    assert!(max_gap(&u, |x| [0.0, alpha * x[1]]) < 1e-9);
}

#[test]
fn exterior_pressure_alone_does_not_deform() {
    let sp = clamped(8, Degree::P2);
    let mut mp = MaterialParams::unit();
    mp.p_ext = Arc::new(Constant(2.5));
    let s1 = Space::new(sp.mesh().clone(), Degree::P1);
    let p = Field::constant(s1.clone(), 2.5);
    let phi = Field::zeros(s1, 1);
    let u = solve_displacement(&sp, &mp, &p, &phi, &TractionLoad::ExteriorPressure, 0.0).unwrap();
    assert!(u.max_abs() < 1e-10, "{}", u.max_abs());
}

#[test]
fn displacement_is_linear_in_the_data() {
    let sp = clamped(6, Degree::P2);
    let s1 = Space::new(sp.mesh().clone(), Degree::P1);
    let phi = Field::zeros(s1.clone(), 1);
    let solve = |scale: f64| {
        let mut mp = MaterialParams::unit();
        mp.p_ext = Arc::new(Constant(scale * 0.3));
        let p = Field::interpolate(s1.clone(), |x| scale * (0.3 + x[0] * x[1]));
        solve_displacement(&sp, &mp, &p, &phi, &TractionLoad::ExteriorPressure, 0.0).unwrap()
    };
    let (u1, u2) = (solve(1.0), solve(2.0));
    let gap = u2.axpy(-2.0, &u1).unwrap().max_abs();
    assert!(gap <= 1e-10 * u2.max_abs(), "{gap}");
}

#[test]
fn pressure_at_rest_equals_exterior() {
    let sp = clamped(8, Degree::P1);
    let mut mp = MaterialParams::unit();
    mp.p_ext = Arc::new(Constant(1.7));
    let v = Field::zeros(Space::new(sp.mesh().clone(), Degree::P2), 2);
    let phi = Field::zeros(sp.clone(), 1);
    let p = solve_pressure(&sp, &mp, &v, &phi, 0.0).unwrap();
    assert!(max_gap(&p, |_| [1.7, 0.0]) < 1e-12);
}

#[test]
fn osmotic_pressure_at_rest() {
    let sp = clamped(8, Degree::P1);
    let mut mp = MaterialParams::unit();
    mp.pressure = PressureMode::Osmotic;
    mp.pi = 0.4;
    mp.p_ext = Arc::new(Constant(1.0));
    mp.pi_ext = Arc::new(Constant(0.25));
    let v = Field::zeros(Space::new(sp.mesh().clone(), Degree::P2), 2);
    let phi = Field::constant(sp.clone(), 0.3);
    let p = solve_pressure(&sp, &mp, &v, &phi, 0.0).unwrap();
    assert!(max_gap(&p, |_| [1.0 - 0.25 + 0.4 * 0.3, 0.0]) < 1e-12);
}

fn pressure_mms_error(n: usize) -> f64 {
    let sp = clamped(n, Degree::P1);
    let mut mp = MaterialParams::unit();
    mp.k_h = 0.5;
    mp.p_ext = Arc::new(Constant(1.0));
    // v_s = k_h grad q with q = sin(pi x1) sin(pi x2), so p = p_ext + q
    let v = Field::interpolate_vector(Space::new(sp.mesh().clone(), Degree::P2), |x| {
        [
            0.5 * PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
            0.5 * PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
        ]
    });
    let phi = Field::zeros(sp.clone(), 1);
    let p = solve_pressure(&sp, &mp, &v, &phi, 0.0).unwrap();
    p.l2_error(|x| [1.0 + (PI * x[0]).sin() * (PI * x[1]).sin(), 0.0])
}

#[test]
fn pressure_manufactured_rate() {
    let errs: Vec<f64> = [8, 16, 32].iter().map(|&n| pressure_mms_error(n)).collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 2.0).abs() < 0.15, "{errs:?}");
    }
}

#[test]
fn darcy_with_flat_pressure_copies_solid_velocity() {
    let sp = clamped(6, Degree::P1);
    let v_s = Field::interpolate_vector(Space::new(sp.mesh().clone(), Degree::P2), |x| [x[1], -x[0] * x[0]]);
    let p = Field::constant(sp.clone(), 3.0);
    let phi = Field::zeros(sp.clone(), 1);
    let v_f = darcy_fluid_velocity(&MaterialParams::unit(), &p, &phi, &v_s).unwrap();
    assert!(v_f.l2_distance(&v_s).unwrap() < 1e-12);
}

#[test]
fn darcy_with_linear_pressure() {
    let beta = 0.6;
    let sp = clamped(6, Degree::P1);
    let mut mp = MaterialParams::unit();
    mp.xi_inf = 0.5;
    let v_s = Field::zeros(Space::new(sp.mesh().clone(), Degree::P2), 2);
    let p = Field::interpolate(sp.clone(), |x| 1.0 + beta * x[1]);
    let phi = Field::zeros(sp.clone(), 1);
    let v_f = darcy_fluid_velocity(&mp, &p, &phi, &v_s).unwrap();
    assert!(max_gap(&v_f, |_| [0.0, -0.5 * beta]) < 1e-10);
}

#[test]
fn darcy_osmotic_constant_potential() {
    let sp = clamped(6, Degree::P1);
    let mut mp = MaterialParams::unit();
    mp.pressure = PressureMode::Osmotic;
    mp.pi = 2.0;
    let v_s = Field::interpolate_vector(Space::new(sp.mesh().clone(), Degree::P2), |x| [0.1 * x[0], 0.0]);
    let phi = Field::interpolate(sp.clone(), |x| 0.2 + 0.1 * x[0] * x[1]);
    let p = Field::interpolate(sp.clone(), |x| 0.5 + 2.0 * (0.2 + 0.1 * x[0] * x[1]));
    let v_f = darcy_fluid_velocity(&mp, &p, &phi, &v_s).unwrap();
    assert!(v_f.l2_distance(&v_s).unwrap() < 1e-12);
}

/// Size of each correction variant, measured by the velocity it drives.
fn correction_for(map: &DeformationMap, lateral: FacetTag, u: impl Fn(Vec2) -> Vec2, load: TractionLoad) -> [f64; 2] {
    let sp = space(6, Degree::P2, lateral);
    let u_s = Field::interpolate_vector(sp.clone(), u);
    let q = Field::zeros(Space::new(sp.mesh().clone(), Degree::P1), 1);
    let mp = MaterialParams::unit();
    let inputs = TractionInputs {
        u_s: &u_s,
        q: &q,
        load: &load,
        map,
        t: 0.3,
    };
    [TractionVariant::Consistent, TractionVariant::AsPublished].map(|v| {
        let r = traction_correction(&sp, &mp, &inputs, v).unwrap();
        solve_velocity(&sp, &mp, &q, &r).unwrap().max_abs()
    })
}

#[test]
fn correction_vanishes_on_a_still_domain() {
    let map = DeformationMap::graph_height(Arc::new(Constant(1.0)), 1.0, 0.1, 10.0).unwrap();
    let r = correction_for(&map, FacetTag::GammaMinus, |x| [0.1 * x[1] * x[1], 0.05 * x[0] * x[1]], TractionLoad::ExteriorPressure);
    assert!(r.iter().all(|&v| v < 1e-14), "{r:?}");
}

#[test]
fn correction_vanishes_for_rigid_translation_without_load() {
    let nu = AffineField {
        offset: [0.0, 0.0],
        gradient: [[0.1, 0.2], [-0.1, 0.3]],
    };
    let map = DeformationMap::linear_field(Arc::new(nu), 1.0, Arc::new(Constant(1.0)), 1.0).unwrap();
    let r = correction_for(&map, FacetTag::GammaMinus, |_| [0.2, -0.1], TractionLoad::ExteriorPressure);
    assert!(r.iter().all(|&v| v < 1e-12), "{r:?}");
}

#[test]
fn correction_vanishes_for_uniform_lift_of_uniform_stress() {
    let nu = AffineField {
        offset: [0.0, 1.0],
        gradient: [[0.0; 2]; 2],
    };
    let map = DeformationMap::linear_field(Arc::new(nu), 1.0, Arc::new(Constant(1.0)), 1.0).unwrap();
    // free walls: the only wall/top junctions are at the bottom, where nu . n = 0
    let r = correction_for(&map, FacetTag::GammaPlus, |x| [0.1 * x[1], 0.2 * x[1]], TractionLoad::ExteriorPressure);
    assert!(r.iter().all(|&v| v < 1e-12), "{r:?}");
}
