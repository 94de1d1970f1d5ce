//! Built-in verification suites: convergence studies and exactness checks
//! that exercise every solver against independent closed forms.
//!
//! Each criterion runs in a fixed desk-scale configuration with a wall-clock
//! budget. A criterion passes only if its checks hold and it finishes within
//! budget.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use biofilm_core::concentration::solve_concentration;
use biofilm_core::coupled::{height_flux_residual, mixture_velocity, run_slabs, CoupledProblem, SlabState, SweepConfig};
use biofilm_core::fem::{
    apply_dirichlet, assemble_elasticity, assemble_scalar, recover_gradient, solve_constrained, Constraints, Degree,
    ElasticConstants, ElasticLoad, Field, ScalarForm, SolveOptions, Space,
};
use biofilm_core::geometry::{
    build_strip_mesh, build_strip_mesh_with, deform_mesh, surface_dilation, DeformationMap, FacetTag, Mesh,
    StripOptions,
};
use biofilm_core::math::{Mat2, Vec2};
use biofilm_core::mechanics::{
    solve_displacement, solve_pressure_rate, solve_velocity, traction_rate, MaterialParams, RateBoundary,
    TractionField, TractionInputs, TractionLoad, TractionVariant,
};
use biofilm_core::moving_diffusion::{solve_moving_diffusion, DiffusionOptions, DiffusionProblem};
use biofilm_core::profile::{Constant, Frozen, Ramp, SharedProfile, UniformGrowth, VelocityField};
use biofilm_core::volume_fraction::{solve_fraction, ContinuationOptions, Growth};

/// Result of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
    pub notes: Vec<String>,
}

fn order(a: f64, b: f64, ratio: f64) -> f64 {
    (a / b).ln() / ratio.ln()
}

fn unit_mesh(n: usize) -> Arc<Mesh> {
    Arc::new(build_strip_mesh(1.0, &Constant(1.0), n, n).unwrap())
}

fn standard_height() -> SharedProfile {
    Arc::new(UniformGrowth { base: 1.0, growth: 0.1 })
}

// ---------------------------------------------------------------- 1

/// Corner-compatible pull `(1 + t^2) * 0.5 (2 x1 - 1, 1)`.
struct Pull;

impl TractionField for Pull {
    fn value(&self, x: Vec2, t: f64) -> Vec2 {
        let s = 1.0 + t * t;
        [s * 0.5 * (2.0 * x[0] - 1.0), s * 0.5]
    }
    fn rate(&self, x: Vec2, t: f64) -> Vec2 {
        [t * (2.0 * x[0] - 1.0), t]
    }
    fn gradient(&self, _x: Vec2, t: f64) -> Mat2 {
        [[1.0 + t * t, 0.0], [0.0, 0.0]]
    }
}

/// Relative L2 gap between `v_s` and the finite-difference material quotient
/// of `u_s`, converted to an Eulerian rate, for each `delta`.
fn shape_derivative_gaps(
    n: usize,
    lateral: FacetTag,
    load: TractionLoad,
    mp: &MaterialParams,
    variant: TractionVariant,
    deltas: &[f64],
) -> Vec<f64> {
    let h = standard_height();
    let map = DeformationMap::graph_height(h.clone(), 1.0, 0.1, 2.0).unwrap();
    let reference = build_strip_mesh_with(1.0, &Frozen { inner: h, at: 0.0 }, n, n, StripOptions { lateral }).unwrap();
    let ref_space = Space::new(Arc::new(reference.clone()), Degree::P2);
    let t0 = 0.5;
    let solve_u = |t: f64| {
        let mesh = Arc::new(deform_mesh(&reference, &map, t).unwrap());
        let s2 = Space::new(mesh.clone(), Degree::P2);
        let s1 = Space::new(mesh, Degree::P1);
        let zero = Field::zeros(s1.clone(), 1);
        let u = solve_displacement(&s2, mp, &zero, &zero, &load, t).unwrap();
        (s1, s2, zero, u)
    };
    let (_s1, s2, zero, u0) = solve_u(t0);
    let inputs = TractionInputs {
        u_s: &u0,
        q: &zero,
        load: &load,
        map: &map,
        t: t0,
    };
    let g = traction_rate(&s2, mp, &inputs, variant).unwrap();
    let v = solve_velocity(&s2, mp, &zero, &g).unwrap();
    let gx = recover_gradient(&u0.component(0)).unwrap();
    let gy = recover_gradient(&u0.component(1)).unwrap();
    deltas
        .iter()
        .map(|&delta| {
            let (_, _, _, u1) = solve_u(t0 + delta);
            let mut vals = vec![0.0; u0.values().len()];
            for k in 0..s2.n_nodes() {
                let nu = map.jacobian_at(ref_space.nodes()[k], t0).unwrap().map_velocity;
                let (a, b) = (u0.node(k), u1.node(k));
                let (dx, dy) = (gx.node(k), gy.node(k));
                vals[2 * k] = (b[0] - a[0]) / delta - (dx[0] * nu[0] + dx[1] * nu[1]);
                vals[2 * k + 1] = (b[1] - a[1]) / delta - (dy[0] * nu[0] + dy[1] * nu[1]);
            }
            let fd = Field::from_values(s2.clone(), 2, vals).unwrap();
            v.l2_distance(&fd).unwrap() / v.l2_norm()
        })
        .collect()
}

const DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn fd_verdict(errs: &[f64]) -> (bool, String) {
    let o1 = order(errs[0], errs[1], 10.0);
    let o2 = order(errs[1], errs[2], 10.0);
    let pass = errs[1] <= 0.05 && o1 >= 0.9;
    let saturation = if o2 < 0.9 {
        format!(", saturated below delta=1e-3 (order {o2:.2}, h^2 floor)")
    } else {
        format!(", order {o2:.2} to delta=1e-4")
    };
    (
        pass,
        format!(
            "rel err {:.2e}/{:.2e}/{:.2e} at delta 1e-2/1e-3/1e-4, order {o1:.2} (1e-2 to 1e-3){saturation}",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn criterion_1() -> Outcome {
    let mp = MaterialParams::unit();
    let errs = shape_derivative_gaps(
        64,
        FacetTag::GammaPlus,
        TractionLoad::Field(Arc::new(Pull)),
        &mp,
        TractionVariant::Consistent,
        &DELTAS,
    );
    let (pass, detail) = fd_verdict(&errs);
    let mut notes = Vec::new();
    let mut clamped_mp = MaterialParams::unit();
    clamped_mp.pi_ext = Arc::new(Constant(0.5));
    let clamped = shape_derivative_gaps(
        32,
        FacetTag::GammaMinus,
        TractionLoad::ExteriorPressure,
        &clamped_mp,
        TractionVariant::Consistent,
        &DELTAS[..2],
    );
    notes.push(format!(
        "clamped walls, exterior pressure (32x32): rel err {:.2e}/{:.2e} (corner singularity floor)",
        clamped[0], clamped[1]
    ));
    let published = shape_derivative_gaps(
        32,
        FacetTag::GammaPlus,
        TractionLoad::Field(Arc::new(Pull)),
        &mp,
        TractionVariant::AsPublished,
        &DELTAS[1..2],
    );
    notes.push(format!("pointwise published correction (32x32): rel err {:.2e} at delta 1e-3", published[0]));
    Outcome { pass, detail, notes }
}

// ---------------------------------------------------------------- 2

fn pressure_rate_gaps(n: usize, degree: Degree, transported: bool, deltas: &[f64]) -> Vec<f64> {
    let h = standard_height();
    let map = DeformationMap::graph_height(h.clone(), 1.0, 0.1, 2.0).unwrap();
    let reference = build_strip_mesh(1.0, &Frozen { inner: h, at: 0.0 }, n, n).unwrap();
    let ref_space = Space::new(Arc::new(reference.clone()), degree);
    let mut mp = MaterialParams::unit();
    mp.p_ext = Arc::new(Ramp { value: 0.0, slope: 0.2 });
    let e = |x: Vec2, t: f64| (1.0 + t * t) * (PI * x[0]).sin() * x[1] * x[1];
    let e_t = |x: Vec2, t: f64| 2.0 * t * (PI * x[0]).sin() * x[1] * x[1];
    let t0 = 0.5;
    // p solves the same Poisson problem with e in place of e'
    let solve_p = |t: f64| {
        let mesh = Arc::new(deform_mesh(&reference, &map, t).unwrap());
        let sp = Space::new(mesh, degree);
        let ef = Field::interpolate(sp.clone(), |x| e(x, t));
        let p = solve_pressure_rate(&sp, &mp, &ef, t, RateBoundary::Value(mp.p_ext.value(t))).unwrap();
        (sp, p)
    };
    let (sp, p0) = solve_p(t0);
    let e_rate = Field::interpolate(sp.clone(), |x| e_t(x, t0));
    let bc = if transported {
        RateBoundary::Transported { p: &p0, map: &map }
    } else {
        RateBoundary::Exterior
    };
    let p_rate = solve_pressure_rate(&sp, &mp, &e_rate, t0, bc).unwrap();
    let gp = recover_gradient(&p0).unwrap();
    deltas
        .iter()
        .map(|&delta| {
            let (_, p1) = solve_p(t0 + delta);
            let vals: Vec<f64> = (0..sp.n_nodes())
                .map(|k| {
                    let nu = map.jacobian_at(ref_space.nodes()[k], t0).unwrap().map_velocity;
                    let g = gp.node(k);
                    (p1.values()[k] - p0.values()[k]) / delta - (g[0] * nu[0] + g[1] * nu[1])
                })
                .collect();
            let fd = Field::from_values(sp.clone(), 1, vals).unwrap();
            p_rate.l2_distance(&fd).unwrap() / p_rate.l2_norm()
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let errs = pressure_rate_gaps(64, Degree::P2, true, &DELTAS);
    let (pass, detail) = fd_verdict(&errs);
    let p1 = pressure_rate_gaps(64, Degree::P1, true, &DELTAS[..2]);
    let exterior = pressure_rate_gaps(32, Degree::P2, false, &DELTAS[1..2]);
    Outcome {
        pass,
        detail,
        notes: vec![
            format!("degree 1 (64x64): rel err {:.2e}/{:.2e} at delta 1e-2/1e-3", p1[0], p1[1]),
            format!("p' = dp_ext/dt on the boundary (32x32): rel err {:.2e}", exterior[0]),
        ],
    }
}

// ---------------------------------------------------------------- 3

fn mms_run(n: usize, dt: f64, theta: f64, timed: bool, shift: Option<f64>) -> (f64, Field) {
    let map = DeformationMap::graph_height(Arc::new(UniformGrowth { base: 1.0, growth: 0.2 }), 1.0, 0.1, 10.0)
        .unwrap();
    let space = Space::new(unit_mesh(n), Degree::P1);
    let s = move |t: f64| if timed { 1.0 + (3.0 * t).sin() } else { 1.0 };
    let ds = move |t: f64| if timed { 3.0 * (3.0 * t).cos() } else { 0.0 };
    let exact = move |y: Vec2, t: f64| (PI * y[0]).sin() * y[1] * s(t);
    // e_t - lap e with kappa = 1
    let f = move |y: Vec2, t: f64| (PI * y[0]).sin() * y[1] * (ds(t) + PI * PI * s(t));
    let problem = DiffusionProblem {
        map: &map,
        kappa: 1.0,
        source: &f,
        boundary: &exact,
    };
    let e0 = Field::interpolate(space.clone(), |x| exact(x, 0.0));
    let mut opts = DiffusionOptions::new(0.5, dt);
    opts.theta = theta;
    opts.lambda_shift = shift;
    let traj = solve_moving_diffusion(&space, problem, &e0, opts).unwrap();
    let u = traj.last().clone();
    let err = u.l2_error(|x| [exact(map.position(x, 0.5).unwrap(), 0.5), 0.0]);
    (err, u)
}

fn criterion_3() -> Outcome {
    let spatial: Vec<f64> = [16, 32, 64].iter().map(|&n| mms_run(n, 0.5 / 64.0, 0.5, false, None).0).collect();
    let rates: Vec<f64> = spatial.windows(2).map(|w| order(w[0], w[1], 2.0)).collect();
    let space_ok = rates.iter().all(|r| (r - 2.0).abs() <= 0.15);

    let temporal = |theta: f64| -> Vec<f64> {
        let (_, reference) = mms_run(16, 0.5 / 1280.0, theta, true, None);
        let errs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&k| mms_run(16, 0.5 / k as f64, theta, true, None).1.l2_distance(&reference).unwrap())
            .collect();
        errs.windows(2).map(|w| order(w[0], w[1], 2.0)).collect()
    };
    let euler = temporal(1.0);
    let crank = temporal(0.5);
    let euler_ok = euler.iter().all(|r| (r - 1.0).abs() <= 0.15);
    let crank_ok = crank.iter().all(|r| (r - 2.0).abs() <= 0.2);

    let (_, plain) = mms_run(16, 0.05, 1.0, true, None);
    let (_, shifted) = mms_run(16, 0.05, 1.0, true, Some(1.0));
    let gap = plain.l2_distance(&shifted).unwrap();
    let shift_ok = gap <= 1e-8;
    Outcome {
        pass: space_ok && euler_ok && crank_ok && shift_ok,
        detail: format!(
            "spatial rates {:.3}/{:.3}, temporal theta=1 {:.3}/{:.3}, theta=0.5 {:.3}/{:.3}, shift gap {gap:.1e}",
            rates[0], rates[1], euler[0], euler[1], crank[0], crank[1]
        ),
        notes: vec![format!(
            "spatial L2 errors {:.3e}/{:.3e}/{:.3e}",
            spatial[0], spatial[1], spatial[2]
        )],
    }
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let beta = 0.1;
    let space = Space::new(unit_mesh(32), Degree::P1);
    let v_space = Space::new(space.mesh().clone(), Degree::P2);
    let v_f = Field::interpolate_vector(v_space, |x| [-beta * x[0], -beta * x[1]]);
    let mp = MaterialParams::unit();
    let k = mp.k_s * mp.g_s;
    let (phi, diag) =
        solve_fraction(&space, &v_f, &mp, Growth::Constant(k), ContinuationOptions::default()).unwrap();
    let closed = k / (k + 2.0 * beta);
    let gap = phi.values().iter().fold(0.0_f64, |m, v| m.max((v - closed).abs()));
    let bounds = phi.min() >= -1e-8 && phi.max() <= 1.0 + 1e-8;
    let grad_ok = diag.grad_phi <= diag.grad_bound + 1e-6;
    Outcome {
        pass: bounds && gap <= 1e-4 && grad_ok,
        detail: format!(
            "phi in [{:.10}, {:.10}], max |phi - {closed:.6}| = {gap:.1e}, |grad phi| {:.1e} <= {:.1e} + 1e-6, {} continuation steps",
            phi.min(),
            phi.max(),
            diag.grad_phi,
            diag.grad_bound,
            diag.history.len()
        ),
        notes: vec![],
    }
}

// ---------------------------------------------------------------- 5

fn column_error(n: usize, c0: f64) -> (f64, f64) {
    // thin strip of width H/4 with square cells
    let mesh = build_strip_mesh_with(
        0.25,
        &Constant(1.0),
        n / 4,
        n,
        StripOptions {
            lateral: FacetTag::GammaPlus,
        },
    )
    .unwrap();
    let space = Space::new(Arc::new(mesh), Degree::P1);
    let v_space = Space::new(space.mesh().clone(), Degree::P2);
    let mut mp = MaterialParams::unit();
    mp.c0 = c0;
    let phi_s = Field::constant(space.clone(), 1.0);
    let v_f = Field::zeros(v_space, 2);
    let (c, report) = solve_concentration(&space, &v_f, &phi_s, &mp).unwrap();
    let a = mp.k_c * mp.g_c / mp.d;
    let err = c.l2_error(|x| [c0 + a * (0.5 * x[1] * x[1] - x[1]), 0.0]);
    (err, report.min)
}

fn criterion_5() -> Outcome {
    // k_c g_c H^2 / (2 d) = 0.5 for unit data
    let threshold = 0.5;
    let c0 = 1.1 * threshold;
    let runs: Vec<(f64, f64)> = [16, 32, 64].iter().map(|&n| column_error(n, c0)).collect();
    let rates: Vec<f64> = runs.windows(2).map(|w| order(w[0].0, w[1].0, 2.0)).collect();
    let min = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let sharp: Vec<f64> = [16, 32, 64].iter().map(|&n| column_error(n, threshold).1).collect();
    Outcome {
        pass: rates.iter().all(|r| (r - 2.0).abs() <= 0.15) && min >= -1e-8 * c0,
        detail: format!(
            "L2 errors {:.2e}/{:.2e}/{:.2e}, rates {:.3}/{:.3}, min c {min:.3e} (c0 = {c0})",
            runs[0].0, runs[1].0, runs[2].0, rates[0], rates[1]
        ),
        notes: vec![format!(
            "c0 at the threshold (exact minimum 0): min c {:.1e}/{:.1e}/{:.1e}, corner undershoot of the P1 load",
            sharp[0], sharp[1], sharp[2]
        )],
    }
}

// ---------------------------------------------------------------- 6

fn standard_problem(n: usize, pi: f64, pi_ext: f64, lateral: FacetTag) -> CoupledProblem {
    let map = DeformationMap::graph_height(standard_height(), 1.0, 0.1, 10.0).unwrap();
    let mesh = build_strip_mesh_with(1.0, &Constant(1.0), n, n, StripOptions { lateral }).unwrap();
    let mut mp = MaterialParams::unit();
    mp.pi = pi;
    mp.p_ext = Arc::new(Constant(1.0));
    mp.pi_ext = Arc::new(Constant(pi_ext));
    CoupledProblem {
        reference: Arc::new(mesh),
        map,
        mp,
        load: TractionLoad::ExteriorPressure,
        e_ext: Arc::new(Constant(0.0)),
        e0: 0.0,
    }
}

const SLAB_TIMES: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

fn trivial_gap(s: &SlabState, p_ext: f64, c0: f64) -> f64 {
    let mut gap: f64 = 0.0;
    for f in [&s.e_rate, &s.p_rate, &s.u_s, &s.v_s, &s.v_f, &s.phi_s] {
        gap = gap.max(f.max_abs());
    }
    gap = gap.max(s.p.values().iter().fold(0.0, |m, v| m.max((v - p_ext).abs())));
    gap = gap.max(s.phi_f.values().iter().fold(0.0, |m, v| m.max((v - 1.0).abs())));
    gap.max(s.c.values().iter().fold(0.0, |m, v| m.max((v - c0).abs())))
}

fn criterion_6() -> Outcome {
    let cfg = SweepConfig::default();
    let null = standard_problem(16, 0.0, 0.0, FacetTag::GammaMinus);
    let slabs = run_slabs(&null, &SLAB_TIMES, &cfg).unwrap();
    let null_sweeps: Vec<usize> = slabs.iter().map(|s| s.sweeps()).collect();
    let null_gap = slabs.iter().map(|s| trivial_gap(s, 1.0, 1.0)).fold(0.0, f64::max);
    let null_ok = null_sweeps.iter().all(|&k| k <= 2) && null_gap <= 1e-10;

    // the first sweep starts from phi_s = phi_inf, which makes v_f violate the
    // sign hypotheses by O(Pi phi_inf); the transport solve is forced
    let mut forced = cfg;
    forced.fraction.force = true;
    let small = standard_problem(16, 1e-3, 0.0, FacetTag::GammaMinus);
    let slabs = run_slabs(&small, &SLAB_TIMES, &forced).unwrap();
    let sweeps: Vec<usize> = slabs.iter().map(|s| s.sweeps()).collect();
    let worst_ratio = slabs
        .iter()
        .flat_map(|s| s.contraction_ratios().into_iter().skip(1))
        .fold(0.0, f64::max);
    let decaying = slabs.iter().all(|s| s.sweeps() >= 3);
    let first_violation = slabs
        .iter()
        .map(|s| s.admissibility[0].sign_violation())
        .fold(0.0, f64::max);
    let later_violation = slabs
        .iter()
        .flat_map(|s| s.admissibility.iter().skip(1).map(|a| a.sign_violation()))
        .fold(0.0, f64::max);
    let small_ok = sweeps.iter().all(|&k| k <= 10) && decaying && worst_ratio < 0.8;
    Outcome {
        pass: null_ok && small_ok,
        detail: format!(
            "null: sweeps {null_sweeps:?}, max deviation from trivial {null_gap:.1e}; Pi=1e-3: sweeps {sweeps:?}, max ratio after sweep 2 {worst_ratio:.2e}"
        ),
        notes: vec![format!(
            "Pi=1e-3 admissibility: sweep 1 sign violation {first_violation:.1e} x tol (forced), later sweeps {later_violation:.1e} x tol"
        )],
    }
}

// ---------------------------------------------------------------- 7

/// `nu = (sin(x2) + x1^2 / 2, cos(x1) x2 - x2^2)`.
struct Curl;

impl VelocityField for Curl {
    fn value(&self, x: Vec2) -> Vec2 {
        [x[1].sin() + 0.5 * x[0] * x[0], x[0].cos() * x[1] - x[1] * x[1]]
    }
    fn gradient(&self, x: Vec2) -> Mat2 {
        [[x[0], x[1].cos()], [-x[0].sin() * x[1], x[0].cos() - 2.0 * x[1]]]
    }
}

fn criterion_7() -> Outcome {
    let map = DeformationMap::linear_field(Arc::new(Curl), 1.0, Arc::new(Constant(1.0)), 1.0).unwrap();
    let ts = [1e-1, 1e-2, 1e-3];
    let mut rng = 0x2545_f491_4f6c_dd1d_u64;
    let mut uniform = || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst = [f64::INFINITY; 3];
    for _ in 0..20 {
        let x = [uniform(), uniform()];
        let angle = 2.0 * PI * uniform();
        let n = [angle.cos(), angle.sin()];
        let g = Curl.gradient(x);
        let div = g[0][0] + g[1][1];
        let tangential = div - (n[0] * (g[0][0] * n[0] + g[0][1] * n[1]) + n[1] * (g[1][0] * n[0] + g[1][1] * n[1]));
        let mut rem = [[0.0; 3]; 3];
        for (k, &t) in ts.iter().enumerate() {
            let jd = map.jacobian_at(x, t).unwrap();
            rem[0][k] = (jd.det - 1.0 - t * div).abs();
            let mut r: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    r = r.max((jd.inverse[i][j] - id + t * g[i][j]).abs());
                }
            }
            rem[1][k] = r;
            rem[2][k] = (surface_dilation(&map, x, n, t).unwrap() - 1.0 - t * tangential).abs();
        }
        for (e, r) in rem.iter().enumerate() {
            let o = order(r[0], r[1], 10.0).min(order(r[1], r[2], 10.0));
            worst[e] = worst[e].min(o);
        }
    }
    Outcome {
        pass: worst.iter().all(|&o| o >= 1.9),
        detail: format!(
            "minimum remainder order over 20 samples: det {:.3}, inverse {:.3}, surface {:.3}",
            worst[0], worst[1], worst[2]
        ),
        notes: vec![],
    }
}

// ---------------------------------------------------------------- 8

fn all_boundary(space: &Space, f: impl Fn(Vec2) -> f64 + Copy) -> Constraints {
    let mut c = Constraints::new();
    for tag in [FacetTag::GammaMinus, FacetTag::GammaPlus] {
        c.add_tag(space, tag, 1, |x| [f(x), 0.0]).unwrap();
    }
    c
}

const LAPLACE: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

fn patch_gap(degree: Degree) -> f64 {
    let space = Space::new(unit_mesh(5), degree);
    let (u, f): (fn(Vec2) -> f64, f64) = match degree {
        Degree::P1 => (|x| 1.0 + 2.0 * x[0] - 3.0 * x[1], 0.0),
        Degree::P2 => (|x| 1.0 + x[0] - x[1] + 3.0 * x[0] * x[0] + x[0] * x[1] - 2.0 * x[1] * x[1], -2.0),
    };
    let form = ScalarForm {
        diffusion: Some(&|_| LAPLACE),
        source: Some(&|_| f),
        ..Default::default()
    };
    let sys = apply_dirichlet(assemble_scalar(&space, &form).unwrap(), &all_boundary(&space, u)).unwrap();
    let x = solve_constrained(&sys, &SolveOptions::with_tol(1e-14)).unwrap().x;
    space.nodes().iter().zip(&x).fold(0.0, |m, (p, v)| m.max((u(*p) - v).abs()))
}

fn laplace_error(n: usize) -> f64 {
    let space = Space::new(unit_mesh(n), Degree::P1);
    let exact = |x: Vec2| (PI * x[0]).sin() * (PI * x[1]).sin();
    let form = ScalarForm {
        diffusion: Some(&|_| LAPLACE),
        source: Some(&|qp| 2.0 * PI * PI * exact(qp.x)),
        ..Default::default()
    };
    let sys = apply_dirichlet(assemble_scalar(&space, &form).unwrap(), &all_boundary(&space, |_| 0.0)).unwrap();
    let x = solve_constrained(&sys, &SolveOptions::with_tol(1e-12)).unwrap().x;
    Field::from_values(space, 1, x).unwrap().l2_error(|x| [exact(x), 0.0])
}

fn criterion_8() -> Outcome {
    let p1 = patch_gap(Degree::P1);
    let p2 = patch_gap(Degree::P2);
    let errs: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| laplace_error(n)).collect();
    let rates: Vec<f64> = errs.windows(2).map(|w| order(w[0], w[1], 2.0)).collect();
    let ec = ElasticConstants::new(1.3, 0.7).unwrap();
    let mut asym: f64 = 0.0;
    for degree in [Degree::P1, Degree::P2] {
        let space = Space::new(unit_mesh(8), degree);
        let sys = assemble_elasticity(&space, ec, &ElasticLoad::default()).unwrap();
        asym = asym.max(sys.matrix.asymmetry());
    }
    Outcome {
        pass: p1 <= 1e-9 && p2 <= 1e-9 && rates.iter().all(|r| (r - 2.0).abs() <= 0.1) && asym <= 1e-12,
        detail: format!(
            "patch P1 {p1:.1e}, P2 {p2:.1e}; Laplace rates {:.3}/{:.3}/{:.3}; elasticity asymmetry {asym:.1e}",
            rates[0], rates[1], rates[2]
        ),
        notes: vec![],
    }
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    // rigid vertical motion: v = (0, V), flat top rising at V
    let speed = 0.3;
    let map = DeformationMap::graph_height(Arc::new(UniformGrowth { base: 1.0, growth: speed }), 1.0, 0.1, 10.0)
        .unwrap();
    let mesh = Arc::new(deform_mesh(&unit_mesh(16), &map, 0.7).unwrap());
    let v = Field::interpolate_vector(Space::new(mesh, Degree::P2), |_| [0.0, speed]);
    let rigid = height_flux_residual(&v, &|_| speed).unwrap().norm();

    let mut cfg = SweepConfig::default();
    cfg.fraction.force = true;
    let norms: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let problem = standard_problem(n, 1e-3, 0.0, FacetTag::GammaMinus);
            let slab = &run_slabs(&problem, &[0.0, 0.1], &cfg).unwrap()[1];
            let v = mixture_velocity(&problem.mp, slab).unwrap();
            height_flux_residual(&v, &|_| 0.1).unwrap().norm()
        })
        .collect();
    Outcome {
        pass: rigid < 1e-10 && norms[1] < norms[0] * (1.0 - 1e-9),
        detail: format!(
            "rigid motion |R| = {rigid:.1e}; standard slab |R| {:.9e} (8x8) -> {:.9e} (16x16), relative change {:.1e}",
            norms[0], norms[1], norms[1] / norms[0] - 1.0
        ),
        notes: vec![format!(
            "32x32: |R| {:.9e}; the prescribed height rises at 0.1 while the mixture is at rest, so R tends to 0.1",
            norms[2]
        )],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Geometry,
    Fem,
    Mechanics,
    ShapeDerivative,
    Transport,
    Concentration,
    MovingDiffusion,
    Coupled,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Geometry,
        Suite::Fem,
        Suite::Mechanics,
        Suite::ShapeDerivative,
        Suite::Transport,
        Suite::Concentration,
        Suite::MovingDiffusion,
        Suite::Coupled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Fem => "fem",
            Suite::Mechanics => "mechanics",
            Suite::ShapeDerivative => "shape-derivative",
            Suite::Transport => "transport",
            Suite::Concentration => "concentration",
            Suite::MovingDiffusion => "moving-diffusion",
            Suite::Coupled => "coupled",
        }
    }

    /// Parses a suite name; `all` gives every suite.
    pub fn parse(name: &str) -> Option<Vec<Suite>> {
        if name == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|s| s.name() == name).map(|s| vec![*s])
    }
}

pub struct Criterion {
    pub number: usize,
    pub suite: Suite,
    pub name: &'static str,
    pub budget: Duration,
    /// Known not to hold for this model as posed; reported, never fatal.
    pub expected_failure: bool,
    run: fn() -> Outcome,
}

impl Criterion {
    /// Runs the check. A panic inside it counts as a failure.
    pub fn run(&self) -> Report {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(self.run).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Outcome {
                pass: false,
                detail: format!("panicked: {msg}"),
                notes: vec![],
            }
        });
        let elapsed = start.elapsed();
        Report {
            number: self.number,
            suite: self.suite,
            name: self.name,
            budget: self.budget,
            expected_failure: self.expected_failure,
            pass: outcome.pass && elapsed <= self.budget,
            outcome,
            elapsed,
        }
    }
}

const fn criterion(
    number: usize,
    suite: Suite,
    name: &'static str,
    secs: u64,
    expected_failure: bool,
    run: fn() -> Outcome,
) -> Criterion {
    Criterion {
        number,
        suite,
        name,
        budget: Duration::from_secs(secs),
        expected_failure,
        run,
    }
}

pub const CRITERIA: [Criterion; 9] = [
    criterion(1, Suite::ShapeDerivative, "shape derivative of u_s", 120, false, criterion_1),
    criterion(2, Suite::Mechanics, "pressure rate", 60, false, criterion_2),
    criterion(3, Suite::MovingDiffusion, "moving-domain diffusion", 180, false, criterion_3),
    criterion(4, Suite::Transport, "transport bounds", 60, false, criterion_4),
    criterion(5, Suite::Concentration, "concentration column", 60, false, criterion_5),
    criterion(6, Suite::Coupled, "coupled fixed point", 300, false, criterion_6),
    criterion(7, Suite::Geometry, "Jacobian expansions", 10, false, criterion_7),
    criterion(8, Suite::Fem, "FEM baselines", 60, false, criterion_8),
    criterion(9, Suite::Coupled, "height flux", 120, true, criterion_9),
];

#[derive(Debug, Clone)]
pub struct Report {
    pub number: usize,
    pub suite: Suite,
    pub name: &'static str,
    pub budget: Duration,
    pub expected_failure: bool,
    pub pass: bool,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl Report {
    pub fn status(&self) -> &'static str {
        match (self.pass, self.expected_failure) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (expected)",
        }
    }

    /// Failed and not a known limitation.
    pub fn is_fatal(&self) -> bool {
        !self.pass && !self.expected_failure
    }

    /// `criterion k: STATUS name: detail [time / budget]`, then the notes.
    pub fn line(&self) -> String {
        let mut s = format!(
            "criterion {}: {} {}: {} [{:.1}s / {}s]",
            self.number,
            self.status(),
            self.name,
            self.outcome.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        for note in &self.outcome.notes {
            s.push_str(&format!("\n    note: {note}"));
        }
        s
    }
}

/// Runs the criteria of the given suites in order, handing each report to
/// `each` as soon as it is available.
pub fn run_suites(suites: &[Suite], mut each: impl FnMut(&Report)) -> Vec<Report> {
    CRITERIA
        .iter()
        .filter(|c| suites.contains(&c.suite))
        .map(|c| {
            let r = c.run();
            each(&r);
            r
        })
        .collect()
}

/// Fixed-width summary table.
pub fn table(reports: &[Report]) -> String {
    let mut s = format!("{:<3} {:<17} {:<25} {:<16} {:>9}\n", "#", "suite", "check", "result", "time");
    for r in reports {
        s.push_str(&format!(
            "{:<3} {:<17} {:<25} {:<16} {:>8.1}s\n",
            r.number,
            r.suite.name(),
            r.name,
            r.status(),
            r.elapsed.as_secs_f64()
        ));
    }
    let fatal = reports.iter().filter(|r| r.is_fatal()).count();
    let known = reports.iter().filter(|r| !r.pass && r.expected_failure).count();
    s.push_str(&format!(
        "{} passed, {} failed, {} known limitation{}\n",
        reports.iter().filter(|r| r.pass).count(),
        fatal,
        known,
        if known == 1 { "" } else { "s" }
    ));
    s
}
