//! Diffusion on the moving domain `Omega^t`, solved on the reference strip
//! after pulling back through the deformation map.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_scalar, solve_constrained, Constraints, CsrMatrix, Field, ScalarForm, SolveOptions,
    Space, SparseSystem,
};
use crate::geometry::{DeformationMap, FacetTag};
use crate::math::{mat_mul, mat_scale, mat_vec, transpose, Mat2, Vec2};
use crate::profile::SharedSignal;

/// Reference-domain coefficients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackCoefficients {
    /// `kappa (J^T J)^-1 det J`
    pub a: Mat2,
    /// `-J^-1 (d Phi / dt) det J`
    pub b: Vec2,
    /// `det J`
    pub c: f64,
    /// `d det J / dt`
    pub c_rate: f64,
    /// `f(Phi(x, t), t) det J`
    pub f_tilde: f64,
}

pub type ScalarData<'a> = &'a (dyn Fn(Vec2, f64) -> f64 + Sync);

pub fn pullback_coefficients(
    map: &DeformationMap,
    kappa: f64,
    f: ScalarData<'_>,
    x: Vec2,
    t: f64,
) -> Result<PullbackCoefficients> {
    let jd = map.jacobian_at(x, t)?;
    let inv = jd.inverse;
    let a = mat_scale(kappa * jd.det, &mat_mul(&inv, &transpose(&inv)));
    let jv = mat_vec(&inv, jd.map_velocity);
    let y = map.position(x, t)?;
    Ok(PullbackCoefficients {
        a,
        b: [-jv[0] * jd.det, -jv[1] * jd.det],
        c: jd.det,
        c_rate: jd.det_rate,
        f_tilde: f(y, t) * jd.det,
    })
}

/// Data of `e_t = kappa lap e + f` on `Omega^t` with `e = g` on the boundary.
/// `source` and `boundary` take the current position.
#[derive(Clone, Copy)]
pub struct DiffusionProblem<'a> {
    pub map: &'a DeformationMap,
    pub kappa: f64,
    pub source: ScalarData<'a>,
    pub boundary: ScalarData<'a>,
}

/// Time-step controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionOptions {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub theta: f64,
    /// Integrate `v = e^(-lambda t) u` instead of `u`.
    pub lambda_shift: Option<f64>,
}

impl DiffusionOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        DiffusionOptions {
            t0: 0.0,
            t_end,
            dt,
            theta: 1.0,
            lambda_shift: None,
        }
    }

    fn validate(&self, map: &DeformationMap) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidInput(alloc::format!("dt must be positive, got {}", self.dt)));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::InvalidInput(alloc::format!("theta must lie in [0.5, 1], got {}", self.theta)));
        }
        if !(self.t_end >= self.t0) || self.t_end > map.t_max() {
            return Err(Error::InvalidInput(alloc::format!(
                "time interval [{}, {}] leaves [0, t_max = {}]",
                self.t0,
                self.t_end,
                map.t_max()
            )));
        }
        Ok(())
    }
}

/// Mass `M_c`, operator `K + B - R` and load `F` at one time, where `R` is
/// the `c_rate`-weighted mass compensating the conservative time derivative.
#[derive(Debug, Clone)]
struct Operators {
    mass: CsrMatrix,
    op: CsrMatrix,
    load: Vec<f64>,
}

fn assemble_operators(space: &Space, problem: &DiffusionProblem<'_>, t: f64) -> Result<Operators> {
    let mut table = Vec::with_capacity(space.n_cells() * 7);
    for cell in 0..space.n_cells() {
        for qp in space.quad_points(cell) {
            table.push(pullback_coefficients(problem.map, problem.kappa, problem.source, qp.x, t)?);
        }
    }
    let at = |qp: &crate::fem::QuadPoint| &table[qp.cell * 7 + qp.q];
    let mass = assemble_scalar(
        space,
        &ScalarForm {
            reaction: Some(&|qp| at(qp).c),
            ..Default::default()
        },
    )?;
    let op = assemble_scalar(
        space,
        &ScalarForm {
            diffusion: Some(&|qp| at(qp).a),
            convection: Some(&|qp| at(qp).b),
            reaction: Some(&|qp| -at(qp).c_rate),
            source: Some(&|qp| at(qp).f_tilde),
            ..Default::default()
        },
    )?;
    Ok(Operators {
        mass: mass.matrix,
        op: op.matrix,
        load: op.rhs,
    })
}

/// Marches the theta scheme
/// `(M^{n+1} u^{n+1} - M^n u^n) / dt + theta L^{n+1} u^{n+1} + (1 - theta) L^n u^n = theta F^{n+1} + (1 - theta) F^n`.
pub struct Stepper<'a> {
    space: Arc<Space>,
    problem: DiffusionProblem<'a>,
    theta: f64,
    lambda: f64,
    boundary: Vec<usize>,
    t: f64,
    /// Solved variable, `e^(-lambda t) u`.
    v: Vec<f64>,
    current: Operators,
    solve: SolveOptions,
}

impl<'a> Stepper<'a> {
    pub fn new(space: Arc<Space>, problem: DiffusionProblem<'a>, u0: &Field, t0: f64, theta: f64) -> Result<Self> {
        Self::with_shift(space, problem, u0, t0, theta, 0.0)
    }

    pub fn with_shift(
        space: Arc<Space>,
        problem: DiffusionProblem<'a>,
        u0: &Field,
        t0: f64,
        theta: f64,
        lambda: f64,
    ) -> Result<Self> {
        space.check_same(u0.space())?;
        let mut boundary = space.boundary_nodes(FacetTag::GammaMinus);
        boundary.extend(space.boundary_nodes(FacetTag::GammaPlus));
        boundary.sort_unstable();
        boundary.dedup();
        let current = assemble_operators(&space, &problem, t0)?;
        let scale = libm::exp(-lambda * t0);
        Ok(Stepper {
            space,
            problem,
            theta,
            lambda,
            boundary,
            t: t0,
            v: u0.values().iter().map(|u| u * scale).collect(),
            current,
            solve: SolveOptions::with_tol(1e-13),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Current state `u`.
    pub fn state(&self) -> Field {
        let scale = libm::exp(self.lambda * self.t);
        Field::from_values(self.space.clone(), 1, self.v.iter().map(|v| v * scale).collect())
            .expect("state length matches its space")
    }

    /// `sqrt(u^T M_c u)` at the current time.
    pub fn energy(&self) -> f64 {
        let u = self.state();
        let mu = self.current.mass.apply(u.values());
        libm::sqrt(u.values().iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>().max(0.0))
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(alloc::format!("dt must be positive, got {dt}")));
        }
        let t1 = self.t + dt;
        let next = assemble_operators(&self.space, &self.problem, t1)?;
        let theta = self.theta;
        let decay = libm::exp(-self.lambda * dt);
        let forcing = libm::exp(-self.lambda * t1);

        let mut matrix = next.mass.clone();
        matrix.scale(1.0 / dt);
        matrix.add_scaled(theta, &next.op);
        let mv = self.current.mass.apply(&self.v);
        let lv = self.current.op.apply(&self.v);
        let rhs: Vec<f64> = (0..self.v.len())
            .map(|i| {
                decay * (mv[i] / dt - (1.0 - theta) * lv[i])
                    + forcing * (theta * next.load[i] + (1.0 - theta) * self.current.load[i])
            })
            .collect();

        let mut bc = Constraints::new();
        for &k in &self.boundary {
            let x = self.space.nodes()[k];
            let y = self.problem.map.position(x, t1)?;
            bc.set(k, forcing * (self.problem.boundary)(y, t1))?;
        }
        let sys = apply_dirichlet(
            SparseSystem {
                matrix,
                rhs,
                indefinite_at: None,
            },
            &bc,
        )?;
        self.v = solve_constrained(&sys, &self.solve)?.x;
        self.current = next;
        self.t = t1;
        Ok(())
    }
}

/// States on the reference mesh at each output time.
#[derive(Debug, Clone)]
pub struct DiffusionTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    /// `sqrt(u^T M_c u)` at each time.
    pub energy: Vec<f64>,
}

impl DiffusionTrajectory {
    pub fn last(&self) -> &Field {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Reference position, current position and value at every node of state `k`.
    pub fn push_forward(&self, k: usize, map: &DeformationMap) -> Result<Vec<(Vec2, Vec2, f64)>> {
        let state = &self.states[k];
        let t = self.times[k];
        state
            .space()
            .nodes()
            .iter()
            .zip(state.values())
            .map(|(&x, &v)| Ok((x, map.position(x, t)?, v)))
            .collect()
    }
}

pub fn solve_moving_diffusion(
    space: &Arc<Space>,
    problem: DiffusionProblem<'_>,
    e0: &Field,
    opts: DiffusionOptions,
) -> Result<DiffusionTrajectory> {
    opts.validate(problem.map)?;
    let mut stepper = Stepper::with_shift(
        space.clone(),
        problem,
        e0,
        opts.t0,
        opts.theta,
        opts.lambda_shift.unwrap_or(0.0),
    )?;
    let mut traj = DiffusionTrajectory {
        times: alloc::vec![opts.t0],
        states: alloc::vec![e0.clone()],
        energy: alloc::vec![stepper.energy()],
    };
    let span = opts.t_end - opts.t0;
    let steps = libm::ceil(span / opts.dt - 1e-9).max(0.0) as usize;
    for k in 0..steps {
        let target = if k + 1 == steps {
            opts.t_end
        } else {
            opts.t0 + (k + 1) as f64 * opts.dt
        };
        stepper.step(target - stepper.time())?;
        traj.times.push(stepper.time());
        traj.states.push(stepper.state());
        traj.energy.push(stepper.energy());
    }
    Ok(traj)
}

/// Shift `e = e_hat + g(t)` for a boundary value that is constant in space.
#[derive(Debug, Clone)]
pub struct Homogenized {
    pub initial: Field,
    pub g: SharedSignal,
}

/// Shifts initial data given at time `t0`.
pub fn homogenize(e0: &Field, g: SharedSignal, t0: f64) -> Homogenized {
    let g0 = g.value(t0);
    Homogenized {
        initial: e0.map_values(|v| v - g0),
        g,
    }
}

impl Homogenized {
    pub fn reconstruct(&self, e_hat: &Field, t: f64) -> Field {
        let g = self.g.value(t);
        e_hat.map_values(|v| v + g)
    }
}

/// Solves with the spatially constant boundary value `g(t)` through the
/// homogenized problem and returns the reconstructed trajectory. `energy`
/// refers to the homogenized variable.
pub fn solve_with_exterior(
    space: &Arc<Space>,
    map: &DeformationMap,
    kappa: f64,
    f: ScalarData<'_>,
    g: SharedSignal,
    e0: &Field,
    opts: DiffusionOptions,
) -> Result<DiffusionTrajectory> {
    let hom = homogenize(e0, g.clone(), opts.t0);
    let source = move |y: Vec2, t: f64| f(y, t) - g.rate(t);
    let zero = |_: Vec2, _: f64| 0.0;
    let problem = DiffusionProblem {
        map,
        kappa,
        source: &source,
        boundary: &zero,
    };
    let mut traj = solve_moving_diffusion(space, problem, &hom.initial, opts)?;
    for (state, &t) in traj.states.iter_mut().zip(&traj.times) {
        *state = hom.reconstruct(state, t);
    }
    Ok(traj)
}
