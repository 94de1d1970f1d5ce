//! Time-slab driver for the full quasi-stationary system: steps the dilation
//! rate `e'`, then runs the fixed-point sweep
//! `p' -> v_s -> p -> v_f -> phi -> u_s -> c` until the iterates settle.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::concentration::{solve_concentration, ConcentrationReport};
use crate::error::{Error, Result};
use crate::fem::{recover_gradient, Degree, Field, Space};
use crate::geometry::{deform_mesh, DeformationMap, Mesh};
use crate::mechanics::{
    darcy_fluid_velocity, prolongate, solve_displacement, solve_pressure, solve_pressure_rate, solve_velocity,
    traction_correction, traction_time_rate, BoundaryLoad, MaterialParams, MonodMode, RateBoundary, TractionInputs,
    TractionLoad, TractionVariant,
};
use crate::moving_diffusion::{solve_with_exterior, DiffusionOptions};
use crate::profile::SharedSignal;
use crate::volume_fraction::{
    check_admissibility, solid_fraction, solve_fraction, AdmissibilityReport, ContinuationOptions,
    FractionDiagnostics, Growth,
};

/// Boundary data of the pressure-rate stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    Exterior,
    /// Uses the pressure of the previous iterate; see [`RateBoundary::Transported`].
    Transported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Relaxation of `phi_s` and the traction correction, in `(0, 1]`.
    pub relaxation: f64,
    /// Initial solid fraction.
    pub phi_inf: f64,
    pub variant: TractionVariant,
    pub rate_mode: RateMode,
    pub fraction: ContinuationOptions,
    pub theta: f64,
    /// Diffusion steps per slab.
    pub substeps: usize,
    /// Start each slab from the previous converged state instead of the
    /// initial iterate with `phi_s = phi_inf`.
    pub warm_start: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_iters: 30,
            rel_tol: 1e-8,
            relaxation: 1.0,
            phi_inf: 0.5,
            variant: TractionVariant::Consistent,
            rate_mode: RateMode::Transported,
            fraction: ContinuationOptions::default(),
            theta: 1.0,
            substeps: 1,
            warm_start: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidInput(m));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return bad(format!("relaxation must lie in (0, 1], got {}", self.relaxation));
        }
        if !(self.phi_inf > 0.0 && self.phi_inf < 1.0) {
            return bad(format!("phi_inf must lie in (0, 1), got {}", self.phi_inf));
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        Ok(())
    }
}

/// Everything that stays fixed over a run.
#[derive(Debug, Clone)]
pub struct CoupledProblem {
    pub reference: Arc<Mesh>,
    pub map: DeformationMap,
    pub mp: MaterialParams,
    pub load: TractionLoad,
    /// Boundary value of `e'`, constant in space.
    pub e_ext: SharedSignal,
    /// Initial value of `e'`.
    pub e0: f64,
}

/// Converged unknowns of one slab, on the deformed mesh.
#[derive(Debug, Clone)]
pub struct SlabState {
    pub t: f64,
    pub mesh: Arc<Mesh>,
    pub e_rate: Field,
    pub p_rate: Field,
    pub p: Field,
    pub u_s: Field,
    pub v_s: Field,
    pub v_f: Field,
    pub phi_f: Field,
    pub phi_s: Field,
    pub c: Field,
    /// Traction correction of the last sweep.
    pub correction: BoundaryLoad,
    /// Scaled change of each sweep.
    pub sweep_history: Vec<f64>,
    pub admissibility: Vec<AdmissibilityReport>,
    pub fraction: Option<FractionDiagnostics>,
    pub concentration: Option<ConcentrationReport>,
    /// `|| div v_s - e' ||_L2`.
    pub div_consistency: f64,
}

impl SlabState {
    pub fn sweeps(&self) -> usize {
        self.sweep_history.len()
    }

    /// Ratios of successive sweep changes.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.sweep_history.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn fields(&self) -> [(&'static str, &Field); 9] {
        [
            ("e_rate", &self.e_rate),
            ("p_rate", &self.p_rate),
            ("p", &self.p),
            ("u_s", &self.u_s),
            ("v_s", &self.v_s),
            ("v_f", &self.v_f),
            ("phi_f", &self.phi_f),
            ("phi_s", &self.phi_s),
            ("c", &self.c),
        ]
    }
}

struct Spaces {
    mesh: Arc<Mesh>,
    scalar: Arc<Space>,
    vector: Arc<Space>,
}

impl Spaces {
    fn at(problem: &CoupledProblem, t: f64) -> Result<Spaces> {
        let mesh = Arc::new(deform_mesh(&problem.reference, &problem.map, t)?);
        Ok(Spaces {
            scalar: Space::new(mesh.clone(), Degree::P1),
            vector: Space::new(mesh.clone(), Degree::P2),
            mesh,
        })
    }
}

#[derive(Debug, Clone)]
struct Iterate {
    p_rate: Field,
    v_s: Field,
    p: Field,
    v_f: Field,
    phi_f: Field,
    phi_s: Field,
    u_s: Field,
    c: Field,
    correction: BoundaryLoad,
}

impl Iterate {
    fn initial(problem: &CoupledProblem, sp: &Spaces, cfg: &SweepConfig, t: f64) -> Iterate {
        let mp = &problem.mp;
        Iterate {
            p_rate: Field::zeros(sp.scalar.clone(), 1),
            v_s: Field::zeros(sp.vector.clone(), 2),
            p: Field::constant(sp.scalar.clone(), mp.p_ext.value(t)),
            v_f: Field::zeros(sp.vector.clone(), 2),
            phi_f: Field::constant(sp.scalar.clone(), 1.0 - cfg.phi_inf),
            phi_s: Field::constant(sp.scalar.clone(), cfg.phi_inf),
            u_s: Field::zeros(sp.vector.clone(), 2),
            c: Field::constant(sp.scalar.clone(), mp.c0),
            correction: BoundaryLoad::zeros(&sp.mesh),
        }
    }

    fn from_state(s: &SlabState, sp: &Spaces) -> Result<Iterate> {
        let (a, b) = (&sp.scalar, &sp.vector);
        Ok(Iterate {
            p_rate: s.p_rate.rebind(a.clone())?,
            v_s: s.v_s.rebind(b.clone())?,
            p: s.p.rebind(a.clone())?,
            v_f: s.v_f.rebind(b.clone())?,
            phi_f: s.phi_f.rebind(a.clone())?,
            phi_s: s.phi_s.rebind(a.clone())?,
            u_s: s.u_s.rebind(b.clone())?,
            c: s.c.rebind(a.clone())?,
            correction: s.correction.clone(),
        })
    }

    /// Largest scaled L2 change: pressures by `mu`, lengths and velocities
    /// by the domain height, concentration by `c0`.
    fn change(&self, other: &Iterate, mp: &MaterialParams, height: f64, area: f64) -> Result<f64> {
        let root = libm::sqrt(area);
        let mu = mp.elastic.mu;
        let pairs = [
            (&self.p_rate, &other.p_rate, mu),
            (&self.p, &other.p, mu),
            (&self.v_s, &other.v_s, height),
            (&self.v_f, &other.v_f, height),
            (&self.u_s, &other.u_s, height),
            (&self.phi_s, &other.phi_s, 1.0),
            (&self.c, &other.c, mp.c0),
        ];
        let mut worst: f64 = 0.0;
        for (a, b, scale) in pairs {
            worst = worst.max(a.l2_distance(b)? / (scale * root));
        }
        Ok(worst)
    }
}

/// Outcome of one sweep besides the new iterate.
struct SweepReport {
    admissibility: AdmissibilityReport,
    fraction: FractionDiagnostics,
    concentration: ConcentrationReport,
}

fn growth_field(mp: &MaterialParams, c: &Field) -> Field {
    c.map_values(|c| {
        let c = c.max(0.0);
        mp.k_s * c / (c + mp.monod_k_s)
    })
}

fn sweep(
    problem: &CoupledProblem,
    sp: &Spaces,
    t: f64,
    e_rate: &Field,
    prev: &Iterate,
    cfg: &SweepConfig,
    iteration: usize,
) -> Result<(Iterate, SweepReport)> {
    let mp = &problem.mp;
    let map = &problem.map;
    let omega = cfg.relaxation;

    let boundary = match cfg.rate_mode {
        RateMode::Exterior => RateBoundary::Exterior,
        RateMode::Transported => RateBoundary::Transported { p: &prev.p, map },
    };
    let p_rate = solve_pressure_rate(&sp.scalar, mp, e_rate, t, boundary).map_err(|e| e.in_stage("pressure_rate"))?;

    let q = prev.p.axpy(mp.pi, &prev.phi_s)?;
    let inputs = TractionInputs {
        u_s: &prev.u_s,
        q: &q,
        load: &problem.load,
        map,
        t,
    };
    let fresh = traction_correction(&sp.vector, mp, &inputs, cfg.variant).map_err(|e| e.in_stage("traction"))?;
    let correction = if omega == 1.0 {
        fresh
    } else {
        prev.correction.axpy(omega, &fresh.axpy(-1.0, &prev.correction))
    };
    let rate = traction_time_rate(&sp.vector, mp, &problem.load, t)?.axpy(1.0, &correction);
    let v_s = solve_velocity(&sp.vector, mp, &p_rate, &rate).map_err(|e| e.in_stage("velocity"))?;

    let p = solve_pressure(&sp.scalar, mp, &v_s, &prev.phi_s, t).map_err(|e| e.in_stage("pressure"))?;
    let v_f = darcy_fluid_velocity(mp, &p, &prev.phi_s, &v_s).map_err(|e| e.in_stage("darcy"))?;

    let admissibility = check_admissibility(&v_f, mp)?;
    let mut opts = cfg.fraction;
    if !admissibility.admissible && !opts.force {
        let marginal = admissibility.sign_violation() <= 10.0
            && admissibility.grad_norm <= admissibility.smallness_ratio * admissibility.threshold;
        if iteration == 1 || !marginal {
            return Err(Error::Inadmissible(format!("{admissibility:?}")).in_stage("volume_fraction"));
        }
        opts.force = true;
    }
    let growth_values;
    let growth = match mp.monod {
        MonodMode::Frozen => Growth::Constant(mp.k_s * mp.g_s),
        MonodMode::Live => {
            growth_values = growth_field(mp, &prev.c);
            Growth::Field(&growth_values)
        }
    };
    let (phi_f_new, fraction) =
        solve_fraction(&sp.scalar, &v_f, mp, growth, opts).map_err(|e| e.in_stage("volume_fraction"))?;
    let phi_s_new = solid_fraction(&phi_f_new);
    let phi_s = if omega == 1.0 {
        phi_s_new
    } else {
        prev.phi_s.axpy(omega, &phi_s_new.axpy(-1.0, &prev.phi_s)?)?
    };
    let phi_f = solid_fraction(&phi_s);

    let u_s = solve_displacement(&sp.vector, mp, &p, &phi_s, &problem.load, t)
        .map_err(|e| e.in_stage("displacement"))?;
    let (c, concentration) =
        solve_concentration(&sp.scalar, &v_f, &phi_s, mp).map_err(|e| e.in_stage("concentration"))?;

    let next = Iterate {
        p_rate,
        v_s,
        p,
        v_f,
        phi_f,
        phi_s,
        u_s,
        c,
        correction,
    };
    Ok((
        next,
        SweepReport {
            admissibility,
            fraction,
            concentration,
        },
    ))
}

fn height_scale(mesh: &Mesh) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in mesh.vertices() {
        lo = lo.min(v[1]);
        hi = hi.max(v[1]);
    }
    hi - lo
}

/// Steps `e'` from the previous slab (or starts from `e0`) to time `t`.
fn step_rate(problem: &CoupledProblem, t: f64, prev: Option<&SlabState>, cfg: &SweepConfig) -> Result<Field> {
    let reference = Space::new(problem.reference.clone(), Degree::P1);
    let Some(prev) = prev else {
        return Ok(Field::constant(reference, problem.e0));
    };
    let e_prev = prev.e_rate.rebind(reference.clone())?;
    let span = t - prev.t;
    if span == 0.0 {
        return Ok(e_prev);
    }
    let mut opts = DiffusionOptions::new(t, span / cfg.substeps as f64);
    opts.t0 = prev.t;
    opts.theta = cfg.theta;
    let zero = |_: crate::math::Vec2, _: f64| 0.0;
    let traj = solve_with_exterior(
        &reference,
        &problem.map,
        problem.mp.kappa(),
        &zero,
        problem.e_ext.clone(),
        &e_prev,
        opts,
    )
    .map_err(|e| e.in_stage("moving_diffusion"))?;
    Ok(traj.last().clone())
}

/// Solves the slab at time `t`, warm-started from `prev` when given.
pub fn solve_time_slab(
    problem: &CoupledProblem,
    t: f64,
    prev: Option<&SlabState>,
    cfg: &SweepConfig,
) -> Result<SlabState> {
    cfg.validate()?;
    problem.mp.validate()?;
    if let Some(p) = prev {
        if t < p.t {
            return Err(Error::InvalidInput(format!("slab time {t} precedes previous slab {}", p.t)));
        }
    }
    if t > problem.map.t_max() {
        return Err(Error::InvalidInput(format!("t = {t} exceeds t_max = {}", problem.map.t_max())));
    }
    let sp = Spaces::at(problem, t)?;
    let e_rate = step_rate(problem, t, prev, cfg)?.rebind(sp.scalar.clone())?;
    let mut it = match prev {
        Some(s) if cfg.warm_start => Iterate::from_state(s, &sp)?,
        _ => Iterate::initial(problem, &sp, cfg, t),
    };
    let height = height_scale(&sp.mesh);
    let area = sp.mesh.total_area();
    let mut history = Vec::new();
    let mut admissibility = Vec::new();
    for iteration in 1..=cfg.max_iters {
        let (next, report) = sweep(problem, &sp, t, &e_rate, &it, cfg, iteration)?;
        let change = next.change(&it, &problem.mp, height, area)?;
        history.push(change);
        admissibility.push(report.admissibility);
        it = next;
        if change < cfg.rel_tol {
            let div_consistency = div_consistency(&it.v_s, &e_rate)?;
            return Ok(SlabState {
                t,
                mesh: sp.mesh.clone(),
                e_rate,
                p_rate: it.p_rate,
                p: it.p,
                u_s: it.u_s,
                v_s: it.v_s,
                v_f: it.v_f,
                phi_f: it.phi_f,
                phi_s: it.phi_s,
                c: it.c,
                correction: it.correction,
                sweep_history: history,
                admissibility,
                fraction: Some(report.fraction),
                concentration: Some(report.concentration),
                div_consistency,
            });
        }
    }
    Err(Error::SlabNotConverged {
        t,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Runs consecutive slabs at the given times.
pub fn run_slabs(problem: &CoupledProblem, times: &[f64], cfg: &SweepConfig) -> Result<Vec<SlabState>> {
    let mut out: Vec<SlabState> = Vec::with_capacity(times.len());
    for &t in times {
        let state = solve_time_slab(problem, t, out.last(), cfg)?;
        out.push(state);
    }
    Ok(out)
}

/// `|| div v_s - e' ||_L2` on the slab mesh.
pub fn div_consistency(v_s: &Field, e_rate: &Field) -> Result<f64> {
    let mut sum = 0.0;
    let sp = e_rate.space();
    for cell in 0..sp.n_cells() {
        for qp in sp.quad_points(cell) {
            let d = v_s.grad(&qp.element, qp.bary);
            let r = d[0][0] + d[1][1] - e_rate.scalar_at(&qp);
            sum += qp.weight * r * r;
        }
    }
    Ok(libm::sqrt(sum))
}

/// Column-integrated mass balance of the top boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightFlux {
    pub x1: Vec<f64>,
    /// Column height.
    pub height: Vec<f64>,
    /// `d/dx1 int_0^h v1 dx2 - v2(x1, 0)`.
    pub divergence: Vec<f64>,
    /// `dh/dt + divergence`.
    pub residual: Vec<f64>,
}

impl HeightFlux {
    /// Trapezoidal `L2` norm of the residual over `x1`.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for k in 1..self.x1.len() {
            let dx = self.x1[k] - self.x1[k - 1];
            s += 0.5 * dx * (self.residual[k] * self.residual[k] + self.residual[k - 1] * self.residual[k - 1]);
        }
        libm::sqrt(s)
    }
}

/// Composite velocity `v_s - k_h grad(p - Pi phi_s)` in the space of `v_s`.
pub fn mixture_velocity(mp: &MaterialParams, state: &SlabState) -> Result<Field> {
    let potential = state.p.axpy(-mp.pi, &state.phi_s)?;
    let g = prolongate(&recover_gradient(&potential)?, state.v_s.space())?;
    state.v_s.axpy(-mp.k_h, &g)
}

/// Height-flux residual on the mesh columns. `dh_dt` is evaluated at each
/// column abscissa.
pub fn height_flux_residual(v: &Field, dh_dt: &dyn Fn(f64) -> f64) -> Result<HeightFlux> {
    if v.components() != 2 || v.space().degree() != Degree::P2 {
        return Err(Error::InvalidInput("height flux needs a degree 2 vector field".into()));
    }
    let sp = v.space();
    let mesh = sp.mesh();
    let (nx, ny) = mesh.grid();
    let nv = mesh.vertices().len();
    let edge_index: BTreeMap<(usize, usize), usize> = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| ((e[0].min(e[1]), e[0].max(e[1])), k))
        .collect();
    let mut x1 = vec![0.0; nx + 1];
    let mut height = vec![0.0; nx + 1];
    let mut flux = vec![0.0; nx + 1];
    let mut bottom = vec![0.0; nx + 1];
    for i in 0..=nx {
        let base = mesh.grid_vertex(i, 0);
        x1[i] = mesh.vertices()[base][0];
        bottom[i] = v.node(base)[1];
        let mut integral = 0.0;
        for j in 0..ny {
            let (a, b) = (mesh.grid_vertex(i, j), mesh.grid_vertex(i, j + 1));
            let Some(&e) = edge_index.get(&(a.min(b), a.max(b))) else {
                return Err(Error::DegenerateMesh(format!("column {i} has no edge between rows {j} and {}", j + 1)));
            };
            let len = mesh.vertices()[b][1] - mesh.vertices()[a][1];
            // Simpson on the quadratic edge trace
            integral += len / 6.0 * (v.node(a)[0] + 4.0 * v.node(nv + e)[0] + v.node(b)[0]);
        }
        flux[i] = integral;
        height[i] = mesh.vertices()[mesh.grid_vertex(i, ny)][1] - mesh.vertices()[base][1];
    }
    let mut divergence = vec![0.0; nx + 1];
    for i in 0..=nx {
        let d = if i == 0 {
            one_sided(&x1, &flux, 0, 1, 2)
        } else if i == nx {
            one_sided(&x1, &flux, nx, nx - 1, nx - 2)
        } else {
            (flux[i + 1] - flux[i - 1]) / (x1[i + 1] - x1[i - 1])
        };
        divergence[i] = d - bottom[i];
    }
    let residual = x1.iter().zip(&divergence).map(|(&x, d)| dh_dt(x) + d).collect();
    Ok(HeightFlux {
        x1,
        height,
        divergence,
        residual,
    })
}

/// Second-order one-sided derivative at `x[i0]` from three abscissae.
fn one_sided(x: &[f64], f: &[f64], i0: usize, i1: usize, i2: usize) -> f64 {
    let (h1, h2) = (x[i1] - x[i0], x[i2] - x[i0]);
    let (a, b) = (f[i1] - f[i0], f[i2] - f[i0]);
    (a * h2 * h2 - b * h1 * h1) / (h1 * h2 * (h2 - h1))
}

/// Result of the experimental explicit height update.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightUpdate {
    pub x1: Vec<f64>,
    pub height: Vec<f64>,
    /// Step actually taken after the stability limit.
    pub dt: f64,
    /// Columns clipped at the floor.
    pub clipped: Vec<usize>,
    pub experimental: bool,
}

/// `h_next = h - dt * divergence`, with `dt` limited so no column moves by
/// more than `0.1 floor`, clipped at `floor`. Experimental.
pub fn height_explicit_update(flux: &HeightFlux, dt: f64, floor: f64) -> Result<HeightUpdate> {
    if !(dt > 0.0 && floor > 0.0) {
        return Err(Error::InvalidInput(format!("dt and floor must be positive, got {dt}, {floor}")));
    }
    let fastest = flux.divergence.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let dt = if fastest * dt > 0.1 * floor { 0.1 * floor / fastest } else { dt };
    let mut clipped = Vec::new();
    let height = flux
        .height
        .iter()
        .zip(&flux.divergence)
        .enumerate()
        .map(|(i, (&h, &d))| {
            let next = h - dt * d;
            if next < floor {
                clipped.push(i);
                floor
            } else {
                next
            }
        })
        .collect();
    Ok(HeightUpdate {
        x1: flux.x1.clone(),
        height,
        dt,
        clipped,
        experimental: true,
    })
}
