//! The quasi-stationary mechanical block: displacement, velocity, pressure,
//! pressure rate and the Darcy fluid velocity.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_elasticity, assemble_scalar, recover_gradient, solve_constrained, Constraints, Degree,
    ElasticConstants, ElasticLoad, FacetPoint, Field, ScalarForm, SolveOptions, Space,
};
use crate::geometry::{DeformationMap, FacetTag, Mesh, Side};
use crate::math::{add, dot, mat_vec, scale, sub, transpose, Mat2, Vec2};
use crate::profile::{Constant, SharedSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonodMode {
    /// `g_s`, `g_c` are constants.
    Frozen,
    /// Growth and uptake factors follow `c / (c + K)`.
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureMode {
    /// `k_h lap p = div v_s`, `p = p_ext` on the boundary.
    Standard,
    /// Solve for the chemical potential `p - Pi phi_s` instead.
    Osmotic,
}

/// All model constants and exterior data.
#[derive(Debug, Clone)]
pub struct MaterialParams {
    pub elastic: ElasticConstants,
    pub k_h: f64,
    pub pi: f64,
    pub xi_inf: f64,
    pub k_s: f64,
    pub g_s: f64,
    pub k_c: f64,
    pub g_c: f64,
    pub monod_k_s: f64,
    pub monod_k_c: f64,
    pub d: f64,
    pub c0: f64,
    pub p_ext: SharedSignal,
    pub pi_ext: SharedSignal,
    pub monod: MonodMode,
    pub pressure: PressureMode,
}

impl MaterialParams {
    /// Every constant 1, `Pi = 0`, no exterior pressure.
    pub fn unit() -> Self {
        MaterialParams {
            elastic: ElasticConstants { lambda: 1.0, mu: 1.0 },
            k_h: 1.0,
            pi: 0.0,
            xi_inf: 1.0,
            k_s: 1.0,
            g_s: 1.0,
            k_c: 1.0,
            g_c: 1.0,
            monod_k_s: 1.0,
            monod_k_c: 1.0,
            d: 1.0,
            c0: 1.0,
            p_ext: Arc::new(Constant(0.0)),
            pi_ext: Arc::new(Constant(0.0)),
            monod: MonodMode::Frozen,
            pressure: PressureMode::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ElasticConstants::new(self.elastic.lambda, self.elastic.mu)?;
        let positive = [
            ("k_h", self.k_h),
            ("xi_inf", self.xi_inf),
            ("k_s", self.k_s),
            ("g_s", self.g_s),
            ("k_c", self.k_c),
            ("g_c", self.g_c),
            ("K_s", self.monod_k_s),
            ("K_c", self.monod_k_c),
            ("d", self.d),
            ("c0", self.c0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pi >= 0.0) || !self.pi.is_finite() {
            return Err(Error::InvalidInput(format!("Pi must be >= 0, got {}", self.pi)));
        }
        Ok(())
    }

    /// `P(t) = p_ext - pi_ext`, so that the default load is `g = -P n`.
    pub fn net_exterior(&self, t: f64) -> f64 {
        self.p_ext.value(t) - self.pi_ext.value(t)
    }

    pub fn net_exterior_rate(&self, t: f64) -> f64 {
        self.p_ext.rate(t) - self.pi_ext.rate(t)
    }

    /// Diffusivity of the dilatation rate, `k_h (2 mu + lambda)`.
    pub fn kappa(&self) -> f64 {
        self.k_h * (2.0 * self.elastic.mu + self.elastic.lambda)
    }
}

/// Solution bundle of the mechanical block.
#[derive(Debug, Clone)]
pub struct MechState {
    pub u_s: Field,
    pub v_s: Field,
    pub v_f: Field,
    pub p: Field,
    pub p_rate: Field,
}

/// Prescribed Neumann data on `GammaPlus` besides the default normal load.
pub trait TractionField: Send + Sync {
    fn value(&self, x: Vec2, t: f64) -> Vec2;
    /// `d g / dt` at fixed `x`.
    fn rate(&self, x: Vec2, t: f64) -> Vec2;
    /// `gradient[i][j] = d g_i / d x_j`.
    fn gradient(&self, x: Vec2, t: f64) -> Mat2;
}

/// Boundary load `g` on `GammaPlus`.
#[derive(Clone)]
pub enum TractionLoad {
    /// `g = -(p_ext - pi_ext) n`.
    ExteriorPressure,
    /// A spatial field, independent of the normal.
    Field(Arc<dyn TractionField>),
}

impl core::fmt::Debug for TractionLoad {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TractionLoad::ExteriorPressure => f.write_str("ExteriorPressure"),
            TractionLoad::Field(_) => f.write_str("Field"),
        }
    }
}

impl TractionLoad {
    pub fn value(&self, mp: &MaterialParams, x: Vec2, n: Vec2, t: f64) -> Vec2 {
        match self {
            TractionLoad::ExteriorPressure => scale(-mp.net_exterior(t), n),
            TractionLoad::Field(g) => g.value(x, t),
        }
    }
}

/// Neumann data on `GammaPlus` in weak form:
/// `int value . w + int flux . dw/dtau + sum_v point_v . w(v)`.
/// Values and fluxes are sampled at the three Gauss points of every facet.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoad {
    values: Vec<[Vec2; 3]>,
    fluxes: Vec<[Vec2; 3]>,
    points: Vec<Vec2>,
}

impl BoundaryLoad {
    pub fn zeros(mesh: &Mesh) -> Self {
        BoundaryLoad {
            values: vec![[[0.0; 2]; 3]; mesh.facets().len()],
            fluxes: vec![[[0.0; 2]; 3]; mesh.facets().len()],
            points: vec![[0.0; 2]; mesh.vertices().len()],
        }
    }

    /// Pointwise traction `f` at the Gauss points of every `GammaPlus` facet.
    pub fn sample(space: &Space, mut f: impl FnMut(&FacetPoint) -> Result<Vec2>) -> Result<Self> {
        let mut out = Self::zeros(space.mesh());
        for (k, facet) in space.mesh().facets().iter().enumerate() {
            if facet.tag != FacetTag::GammaPlus {
                continue;
            }
            for fp in space.facet_points(k)? {
                out.values[k][fp.q] = f(&fp)?;
            }
        }
        Ok(out)
    }

    pub fn at(&self, fp: &FacetPoint) -> Vec2 {
        self.values[fp.facet][fp.q]
    }

    pub fn flux_at(&self, fp: &FacetPoint) -> Vec2 {
        self.fluxes[fp.facet][fp.q]
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &BoundaryLoad) -> BoundaryLoad {
        let comb = |x: &[[Vec2; 3]], y: &[[Vec2; 3]]| -> Vec<[Vec2; 3]> {
            x.iter()
                .zip(y)
                .map(|(x, y)| [0, 1, 2].map(|q| add(x[q], scale(a, y[q]))))
                .collect()
        };
        BoundaryLoad {
            values: comb(&self.values, &other.values),
            fluxes: comb(&self.fluxes, &other.fluxes),
            points: self
                .points
                .iter()
                .zip(&other.points)
                .map(|(x, y)| add(*x, scale(a, *y)))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .chain(&self.fluxes)
            .flat_map(|v| v.iter())
            .chain(&self.points)
            .fold(0.0, |m, v| m.max(v[0].abs()).max(v[1].abs()))
    }
}

fn zero_on_gamma_minus(space: &Space, components: usize) -> Result<Constraints> {
    let mut c = Constraints::new();
    c.add_tag(space, FacetTag::GammaMinus, components, |_| [0.0, 0.0])?;
    if c.is_empty() {
        return Err(Error::SingularSystem("no GammaMinus facets: elasticity operator is singular".into()));
    }
    Ok(c)
}

fn check_scalar(f: &Field, name: &str) -> Result<()> {
    if f.components() != 1 {
        return Err(Error::InvalidInput(format!("{name} must be a scalar field")));
    }
    Ok(())
}

fn check_vector(f: &Field, name: &str) -> Result<()> {
    if f.components() != 2 {
        return Err(Error::InvalidInput(format!("{name} must be a vector field")));
    }
    Ok(())
}

fn solver_opts(tol: f64) -> SolveOptions {
    SolveOptions::with_tol(tol)
}

/// Linear solve tolerance used by the mechanical block.
pub const MECH_TOL: f64 = 1e-12;

/// Dirichlet data of the pressure-rate problem.
#[derive(Clone, Copy)]
pub enum RateBoundary<'a> {
    /// `p' = d p_ext / dt` on the whole boundary.
    Exterior,
    /// A fixed value on the whole boundary.
    Value(f64),
    /// Values given pointwise.
    Function(&'a dyn Fn(Vec2) -> f64),
    /// `p' = d p_ext / dt - grad(p) . nu` on the boundary: the domain
    /// derivative of the Dirichlet condition `p = p_ext` on a moving boundary.
    Transported {
        p: &'a Field,
        map: &'a DeformationMap,
    },
}

impl core::fmt::Debug for RateBoundary<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RateBoundary::Exterior => f.write_str("Exterior"),
            RateBoundary::Value(v) => write!(f, "Value({v})"),
            RateBoundary::Function(_) => f.write_str("Function"),
            RateBoundary::Transported { .. } => f.write_str("Transported"),
        }
    }
}

/// Solves `int grad p' . grad w = (2 mu + lambda) int grad e' . grad w` with
/// Dirichlet data on the whole boundary.
pub fn solve_pressure_rate(
    space: &Arc<Space>,
    mp: &MaterialParams,
    e_rate: &Field,
    t: f64,
    boundary: RateBoundary<'_>,
) -> Result<Field> {
    check_scalar(e_rate, "e_rate")?;
    let m = 2.0 * mp.elastic.mu + mp.elastic.lambda;
    let form = ScalarForm {
        diffusion: Some(&|_| [[1.0, 0.0], [0.0, 1.0]]),
        flux_source: Some(&|qp| {
            let g = e_rate.grad_at(qp)[0];
            [m * g[0], m * g[1]]
        }),
        ..Default::default()
    };
    let sys = assemble_scalar(space, &form)?;
    let mut c = Constraints::new();
    let base = match boundary {
        RateBoundary::Value(v) => v,
        _ => mp.p_ext.rate(t),
    };
    match boundary {
        RateBoundary::Transported { p, map } => {
            check_scalar(p, "p")?;
            let grad = recover_gradient(p)?;
            for tag in [FacetTag::GammaMinus, FacetTag::GammaPlus] {
                for node in space.boundary_nodes(tag) {
                    let x = space.nodes()[node];
                    let (nu, _) = map.eulerian_velocity(map.inverse(x, t)?, t)?;
                    let g = grad.node(node);
                    c.set(node, base - dot(g, nu))?;
                }
            }
        }
        RateBoundary::Function(f) => {
            for tag in [FacetTag::GammaMinus, FacetTag::GammaPlus] {
                c.add_tag(space, tag, 1, |x| [f(x), 0.0])?;
            }
        }
        _ => {
            for tag in [FacetTag::GammaMinus, FacetTag::GammaPlus] {
                c.add_tag(space, tag, 1, |_| [base, 0.0])?;
            }
        }
    }
    let sys = apply_dirichlet(sys, &c)?;
    let x = solve_constrained(&sys, &solver_opts(MECH_TOL))?.x;
    Field::from_values(space.clone(), 1, x)
}

/// Solves the velocity problem: `int sigma(v) : grad w = int p' div w + int g' . w`
/// on `GammaPlus`, `v = 0` on `GammaMinus`.
pub fn solve_velocity(
    space: &Arc<Space>,
    mp: &MaterialParams,
    p_rate: &Field,
    traction_rate: &BoundaryLoad,
) -> Result<Field> {
    check_scalar(p_rate, "p_rate")?;
    let traction = |fp: &FacetPoint| traction_rate.at(fp);
    let flux = |fp: &FacetPoint| traction_rate.flux_at(fp);
    let load = ElasticLoad {
        pressure: Some(&|qp| p_rate.scalar_at(qp)),
        traction: Some(&traction),
        traction_flux: Some(&flux),
        point_loads: Some(traction_rate.points()),
        ..Default::default()
    };
    let sys = assemble_elasticity(space, mp.elastic, &load)?;
    let sys = apply_dirichlet(sys, &zero_on_gamma_minus(space, 2)?)?;
    let x = solve_constrained(&sys, &solver_opts(MECH_TOL))?.x;
    Field::from_values(space.clone(), 2, x)
}

/// Solves `int sigma(u) : grad w = int (p + Pi phi_s) div w + int g . w` on
/// `GammaPlus`, `u = 0` on `GammaMinus`.
pub fn solve_displacement(
    space: &Arc<Space>,
    mp: &MaterialParams,
    p: &Field,
    phi_s: &Field,
    load: &TractionLoad,
    t: f64,
) -> Result<Field> {
    check_scalar(p, "p")?;
    check_scalar(phi_s, "phi_s")?;
    let traction = |fp: &FacetPoint| {
        if fp.tag == FacetTag::GammaPlus {
            load.value(mp, fp.x, fp.normal, t)
        } else {
            [0.0, 0.0]
        }
    };
    let el = ElasticLoad {
        pressure: Some(&|qp| p.scalar_at(qp) + mp.pi * phi_s.scalar_at(qp)),
        traction: Some(&traction),
        ..Default::default()
    };
    let sys = assemble_elasticity(space, mp.elastic, &el)?;
    let sys = apply_dirichlet(sys, &zero_on_gamma_minus(space, 2)?)?;
    let x = solve_constrained(&sys, &solver_opts(MECH_TOL))?.x;
    Field::from_values(space.clone(), 2, x)
}

/// Solves `k_h lap p = div v_s` with `p = p_ext` on the boundary (osmotic
/// mode: for `p - Pi phi_s` with boundary value `p_ext - pi_ext`).
pub fn solve_pressure(space: &Arc<Space>, mp: &MaterialParams, v_s: &Field, phi_s: &Field, t: f64) -> Result<Field> {
    check_vector(v_s, "v_s")?;
    check_scalar(phi_s, "phi_s")?;
    let k = mp.k_h;
    let form = ScalarForm {
        diffusion: Some(&|_| [[k, 0.0], [0.0, k]]),
        source: Some(&|qp| -v_s.div_at(qp)),
        ..Default::default()
    };
    let sys = assemble_scalar(space, &form)?;
    let value = match mp.pressure {
        PressureMode::Standard => mp.p_ext.value(t),
        PressureMode::Osmotic => mp.net_exterior(t),
    };
    let mut c = Constraints::new();
    for tag in [FacetTag::GammaMinus, FacetTag::GammaPlus] {
        c.add_tag(space, tag, 1, |_| [value, 0.0])?;
    }
    let sys = apply_dirichlet(sys, &c)?;
    let x = solve_constrained(&sys, &solver_opts(MECH_TOL))?.x;
    let chi = Field::from_values(space.clone(), 1, x)?;
    match mp.pressure {
        PressureMode::Standard => Ok(chi),
        PressureMode::Osmotic => {
            let phi = phi_s.rebind(space.clone())?;
            chi.axpy(mp.pi, &phi)
        }
    }
}

/// Interpolates a field onto a finer-or-equal space on the same mesh.
pub fn prolongate(f: &Field, target: &Arc<Space>) -> Result<Field> {
    if f.space().degree() == target.degree() {
        return f.rebind(target.clone());
    }
    if !(f.space().degree() == Degree::P1 && target.degree() == Degree::P2) {
        return Err(Error::InvalidInput("only degree 1 to degree 2 prolongation is supported".into()));
    }
    let c = f.components();
    let mut values = Vec::with_capacity(target.n_nodes() * c);
    values.extend_from_slice(f.values());
    for e in target.mesh().edges() {
        for i in 0..c {
            values.push(0.5 * (f.values()[e[0] * c + i] + f.values()[e[1] * c + i]));
        }
    }
    Field::from_values(target.clone(), c, values)
}

/// `v_f = -xi_inf grad p + v_s` (osmotic mode: `grad (p - Pi phi_s)`), in
/// the space of `v_s`.
pub fn darcy_fluid_velocity(mp: &MaterialParams, p: &Field, phi_s: &Field, v_s: &Field) -> Result<Field> {
    check_scalar(p, "p")?;
    check_vector(v_s, "v_s")?;
    let potential = match mp.pressure {
        PressureMode::Standard => p.clone(),
        PressureMode::Osmotic => p.axpy(-mp.pi, &phi_s.rebind(p.space().clone())?)?,
    };
    let g = prolongate(&recover_gradient(&potential)?, v_s.space())?;
    v_s.axpy(-mp.xi_inf, &g)
}

/// Which boundary condition the velocity problem receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TractionVariant {
    /// Material derivative of the Neumann condition, transported to the
    /// current boundary.
    Consistent,
    /// The correction term as published, with the normal extended off the
    /// top boundary by the graph formula.
    AsPublished,
}

/// Inputs of the traction-rate evaluation.
#[derive(Debug, Clone, Copy)]
pub struct TractionInputs<'a> {
    pub u_s: &'a Field,
    /// `p + Pi phi_s`.
    pub q: &'a Field,
    pub load: &'a TractionLoad,
    pub map: &'a DeformationMap,
    pub t: f64,
}

fn normal_jet(fp: &FacetPoint, map: &DeformationMap, t: f64) -> (Vec2, Vec2) {
    if fp.side == Side::Top {
        if let Some(h) = map.top_jet(fp.x[0], t) {
            let s = libm::sqrt(1.0 + h.d_x * h.d_x);
            let n = [-h.d_x / s, 1.0 / s];
            // d n / d x1
            let ds = h.d_x * h.d_xx / s;
            let dn = [(-h.d_xx * s + h.d_x * ds) / (s * s), -ds / (s * s)];
            return (n, dn);
        }
    }
    (fp.normal, [0.0, 0.0])
}

/// `sigma(u) - q I`.
fn effective_stress(ec: &ElasticConstants, u_s: &Field, q: &Field, element: &crate::fem::Element, bary: [f64; 3]) -> Mat2 {
    let s = ec.stress(&u_s.grad(element, bary));
    let qv = q.eval(element, bary)[0];
    [[s[0][0] - qv, s[0][1]], [s[1][0], s[1][1] - qv]]
}

/// The correction so that the velocity load is `dg/dt + r`.
///
/// `Consistent` is the material derivative of `(sigma(u) - q I) n = g` along
/// the boundary motion, rewritten with the equilibrium equation so that only
/// first derivatives of `u` appear: the normal derivative of the stress is
/// traded for a tangential one and integrated by parts along each facet,
/// leaving a flux term and vertex loads.
pub fn traction_correction(
    space: &Arc<Space>,
    mp: &MaterialParams,
    inputs: &TractionInputs<'_>,
    variant: TractionVariant,
) -> Result<BoundaryLoad> {
    let TractionInputs { u_s, q, load, map, t } = *inputs;
    check_vector(u_s, "u_s")?;
    check_scalar(q, "q")?;
    let ec = mp.elastic;
    if variant == TractionVariant::AsPublished {
        return BoundaryLoad::sample(space, |fp| {
            let (nu, gnu) = map.eulerian_velocity(map.inverse(fp.x, t)?, t)?;
            let s = ec.stress(&u_s.grad(&fp.element, fp.bary));
            let g = load.value(mp, fp.x, fp.normal, t);
            let nn = dot(fp.normal, mat_vec(&gnu, fp.normal));
            let (n_ext, dn) = normal_jet(fp, map, t);
            let div = gnu[0][0] + gnu[1][1];
            let t1 = mat_vec(&s, mat_vec(&transpose(&gnu), n_ext));
            let t2 = mat_vec(&s, add(scale(div, n_ext), scale(nu[0], dn)));
            let t3 = mat_vec(&s, scale(div, n_ext));
            Ok(sub(add(add(t1, t2), t3), scale(nn, g)))
        });
    }
    let mesh = space.mesh();
    let mut out = BoundaryLoad::zeros(mesh);
    // vertex averages of sigma_eff for the end terms
    let mut corner_sigma = vec![[[0.0; 2]; 2]; mesh.vertices().len()];
    let mut corner_count = vec![0usize; mesh.vertices().len()];
    for (k, facet) in mesh.facets().iter().enumerate() {
        if facet.tag != FacetTag::GammaPlus {
            continue;
        }
        for fp in space.facet_points(k)? {
            let (nu, gnu) = map.eulerian_velocity(map.inverse(fp.x, t)?, t)?;
            let (n, tau) = (fp.normal, fp.tangent);
            let sigma = effective_stress(&ec, u_s, q, &fp.element, fp.bary);
            let g = load.value(mp, fp.x, n, t);
            let nn = dot(n, mat_vec(&gnu, n));
            let gt_n = mat_vec(&transpose(&gnu), n);
            let nu_n = dot(nu, n);
            let d_nu_n = dot(mat_vec(&gnu, tau), n);
            let s_tau = mat_vec(&sigma, tau);
            let mut r = sub(mat_vec(&sigma, gt_n), scale(nn, g));
            match load {
                TractionLoad::ExteriorPressure => {
                    let ndot = sub(scale(nn, n), gt_n);
                    r = sub(r, scale(mp.net_exterior(t), ndot));
                }
                TractionLoad::Field(f) => {
                    r = add(r, scale(nu_n, mat_vec(&f.gradient(fp.x, t), n)));
                }
            }
            out.values[k][fp.q] = sub(r, scale(d_nu_n, s_tau));
            out.fluxes[k][fp.q] = scale(-nu_n, s_tau);
        }
        let el = space.element(facet.triangle);
        let tri = mesh.triangles()[facet.triangle];
        for &v in &facet.vertices {
            let local = tri.iter().position(|&w| w == v).unwrap_or(0);
            let mut bary = [0.0; 3];
            bary[local] = 1.0;
            let s = effective_stress(&ec, u_s, q, &el, bary);
            for r in 0..2 {
                for c in 0..2 {
                    corner_sigma[v][r][c] += s[r][c];
                }
            }
            corner_count[v] += 1;
        }
    }
    for (k, facet) in mesh.facets().iter().enumerate() {
        if facet.tag != FacetTag::GammaPlus {
            continue;
        }
        let n = mesh.facet_normal(k)?;
        let [a, b] = facet.vertices;
        let (xa, xb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.facet_length(k);
        let tau = [(xb[0] - xa[0]) / len, (xb[1] - xa[1]) / len];
        for (v, sign) in [(a, -1.0), (b, 1.0)] {
            let c = corner_count[v] as f64;
            let sbar = [0, 1].map(|r| [0, 1].map(|col| corner_sigma[v][r][col] / c));
            let (nu, _) = map.eulerian_velocity(map.inverse(mesh.vertices()[v], t)?, t)?;
            let term = scale(sign * dot(nu, n), mat_vec(&sbar, tau));
            out.points[v] = add(out.points[v], term);
        }
    }
    Ok(out)
}

/// `dg/dt` at fixed position (for the exterior-pressure load, `-P'(t) n`).
pub fn traction_time_rate(space: &Arc<Space>, mp: &MaterialParams, load: &TractionLoad, t: f64) -> Result<BoundaryLoad> {
    BoundaryLoad::sample(space, |fp| {
        Ok(match load {
            TractionLoad::ExteriorPressure => scale(-mp.net_exterior_rate(t), fp.normal),
            TractionLoad::Field(f) => f.rate(fp.x, t),
        })
    })
}

/// Full velocity load `g' = dg/dt + r`.
pub fn traction_rate(
    space: &Arc<Space>,
    mp: &MaterialParams,
    inputs: &TractionInputs<'_>,
    variant: TractionVariant,
) -> Result<BoundaryLoad> {
    let r = traction_correction(space, mp, inputs, variant)?;
    Ok(traction_time_rate(space, mp, inputs.load, inputs.t)?.axpy(1.0, &r))
}
