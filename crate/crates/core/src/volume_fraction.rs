//! Stationary transport of the fluid fraction through its elliptic
//! regularization, with the admissibility checks on the fluid velocity.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_scalar, recover_divergence, recover_gradient, solve_constrained, Constraints, Field,
    QuadPoint, ScalarForm, SolveOptions, Space,
};
use crate::geometry::Mesh;
use crate::math::dot;
use crate::mechanics::MaterialParams;

/// Hypotheses on `v_f` under which the fraction problem is well posed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    /// Largest elementwise divergence sampled at element nodes.
    pub max_div: f64,
    /// Largest `v_f . n` over boundary quadrature points.
    pub max_flux_normal: f64,
    /// Largest entrywise sum `sum_ij |d_j v_i|` over quadrature points.
    pub grad_norm: f64,
    /// `k_s g_s`.
    pub threshold: f64,
    pub tol_sign: f64,
    pub smallness_ratio: f64,
    pub admissible: bool,
}

impl AdmissibilityReport {
    /// Largest violation measured in units of `tol_sign` (0 when admissible).
    pub fn sign_violation(&self) -> f64 {
        (self.max_div.max(self.max_flux_normal) / self.tol_sign).max(0.0)
    }
}

pub const SMALLNESS_RATIO: f64 = 0.5;

pub fn check_admissibility(v_f: &Field, mp: &MaterialParams) -> Result<AdmissibilityReport> {
    check_admissibility_with(v_f, mp, SMALLNESS_RATIO)
}

pub fn check_admissibility_with(v_f: &Field, mp: &MaterialParams, smallness_ratio: f64) -> Result<AdmissibilityReport> {
    if v_f.components() != 2 {
        return Err(Error::InvalidInput("v_f must be a vector field".into()));
    }
    let space = v_f.space();
    let mut max_div = f64::NEG_INFINITY;
    let mut grad_norm: f64 = 0.0;
    for cell in 0..space.n_cells() {
        let el = space.element(cell);
        let probes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ];
        for bary in probes {
            let g = v_f.grad(&el, bary);
            max_div = max_div.max(g[0][0] + g[1][1]);
            grad_norm = grad_norm.max(g[0][0].abs() + g[0][1].abs() + g[1][0].abs() + g[1][1].abs());
        }
    }
    let mut max_flux: f64 = f64::NEG_INFINITY;
    for facet in 0..space.mesh().facets().len() {
        for fp in space.facet_points(facet)? {
            max_flux = max_flux.max(dot(v_f.eval(&fp.element, fp.bary), fp.normal));
        }
    }
    let scale = (0..space.n_nodes())
        .map(|k| {
            let v = v_f.node(k);
            v[0].abs().max(v[1].abs())
        })
        .fold(0.0, f64::max);
    // floor: Darcy speed of a pressure difference mu across the domain
    let floor = mp.xi_inf * mp.elastic.mu / crate::concentration::diameter(space.mesh());
    let tol_sign = 1e-8 * scale.max(floor);
    let threshold = mp.k_s * mp.g_s;
    let admissible = max_div <= tol_sign && max_flux <= tol_sign && grad_norm <= smallness_ratio * threshold;
    Ok(AdmissibilityReport {
        max_div,
        max_flux_normal: max_flux,
        grad_norm,
        threshold,
        tol_sign,
        smallness_ratio,
        admissible,
    })
}

/// Growth coefficient `k_s g_s`, constant or sampled from a field.
#[derive(Debug, Clone, Copy)]
pub enum Growth<'a> {
    Constant(f64),
    Field(&'a Field),
}

impl Growth<'_> {
    fn at(&self, qp: &QuadPoint) -> f64 {
        match self {
            Growth::Constant(k) => *k,
            Growth::Field(f) => f.scalar_at(qp),
        }
    }
}

/// Solves `-eps lap phi - div(v_f phi) + k phi = k` with the natural
/// boundary condition, in the weak form
/// `eps (grad phi, grad w) + (phi, v_f . grad w) - <phi w, v_f . n> + k (phi, w) = k (1, w)`.
pub fn solve_fraction_regularized(space: &Arc<Space>, v_f: &Field, growth: Growth<'_>, eps: f64) -> Result<Field> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("eps must be positive, got {eps}")));
    }
    let form = ScalarForm {
        diffusion: Some(&|_| [[eps, 0.0], [0.0, eps]]),
        transport: Some(&|qp| {
            let v = v_f.eval(&qp.element, qp.bary);
            [v[0], v[1]]
        }),
        reaction: Some(&|qp| growth.at(qp)),
        source: Some(&|qp| growth.at(qp)),
        robin: Some(&|fp| -dot(v_f.eval(&fp.element, fp.bary), fp.normal)),
        ..Default::default()
    };
    let sys = apply_dirichlet(assemble_scalar(space, &form)?, &Constraints::new())?;
    let x = solve_constrained(&sys, &SolveOptions::with_tol(1e-12))?.x;
    Field::from_values(space.clone(), 1, x)
}

/// One step of the eps continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationStep {
    pub eps: f64,
    /// `|| phi_k - phi_{k-1} ||_L2`; NaN for the first step.
    pub cauchy: f64,
    pub min: f64,
    pub max: f64,
    /// `||grad phi|| / ((2 / (k_s g_s)) ||grad div v_f||)`.
    pub h1_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionDiagnostics {
    pub history: Vec<ContinuationStep>,
    pub admissibility: AdmissibilityReport,
    pub forced: bool,
    /// `||grad phi||_L2` of the returned iterate.
    pub grad_phi: f64,
    /// `(2 / (k_s g_s)) ||grad div v_f||_L2`.
    pub grad_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub tol: f64,
    /// Solve even if `v_f` fails the admissibility check.
    pub force: bool,
    /// Overrides the mesh-based starting value.
    pub eps0: Option<f64>,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            tol: 1e-8,
            force: false,
            eps0: None,
        }
    }
}

/// `(2 / (k_s g_s)) || grad div v_f ||_L2` on the space of `phi`.
pub fn gradient_bound(space: &Arc<Space>, v_f: &Field, mp: &MaterialParams) -> Result<f64> {
    let div = recover_divergence(v_f, space)?;
    let g = recover_gradient(&div)?;
    Ok(2.0 / (mp.k_s * mp.g_s) * g.l2_norm())
}

/// Continuation `eps_k = eps0 2^-k` from `eps0 = h |v_f|_inf + k_s g_s h^2`
/// until successive iterates differ by less than `tol` or `eps_k` drops below
/// `1e-3 h^2`.
pub fn solve_fraction(
    space: &Arc<Space>,
    v_f: &Field,
    mp: &MaterialParams,
    growth: Growth<'_>,
    opts: ContinuationOptions,
) -> Result<(Field, FractionDiagnostics)> {
    let admissibility = check_admissibility(v_f, mp)?;
    if !admissibility.admissible && !opts.force {
        return Err(Error::Inadmissible(alloc::format!("{admissibility:?}")));
    }
    let h = space.mesh().element_size();
    let vmax = v_f.max_abs();
    let eps0 = opts.eps0.unwrap_or(h * vmax + mp.k_s * mp.g_s * h * h);
    let floor = 1e-3 * h * h;
    let grad_bound = gradient_bound(space, v_f, mp)?;
    let mut history: Vec<ContinuationStep> = Vec::new();
    let mut prev: Option<Field> = None;
    let mut eps = eps0;
    loop {
        let phi = solve_fraction_regularized(space, v_f, growth, eps)?;
        let cauchy = match &prev {
            Some(p) => phi.l2_distance(p)?,
            None => f64::NAN,
        };
        let gphi = phi.h1_seminorm();
        history.push(ContinuationStep {
            eps,
            cauchy,
            min: phi.min(),
            max: phi.max(),
            h1_ratio: if grad_bound > 0.0 { gphi / grad_bound } else { f64::NAN },
        });
        let n = history.len();
        if n >= 4 {
            let c = |k: usize| history[k].cauchy;
            if c(n - 1) > c(n - 2) && c(n - 2) > c(n - 3) {
                return Err(Error::ContinuationFailure {
                    history: history.iter().map(|s| s.cauchy).collect(),
                });
            }
        }
        if cauchy < opts.tol || eps / 2.0 < floor {
            let diag = FractionDiagnostics {
                history,
                admissibility,
                forced: !admissibility.admissible,
                grad_phi: gphi,
                grad_bound,
            };
            return Ok((phi, diag));
        }
        prev = Some(phi);
        eps /= 2.0;
    }
}

/// `phi_s = 1 - phi_f`, nodewise.
pub fn solid_fraction(phi_f: &Field) -> Field {
    phi_f.map_values(|v| 1.0 - v)
}

/// Smallest elementwise mean of a scalar field.
pub fn min_element_mean(phi: &Field) -> f64 {
    let sp = phi.space();
    (0..sp.n_cells())
        .map(|c| {
            let el = sp.element(c);
            phi.eval(&el, [1.0 / 3.0; 3])[0]
        })
        .fold(f64::INFINITY, f64::min)
}

/// Height-to-length aspect of the strip bounding box.
pub fn aspect_ratio(mesh: &Mesh) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in mesh.vertices() {
        x0 = x0.min(v[0]);
        x1 = x1.max(v[0]);
        y0 = y0.min(v[1]);
        y1 = y1.max(v[1]);
    }
    (x1 - x0) / (y1 - y0)
}
