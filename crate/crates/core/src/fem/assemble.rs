use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::sparse::CsrMatrix;
use super::space::{FacetPoint, QuadPoint, Space};
use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};

/// Coefficient evaluated at interior quadrature points.
pub type Coef<'a, T> = &'a dyn Fn(&QuadPoint) -> T;
/// Coefficient evaluated at boundary quadrature points. Boundary terms run
/// over every facet; the closure returns zero where a term does not apply.
pub type FacetCoef<'a, T> = &'a dyn Fn(&FacetPoint) -> T;

/// Assembled matrix and load vector.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// First quadrature point where a diffusion sample was not positive
    /// definite, if any.
    pub indefinite_at: Option<Vec2>,
}

/// Terms of a scalar bilinear form `a(u, w)` and load `l(w)`.
#[derive(Default, Clone, Copy)]
pub struct ScalarForm<'a> {
    /// `int grad(w)^T A grad(u)`
    pub diffusion: Option<Coef<'a, Mat2>>,
    /// `int (b . grad u) w`
    pub convection: Option<Coef<'a, Vec2>>,
    /// `int u (b . grad w)`
    pub transport: Option<Coef<'a, Vec2>>,
    /// `int c u w`
    pub reaction: Option<Coef<'a, f64>>,
    /// `int beta u w` on the boundary
    pub robin: Option<FacetCoef<'a, f64>>,
    /// `int f w`
    pub source: Option<Coef<'a, f64>>,
    /// `int F . grad w`
    pub flux_source: Option<Coef<'a, Vec2>>,
    /// `int g w` on the boundary
    pub boundary_source: Option<FacetCoef<'a, f64>>,
}

pub fn assemble_scalar(space: &Space, form: &ScalarForm<'_>) -> Result<SparseSystem> {
    let mut matrix = CsrMatrix::for_space(space, 1);
    let mut rhs = vec![0.0; space.n_nodes()];
    let mut indefinite = None;
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let n = nodes.len();
        let mut ke = [[0.0; 6]; 6];
        let mut fe = [0.0; 6];
        for qp in space.quad_points(cell) {
            let s = space.shape(&qp.element, qp.bary);
            let w = qp.weight;
            if let Some(a) = form.diffusion {
                let a = a(&qp);
                if a[0][0] <= 0.0 || a[0][0] * a[1][1] - a[0][1] * a[1][0] <= 0.0 {
                    indefinite.get_or_insert(qp.x);
                }
                for i in 0..n {
                    let gi = s.grads[i];
                    for j in 0..n {
                        let gj = s.grads[j];
                        let agj = [a[0][0] * gj[0] + a[0][1] * gj[1], a[1][0] * gj[0] + a[1][1] * gj[1]];
                        ke[i][j] += w * (gi[0] * agj[0] + gi[1] * agj[1]);
                    }
                }
            }
            if let Some(b) = form.convection {
                let b = b(&qp);
                for i in 0..n {
                    for j in 0..n {
                        ke[i][j] += w * (b[0] * s.grads[j][0] + b[1] * s.grads[j][1]) * s.values[i];
                    }
                }
            }
            if let Some(b) = form.transport {
                let b = b(&qp);
                for i in 0..n {
                    let bg = b[0] * s.grads[i][0] + b[1] * s.grads[i][1];
                    for j in 0..n {
                        ke[i][j] += w * s.values[j] * bg;
                    }
                }
            }
            if let Some(c) = form.reaction {
                let c = c(&qp);
                for i in 0..n {
                    for j in 0..n {
                        ke[i][j] += w * c * s.values[i] * s.values[j];
                    }
                }
            }
            if let Some(f) = form.source {
                let f = f(&qp);
                for i in 0..n {
                    fe[i] += w * f * s.values[i];
                }
            }
            if let Some(f) = form.flux_source {
                let f = f(&qp);
                for i in 0..n {
                    fe[i] += w * (f[0] * s.grads[i][0] + f[1] * s.grads[i][1]);
                }
            }
        }
        for i in 0..n {
            rhs[nodes[i]] += fe[i];
            for j in 0..n {
                matrix.add(nodes[i], nodes[j], ke[i][j]);
            }
        }
    }
    if form.robin.is_some() || form.boundary_source.is_some() {
        for facet in 0..space.mesh().facets().len() {
            let nodes = space.cell_nodes(space.mesh().facets()[facet].triangle);
            for fp in space.facet_points(facet)? {
                let s = space.shape(&fp.element, fp.bary);
                if let Some(beta) = form.robin {
                    let beta = beta(&fp);
                    if beta != 0.0 {
                        for i in 0..s.n {
                            for j in 0..s.n {
                                matrix.add(nodes[i], nodes[j], fp.weight * beta * s.values[i] * s.values[j]);
                            }
                        }
                    }
                }
                if let Some(g) = form.boundary_source {
                    let g = g(&fp);
                    for i in 0..s.n {
                        rhs[nodes[i]] += fp.weight * g * s.values[i];
                    }
                }
            }
        }
    }
    Ok(SparseSystem {
        matrix,
        rhs,
        indefinite_at: indefinite,
    })
}

/// Isotropic Lame constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticConstants {
    pub lambda: f64,
    pub mu: f64,
}

impl ElasticConstants {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("need mu > 0 and lambda >= 0, got mu = {mu}, lambda = {lambda}")));
        }
        Ok(ElasticConstants { lambda, mu })
    }

    /// `lambda tr(eps) I + 2 mu eps` for the displacement gradient `g`.
    pub fn stress(&self, g: &Mat2) -> Mat2 {
        let tr = g[0][0] + g[1][1];
        let s = g[0][1] + g[1][0];
        [
            [self.lambda * tr + 2.0 * self.mu * g[0][0], self.mu * s],
            [self.mu * s, self.lambda * tr + 2.0 * self.mu * g[1][1]],
        ]
    }
}

/// Right-hand side terms of the elasticity problem.
#[derive(Default, Clone, Copy)]
pub struct ElasticLoad<'a> {
    /// `int f . w`
    pub body: Option<Coef<'a, Vec2>>,
    /// `int q div w`
    pub pressure: Option<Coef<'a, f64>>,
    /// `int S : grad w`
    pub stress: Option<Coef<'a, Mat2>>,
    /// `int t . w` on the boundary
    pub traction: Option<FacetCoef<'a, Vec2>>,
    /// `int F . dw/dtau` on the boundary, `tau` the facet tangent
    pub traction_flux: Option<FacetCoef<'a, Vec2>>,
    /// Concentrated loads at mesh vertices, indexed by vertex
    pub point_loads: Option<&'a [Vec2]>,
}

/// Stiffness of `int sigma(u) : grad w` plus the load, on interleaved 2-vector dofs.
pub fn assemble_elasticity(space: &Space, ec: ElasticConstants, load: &ElasticLoad<'_>) -> Result<SparseSystem> {
    let mut matrix = CsrMatrix::for_space(space, 2);
    let mut rhs = vec![0.0; 2 * space.n_nodes()];
    let (lam, mu) = (ec.lambda, ec.mu);
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let n = nodes.len();
        let mut ke = [[0.0; 12]; 12];
        let mut fe = [0.0; 12];
        for qp in space.quad_points(cell) {
            let s = space.shape(&qp.element, qp.bary);
            let w = qp.weight;
            for a in 0..n {
                let ga = s.grads[a];
                for b in 0..n {
                    let gb = s.grads[b];
                    let dot = ga[0] * gb[0] + ga[1] * gb[1];
                    for i in 0..2 {
                        for j in 0..2 {
                            let delta = if i == j { dot } else { 0.0 };
                            ke[2 * a + i][2 * b + j] += w * (lam * ga[i] * gb[j] + mu * (delta + ga[j] * gb[i]));
                        }
                    }
                }
            }
            let body = load.body.map(|f| f(&qp));
            let q = load.pressure.map(|f| f(&qp));
            let st = load.stress.map(|f| f(&qp));
            for a in 0..n {
                let (v, g) = (s.values[a], s.grads[a]);
                for i in 0..2 {
                    let mut acc = 0.0;
                    if let Some(f) = body {
                        acc += f[i] * v;
                    }
                    if let Some(q) = q {
                        acc += q * g[i];
                    }
                    if let Some(st) = st {
                        acc += st[i][0] * g[0] + st[i][1] * g[1];
                    }
                    fe[2 * a + i] += w * acc;
                }
            }
        }
        for a in 0..n {
            for i in 0..2 {
                let r = 2 * nodes[a] + i;
                rhs[r] += fe[2 * a + i];
                for b in 0..n {
                    for j in 0..2 {
                        matrix.add(r, 2 * nodes[b] + j, ke[2 * a + i][2 * b + j]);
                    }
                }
            }
        }
    }
    if load.traction.is_some() || load.traction_flux.is_some() {
        for facet in 0..space.mesh().facets().len() {
            let nodes = space.cell_nodes(space.mesh().facets()[facet].triangle);
            for fp in space.facet_points(facet)? {
                let tr = load.traction.map_or([0.0, 0.0], |t| t(&fp));
                let fl = load.traction_flux.map_or([0.0, 0.0], |t| t(&fp));
                if tr == [0.0, 0.0] && fl == [0.0, 0.0] {
                    continue;
                }
                let s = space.shape(&fp.element, fp.bary);
                for a in 0..s.n {
                    let dt = s.grads[a][0] * fp.tangent[0] + s.grads[a][1] * fp.tangent[1];
                    for i in 0..2 {
                        rhs[2 * nodes[a] + i] += fp.weight * (tr[i] * s.values[a] + fl[i] * dt);
                    }
                }
            }
        }
    }
    if let Some(points) = load.point_loads {
        for (v, f) in points.iter().enumerate() {
            rhs[2 * v] += f[0];
            rhs[2 * v + 1] += f[1];
        }
    }
    Ok(SparseSystem {
        matrix,
        rhs,
        indefinite_at: None,
    })
}
