use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::field::Field;
use super::solve::{solve, Method, SolveOptions};
use super::space::{Degree, QuadPoint, Space};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// L2 projection of a piecewise quantity onto the continuous space: lumped
/// mass for degree 1, consistent mass for degree 2 (the degree-2 vertex
/// functions integrate to zero, so lumping is singular there).
pub fn project(space: &Arc<Space>, components: usize, f: impl Fn(&QuadPoint) -> [f64; 2]) -> Result<Field> {
    let n = space.n_nodes();
    let mut rhs = vec![vec![0.0; n]; components];
    let mut lumped = vec![0.0; n];
    let consistent = space.degree() == Degree::P2;
    let mut mass = consistent.then(|| CsrMatrix::for_space(space, 1));
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        for qp in space.quad_points(cell) {
            let s = space.shape(&qp.element, qp.bary);
            let v = f(&qp);
            for (a, &na) in nodes.iter().enumerate() {
                for c in 0..components {
                    rhs[c][na] += qp.weight * v[c] * s.values[a];
                }
                lumped[na] += qp.weight * s.values[a];
                if let Some(m) = mass.as_mut() {
                    for (b, &nb) in nodes.iter().enumerate() {
                        m.add(na, nb, qp.weight * s.values[a] * s.values[b]);
                    }
                }
            }
        }
    }
    let mut values = vec![0.0; n * components];
    for c in 0..components {
        let sol: Vec<f64> = match &mass {
            Some(m) => {
                let opts = SolveOptions {
                    method: Method::Cg,
                    rel_tol: 1e-13,
                    max_iter: 5000,
                };
                solve(m, &rhs[c], &opts)?.x
            }
            None => rhs[c]
                .iter()
                .zip(&lumped)
                .map(|(r, m)| if *m > 0.0 { r / m } else { 0.0 })
                .collect(),
        };
        for (k, v) in sol.into_iter().enumerate() {
            values[k * components + c] = v;
        }
    }
    Field::from_values(space.clone(), components, values)
}

/// Continuous gradient of a scalar field, same space.
pub fn recover_gradient(u: &Field) -> Result<Field> {
    if u.components() != 1 {
        return Err(Error::InvalidInput("gradient recovery expects a scalar field".into()));
    }
    project(u.space(), 2, |qp| u.grad_at(qp)[0])
}

/// Continuous projection of the elementwise divergence of a vector field.
pub fn recover_divergence(v: &Field, space: &Arc<Space>) -> Result<Field> {
    if v.components() != 2 {
        return Err(Error::InvalidInput("divergence recovery expects a vector field".into()));
    }
    project(space, 1, |qp| [v.div_at(qp), 0.0])
}
