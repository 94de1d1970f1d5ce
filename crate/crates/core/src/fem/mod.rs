//! Lagrange finite elements of degree 1 and 2 on the strip triangulation.

mod assemble;
mod dirichlet;
mod field;
mod gradient;
pub mod quadrature;
mod solve;
mod space;
mod sparse;

pub use assemble::{
    assemble_elasticity, assemble_scalar, Coef, ElasticConstants, ElasticLoad, FacetCoef, ScalarForm, SparseSystem,
};
pub use dirichlet::{apply_dirichlet, ConstrainedSystem, Constraints};
pub use field::Field;
pub use gradient::{project, recover_divergence, recover_gradient};
pub use solve::{banded_lu, rcm_ordering, solve, solve_constrained, Method, Solution, SolveOptions};
pub use space::{edge_bary, Degree, Element, FacetPoint, QuadPoint, Shape, Space};
pub use sparse::CsrMatrix;
