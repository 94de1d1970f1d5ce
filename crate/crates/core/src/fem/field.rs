use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::space::{Element, QuadPoint, Space};
use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};

/// Nodal coefficients of a scalar or 2-vector finite-element function.
/// Vector fields store components interleaved: `values[2 * node + i]`.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<Space>,
    components: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(space: Arc<Space>, components: usize) -> Field {
        assert!(components == 1 || components == 2, "fields are scalar or 2-vector");
        let n = space.n_nodes() * components;
        Field {
            space,
            components,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(space: Arc<Space>, components: usize, values: Vec<f64>) -> Result<Field> {
        if !(components == 1 || components == 2) || values.len() != space.n_nodes() * components {
            return Err(Error::InvalidInput(format!(
                "coefficient length {} does not match {} nodes x {} components",
                values.len(),
                space.n_nodes(),
                components
            )));
        }
        Ok(Field {
            space,
            components,
            values,
        })
    }

    pub fn constant(space: Arc<Space>, value: f64) -> Field {
        let n = space.n_nodes();
        Field {
            space,
            components: 1,
            values: vec![value; n],
        }
    }

    pub fn interpolate(space: Arc<Space>, f: impl Fn(Vec2) -> f64) -> Field {
        let values = space.nodes().iter().map(|&x| f(x)).collect();
        Field {
            space,
            components: 1,
            values,
        }
    }

    pub fn interpolate_vector(space: Arc<Space>, f: impl Fn(Vec2) -> Vec2) -> Field {
        let values = space.nodes().iter().flat_map(|&x| f(x)).collect();
        Field {
            space,
            components: 2,
            values,
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, node: usize) -> [f64; 2] {
        let c = self.components;
        if c == 1 {
            [self.values[node], 0.0]
        } else {
            [self.values[2 * node], self.values[2 * node + 1]]
        }
    }

    /// Same coefficients on another space with identical numbering, e.g. the
    /// deformed image of the mesh.
    pub fn rebind(&self, space: Arc<Space>) -> Result<Field> {
        self.space.check_same(&space)?;
        Ok(Field {
            space,
            components: self.components,
            values: self.values.clone(),
        })
    }

    /// One component of a vector field as a scalar field.
    pub fn component(&self, i: usize) -> Field {
        let values = (0..self.space.n_nodes()).map(|k| self.node(k)[i]).collect();
        Field {
            space: self.space.clone(),
            components: 1,
            values,
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            space: self.space.clone(),
            components: self.components,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + a * other` on the same space.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.space.check_same(&other.space)?;
        if self.components != other.components {
            return Err(Error::InvalidInput("component mismatch".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(Field {
            space: self.space.clone(),
            components: self.components,
            values,
        })
    }

    /// Components at barycentric point `bary` of `element`.
    pub fn eval(&self, element: &Element, bary: [f64; 3]) -> [f64; 2] {
        let s = self.space.shape(element, bary);
        let nodes = self.space.cell_nodes(element.cell);
        let mut out = [0.0; 2];
        for (k, &n) in nodes.iter().enumerate() {
            let v = self.node(n);
            out[0] += s.values[k] * v[0];
            out[1] += s.values[k] * v[1];
        }
        out
    }

    /// Gradient of each component: `g[i][j] = d u_i / d x_j`.
    pub fn grad(&self, element: &Element, bary: [f64; 3]) -> Mat2 {
        let s = self.space.shape(element, bary);
        let nodes = self.space.cell_nodes(element.cell);
        let mut g = [[0.0; 2]; 2];
        for (k, &n) in nodes.iter().enumerate() {
            let v = self.node(n);
            for i in 0..2 {
                g[i][0] += v[i] * s.grads[k][0];
                g[i][1] += v[i] * s.grads[k][1];
            }
        }
        g
    }

    /// Elementwise constant Hessian of each component.
    pub fn hessian(&self, element: &Element) -> [Mat2; 2] {
        let hs = self.space.hessians(element);
        let nodes = self.space.cell_nodes(element.cell);
        let mut out = [[[0.0; 2]; 2]; 2];
        for (k, &n) in nodes.iter().enumerate() {
            let v = self.node(n);
            for i in 0..2 {
                for r in 0..2 {
                    for c in 0..2 {
                        out[i][r][c] += v[i] * hs[k][r][c];
                    }
                }
            }
        }
        out
    }

    pub fn at(&self, qp: &QuadPoint) -> [f64; 2] {
        self.eval(&qp.element, qp.bary)
    }

    pub fn scalar_at(&self, qp: &QuadPoint) -> f64 {
        self.eval(&qp.element, qp.bary)[0]
    }

    pub fn grad_at(&self, qp: &QuadPoint) -> Mat2 {
        self.grad(&qp.element, qp.bary)
    }

    pub fn div_at(&self, qp: &QuadPoint) -> f64 {
        let g = self.grad(&qp.element, qp.bary);
        g[0][0] + g[1][1]
    }

    /// `int f(x, u(x), grad u(x)) dx` with the interior rule.
    pub fn integrate(&self, f: impl Fn(&QuadPoint, [f64; 2], Mat2) -> f64) -> f64 {
        let mut sum = 0.0;
        for cell in 0..self.space.n_cells() {
            for qp in self.space.quad_points(cell) {
                sum += qp.weight * f(&qp, self.at(&qp), self.grad_at(&qp));
            }
        }
        sum
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.integrate(|_, u, _| u[0] * u[0] + u[1] * u[1]))
    }

    /// L2 norm of the gradient (Frobenius for vector fields).
    pub fn h1_seminorm(&self) -> f64 {
        libm::sqrt(self.integrate(|_, _, g| {
            g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]
        }))
    }

    pub fn l2_error(&self, exact: impl Fn(Vec2) -> [f64; 2]) -> f64 {
        libm::sqrt(self.integrate(|qp, u, _| {
            let e = exact(qp.x);
            let (a, b) = (u[0] - e[0], if self.components == 2 { u[1] - e[1] } else { 0.0 });
            a * a + b * b
        }))
    }

    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        Ok(self.axpy(-1.0, other)?.l2_norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
