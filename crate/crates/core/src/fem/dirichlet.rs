use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::assemble::SparseSystem;
use super::sparse::CsrMatrix;
use super::space::Space;
use crate::error::{Error, Result};
use crate::geometry::FacetTag;
use crate::math::Vec2;

/// Prescribed dof values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prescribes `dof`; a second, different value for the same dof is rejected.
    pub fn set(&mut self, dof: usize, value: f64) -> Result<()> {
        if let Some(&old) = self.values.get(&dof) {
            if (old - value).abs() > 1e-12 * (1.0 + old.abs() + value.abs()) {
                return Err(Error::ConflictingConstraint {
                    dof,
                    first: old,
                    second: value,
                });
            }
            return Ok(());
        }
        self.values.insert(dof, value);
        Ok(())
    }

    /// Prescribes every component of every node on `tag`.
    pub fn add_tag(
        &mut self,
        space: &Space,
        tag: FacetTag,
        components: usize,
        value: impl Fn(Vec2) -> [f64; 2],
    ) -> Result<()> {
        for node in space.boundary_nodes(tag) {
            let v = value(space.nodes()[node]);
            for c in 0..components {
                self.set(components * node + c, v[c])?;
            }
        }
        Ok(())
    }

    /// Shorthand for a scalar value on one tag.
    pub fn scalar_on(space: &Space, tag: FacetTag, value: impl Fn(Vec2) -> f64) -> Result<Self> {
        let mut c = Self::new();
        c.add_tag(space, tag, 1, |x| [value(x), 0.0])?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }
}

/// System after symmetric elimination, keeping the assembled original.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub original: SparseSystem,
    pub constraints: Constraints,
}

impl ConstrainedSystem {
    /// `|| (K x - F)_free || / || F_free ||`, measured on the original system.
    pub fn free_residual(&self, x: &[f64]) -> f64 {
        let kx = self.original.matrix.apply(x);
        let (mut r, mut f) = (0.0, 0.0);
        for i in 0..x.len() {
            if self.constraints.get(i).is_none() {
                let d = kx[i] - self.original.rhs[i];
                r += d * d;
                f += self.original.rhs[i] * self.original.rhs[i];
            }
        }
        
        if f > 0.0 {
            libm::sqrt(r / f)
        } else {
            libm::sqrt(r)
        }
    }

    pub fn is_free(&self, dof: usize) -> bool {
        self.constraints.get(dof).is_none()
    }
}

/// Moves constrained columns to the right-hand side and replaces constrained
/// rows by identity rows.
pub fn apply_dirichlet(system: SparseSystem, constraints: &Constraints) -> Result<ConstrainedSystem> {
    let n = system.matrix.n();
    if let Some((dof, _)) = constraints.iter().find(|&(d, _)| d >= n) {
        return Err(Error::InvalidInput(format!("constrained dof {dof} outside system of size {n}")));
    }
    let mut matrix = system.matrix.clone();
    let mut rhs = system.rhs.clone();
    for i in 0..n {
        if let Some(g) = constraints.get(i) {
            let (cols, vals) = matrix.row_mut(i);
            for (&j, v) in cols.iter().zip(vals.iter_mut()) {
                *v = if j == i { 1.0 } else { 0.0 };
            }
            rhs[i] = g;
        } else {
            let (cols, vals) = matrix.row_mut(i);
            for (&j, v) in cols.iter().zip(vals.iter_mut()) {
                if let Some(g) = constraints.get(j) {
                    rhs[i] -= *v * g;
                    *v = 0.0;
                }
            }
        }
    }
    Ok(ConstrainedSystem {
        matrix,
        rhs,
        original: system,
        constraints: constraints.clone(),
    })
}
