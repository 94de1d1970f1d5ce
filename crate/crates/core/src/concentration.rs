//! Stationary substrate advection-diffusion.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_scalar, solve_constrained, Constraints, Field, ScalarForm, SolveOptions, Space,
};
use crate::geometry::{FacetTag, Mesh};
use crate::math::{dot, norm, sub, Vec2};
use crate::mechanics::{MaterialParams, MonodMode};

/// Largest vertex-to-vertex distance.
pub fn diameter(mesh: &Mesh) -> f64 {
    let v = mesh.vertices();
    let mut d: f64 = 0.0;
    // the strip is convex in x1 and bounded by its boundary vertices
    let boundary: Vec<usize> = mesh.facets().iter().map(|f| f.vertices[0]).collect();
    for &a in &boundary {
        for &b in &boundary {
            d = d.max(norm(sub(v[a], v[b])));
        }
    }
    d
}

/// `d - diam(Omega) |v_f|_inf`.
pub fn coercivity_margin(mesh: &Mesh, v_f: &Field, mp: &MaterialParams) -> f64 {
    let vmax = (0..v_f.space().n_nodes())
        .map(|k| norm(v_f.node(k)))
        .fold(0.0, f64::max);
    mp.d - diameter(mesh) * vmax
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub margin: f64,
    pub min: f64,
    /// Node position of the most negative value when `min < -1e-8 c0`.
    pub negative_at: Option<Vec2>,
    /// Relative change of each live-Monod relinearization.
    pub monod_changes: Vec<f64>,
}

pub const MONOD_PASSES: usize = 5;

/// Solves `-d lap c + div(v_f c) = -k_c g_c phi_s`, `c = c0` on `GammaMinus`,
/// `d dc/dn = 0` on `GammaPlus`, for the shifted unknown `c - c0`.
pub fn solve_concentration(
    space: &Arc<Space>,
    v_f: &Field,
    phi_s: &Field,
    mp: &MaterialParams,
) -> Result<(Field, ConcentrationReport)> {
    let margin = coercivity_margin(space.mesh(), v_f, mp);
    if !(margin > 0.0) {
        return Err(Error::NotCoercive(margin));
    }
    let c0 = mp.c0;
    let mut monod_changes = Vec::new();
    let mut c = Field::constant(space.clone(), c0);
    let passes = match mp.monod {
        MonodMode::Frozen => 1,
        MonodMode::Live => MONOD_PASSES,
    };
    for _ in 0..passes {
        let prev = c.clone();
        // uptake -k_c g phi_s, with g = c / (c + K_c) linearized around prev
        let uptake_coef = |qp: &crate::fem::QuadPoint| -> f64 {
            let phi = phi_s.scalar_at(qp);
            match mp.monod {
                MonodMode::Frozen => 0.0,
                MonodMode::Live => mp.k_c * phi / (prev.scalar_at(qp).max(0.0) + mp.monod_k_c),
            }
        };
        let form = ScalarForm {
            diffusion: Some(&|_| [[mp.d, 0.0], [0.0, mp.d]]),
            transport: Some(&|qp| {
                let v = v_f.eval(&qp.element, qp.bary);
                [-v[0], -v[1]]
            }),
            reaction: Some(&uptake_coef),
            robin: Some(&|fp| {
                if fp.tag == FacetTag::GammaPlus {
                    dot(v_f.eval(&fp.element, fp.bary), fp.normal)
                } else {
                    0.0
                }
            }),
            source: Some(&|qp| match mp.monod {
                MonodMode::Frozen => -mp.k_c * mp.g_c * phi_s.scalar_at(qp),
                MonodMode::Live => -uptake_coef(qp) * c0,
            }),
            flux_source: Some(&|qp| {
                let v = v_f.eval(&qp.element, qp.bary);
                [c0 * v[0], c0 * v[1]]
            }),
            boundary_source: Some(&|fp| {
                if fp.tag == FacetTag::GammaPlus {
                    -c0 * dot(v_f.eval(&fp.element, fp.bary), fp.normal)
                } else {
                    0.0
                }
            }),
            ..Default::default()
        };
        let bc = Constraints::scalar_on(space, FacetTag::GammaMinus, |_| 0.0)?;
        let sys = apply_dirichlet(assemble_scalar(space, &form)?, &bc)?;
        let x = solve_constrained(&sys, &SolveOptions::with_tol(1e-12))?.x;
        c = Field::from_values(space.clone(), 1, x.into_iter().map(|v| v + c0).collect())?;
        if mp.monod == MonodMode::Live {
            let change = c.l2_distance(&prev)? / c.l2_norm().max(f64::MIN_POSITIVE);
            monod_changes.push(change);
        }
    }
    let (mut min, mut at) = (f64::INFINITY, [0.0, 0.0]);
    for (k, &v) in c.values().iter().enumerate() {
        if v < min {
            min = v;
            at = space.nodes()[k];
        }
    }
    let report = ConcentrationReport {
        margin,
        min,
        negative_at: (min < -1e-8 * c0).then_some(at),
        monod_changes,
    };
    Ok((c, report))
}
