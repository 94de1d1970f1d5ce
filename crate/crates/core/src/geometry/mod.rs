//! The moving domain: strip meshes with tagged boundaries and the deformation
//! family that carries the reference mesh to the current configuration.

mod map;
mod mesh;

pub use map::{DeformationMap, JacobianData, Motion};
pub use mesh::{build_strip_mesh, build_strip_mesh_with, Facet, FacetTag, Mesh, Side, StripOptions};

use crate::error::Result;
use crate::math::{dot, mat_vec, norm, transpose, Vec2};

/// Ratio `dS_t / dS_0` of surface elements at a reference boundary point with
/// reference unit normal `n`: `det J * |J^{-T} n|`.
pub fn surface_dilation(map: &DeformationMap, x: Vec2, n: Vec2, t: f64) -> Result<f64> {
    let jd = map.jacobian_at(x, t)?;
    let m = mat_vec(&transpose(&jd.inverse), n);
    Ok(jd.det * norm(m))
}

/// Tangential divergence `div nu - n^T grad(nu) n`.
pub fn tangential_divergence(grad: &crate::math::Mat2, n: Vec2) -> f64 {
    let gn = mat_vec(grad, n);
    grad[0][0] + grad[1][1] - dot(n, gn)
}

/// Image of the reference mesh under `Phi(., t)`. Connectivity and tags are
/// unchanged; the mapping is always taken from `reference`.
pub fn deform_mesh(reference: &Mesh, map: &DeformationMap, t: f64) -> Result<Mesh> {
    let mut out = reference.clone();
    for (dst, &x) in out.vertices_mut().iter_mut().zip(reference.vertices()) {
        *dst = map.position(x, t)?;
    }
    out.check_orientation(t)?;
    out.refresh_size();
    Ok(out)
}

/// Outward unit normal of a boundary facet.
pub fn boundary_normal(mesh: &Mesh, facet: usize) -> Result<Vec2> {
    mesh.facet_normal(facet)
}
