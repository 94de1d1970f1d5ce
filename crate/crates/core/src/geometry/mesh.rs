use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{dot, norm, sub, Vec2};
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetTag {
    /// Fixed part of the boundary (substratum and, by default, the lateral walls).
    GammaMinus,
    /// Moving upper boundary.
    GammaPlus,
}

/// Which side of the logical rectangle a facet sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    /// Endpoints, oriented counterclockwise around the domain.
    pub vertices: [usize; 2],
    pub tag: FacetTag,
    pub side: Side,
    pub edge: usize,
    pub triangle: usize,
    /// Local edge index inside `triangle` (0: v0-v1, 1: v1-v2, 2: v2-v0).
    pub local_edge: usize,
}

/// Conforming triangulation with tagged boundary facets.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    facets: Vec<Facet>,
    grid: (usize, usize),
    h_mesh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripOptions {
    /// Tag of the lateral walls `x1 = 0` and `x1 = L`.
    pub lateral: FacetTag,
}

impl Default for StripOptions {
    fn default() -> Self {
        StripOptions {
            lateral: FacetTag::GammaMinus,
        }
    }
}

/// Structured triangulation of `{0 < x1 < L, 0 < x2 < h0(x1)}` with clamped
/// lateral walls.
pub fn build_strip_mesh(length: f64, h0: &dyn Profile, nx: usize, ny: usize) -> Result<Mesh> {
    build_strip_mesh_with(length, h0, nx, ny, StripOptions::default())
}

pub fn build_strip_mesh_with(
    length: f64,
    h0: &dyn Profile,
    nx: usize,
    ny: usize,
    options: StripOptions,
) -> Result<Mesh> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidInput(format!("strip length must be positive, got {length}")));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!("need nx, ny >= 2, got {nx} x {ny}")));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut heights = Vec::with_capacity(nx + 1);
    for i in 0..=nx {
        let x1 = length * i as f64 / nx as f64;
        let h = h0.value(x1, 0.0);
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!("height profile must be positive: h0({x1}) = {h}")));
        }
        heights.push(h);
    }
    for j in 0..=ny {
        for (i, &h) in heights.iter().enumerate() {
            let x1 = length * i as f64 / nx as f64;
            vertices.push([x1, h * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary = Vec::new();
    for i in 0..nx {
        boundary.push(([idx(i, 0), idx(i + 1, 0)], Side::Bottom));
    }
    for j in 0..ny {
        boundary.push(([idx(nx, j), idx(nx, j + 1)], Side::Right));
    }
    for i in (0..nx).rev() {
        boundary.push(([idx(i + 1, ny), idx(i, ny)], Side::Top));
    }
    for j in (0..ny).rev() {
        boundary.push(([idx(0, j + 1), idx(0, j)], Side::Left));
    }
    let tag_of = |side: Side| match side {
        Side::Bottom => FacetTag::GammaMinus,
        Side::Top => FacetTag::GammaPlus,
        Side::Left | Side::Right => options.lateral,
    };
    let mut mesh = Mesh::from_parts(vertices, triangles, (nx, ny));
    mesh.facets = boundary
        .into_iter()
        .map(|(v, side)| mesh.make_facet(v, tag_of(side), side))
        .collect::<Result<Vec<_>>>()?;
    mesh.check_orientation(0.0)?;
    Ok(mesh)
}

impl Mesh {
    fn from_parts(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>, grid: (usize, usize)) -> Mesh {
        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut te = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                te[k] = id;
            }
            triangle_edges.push(te);
        }
        let mut mesh = Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            facets: Vec::new(),
            grid,
            h_mesh: 0.0,
        };
        mesh.refresh_size();
        mesh
    }

    fn make_facet(&self, v: [usize; 2], tag: FacetTag, side: Side) -> Result<Facet> {
        let key = [v[0].min(v[1]), v[0].max(v[1])];
        for (t, te) in self.triangle_edges.iter().enumerate() {
            for (k, &e) in te.iter().enumerate() {
                if self.edges[e] == key {
                    return Ok(Facet {
                        vertices: v,
                        tag,
                        side,
                        edge: e,
                        triangle: t,
                        local_edge: k,
                    });
                }
            }
        }
        Err(Error::DegenerateMesh(format!("boundary edge {v:?} is not a triangle edge")))
    }

    pub(crate) fn refresh_size(&mut self) {
        self.h_mesh = self
            .edges
            .iter()
            .map(|e| norm(sub(self.vertices[e[1]], self.vertices[e[0]])))
            .fold(0.0, f64::max);
    }

    pub(crate) fn vertices_mut(&mut self) -> &mut [Vec2] {
        &mut self.vertices
    }

    pub(crate) fn check_orientation(&self, t: f64) -> Result<()> {
        for tri in &self.triangles {
            let a = self.signed_area(tri);
            if !(a > 0.0) {
                return Err(Error::DegenerateDeformation {
                    point: self.vertices[tri[0]],
                    t,
                    det: a,
                });
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Cells per direction of the logical grid.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    /// Vertex index of logical grid point `(i, j)`.
    pub fn grid_vertex(&self, i: usize, j: usize) -> usize {
        j * (self.grid.0 + 1) + i
    }

    /// Largest edge length.
    pub fn element_size(&self) -> f64 {
        self.h_mesh
    }

    pub fn signed_area(&self, tri: &[usize; 3]) -> f64 {
        let [a, b, c] = tri.map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, tri: usize) -> Vec2 {
        let [a, b, c] = self.triangles[tri].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Smallest inradius / circumradius ratio over all triangles.
    pub fn min_quality(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|v| self.vertices[v]);
                let (la, lb, lc) = (norm(sub(b, c)), norm(sub(c, a)), norm(sub(a, b)));
                let area = self.signed_area(tri);
                let inradius = 2.0 * area / (la + lb + lc);
                let circumradius = la * lb * lc / (4.0 * area);
                inradius / circumradius
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn facet_length(&self, facet: usize) -> f64 {
        let f = &self.facets[facet];
        norm(sub(self.vertices[f.vertices[1]], self.vertices[f.vertices[0]]))
    }

    /// Outward unit normal; orientation is fixed by the adjacent centroid.
    pub fn facet_normal(&self, facet: usize) -> Result<Vec2> {
        let f = self
            .facets
            .get(facet)
            .ok_or_else(|| Error::InvalidInput(format!("facet {facet} out of range")))?;
        let (a, b) = (self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]);
        let d = sub(b, a);
        let len = norm(d);
        if !(len > 0.0) {
            return Err(Error::DegenerateMesh(format!("facet {facet} has zero length")));
        }
        let mut n = [d[1] / len, -d[0] / len];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        if dot(n, sub(mid, self.centroid(f.triangle))) < 0.0 {
            n = [-n[0], -n[1]];
        }
        Ok(n)
    }

    pub fn facets_with_tag(&self, tag: FacetTag) -> impl Iterator<Item = (usize, &Facet)> + '_ {
        self.facets.iter().enumerate().filter(move |(_, f)| f.tag == tag)
    }

    /// Every boundary vertex belongs to exactly two facets and every facet is
    /// an edge with a single adjacent triangle.
    pub fn is_watertight(&self) -> bool {
        let mut edge_count = vec![0u8; self.edges.len()];
        for te in &self.triangle_edges {
            for &e in te {
                edge_count[e] += 1;
            }
        }
        let mut in_facets = vec![false; self.edges.len()];
        for f in &self.facets {
            if edge_count[f.edge] != 1 || in_facets[f.edge] {
                return false;
            }
            in_facets[f.edge] = true;
        }
        if edge_count
            .iter()
            .zip(&in_facets)
            .any(|(&c, &b)| (c == 1) != b)
        {
            return false;
        }
        let mut degree = vec![0u8; self.vertices.len()];
        let mut next = vec![usize::MAX; self.vertices.len()];
        for f in &self.facets {
            degree[f.vertices[0]] += 1;
            degree[f.vertices[1]] += 1;
            next[f.vertices[0]] = f.vertices[1];
        }
        if degree.iter().any(|&d| d != 0 && d != 2) {
            return false;
        }
        // a single closed loop
        let Some(start) = self.facets.first().map(|f| f.vertices[0]) else {
            return false;
        };
        let mut v = start;
        for _ in 0..self.facets.len() {
            v = next[v];
            if v == usize::MAX {
                return false;
            }
        }
        v == start
    }
}
