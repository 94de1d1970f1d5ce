use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use super::quadrature::{GAUSS_3, TRIANGLE_7};
use crate::geometry::{FacetTag, Mesh, Side};
use crate::math::{add, scale, Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn nodes_per_cell(self) -> usize {
        match self {
            Degree::P1 => 3,
            Degree::P2 => 6,
        }
    }

    pub fn order(self) -> usize {
        match self {
            Degree::P1 => 1,
            Degree::P2 => 2,
        }
    }
}

/// Continuous Lagrange space on a mesh. Nodes are the vertices followed (for
/// degree 2) by edge midpoints in edge order.
#[derive(Debug, Clone)]
pub struct Space {
    mesh: Arc<Mesh>,
    degree: Degree,
    nodes: Vec<Vec2>,
    cell_nodes: Vec<[usize; 6]>,
}

/// Affine element data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub cell: usize,
    pub vertices: [Vec2; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [Vec2; 3],
}

impl Element {
    pub fn point(&self, bary: [f64; 3]) -> Vec2 {
        let [a, b, c] = self.vertices;
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }
}

/// Values, gradients and (constant) Hessians of the local basis at one point.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub n: usize,
    pub values: [f64; 6],
    pub grads: [Vec2; 6],
}

impl Space {
    pub fn new(mesh: Arc<Mesh>, degree: Degree) -> Arc<Space> {
        let nv = mesh.vertices().len();
        let mut nodes: Vec<Vec2> = mesh.vertices().to_vec();
        if degree == Degree::P2 {
            for e in mesh.edges() {
                nodes.push(scale(0.5, add(mesh.vertices()[e[0]], mesh.vertices()[e[1]])));
            }
        }
        let cell_nodes = mesh
            .triangles()
            .iter()
            .zip(mesh.triangle_edges())
            .map(|(t, te)| match degree {
                Degree::P1 => [t[0], t[1], t[2], 0, 0, 0],
                Degree::P2 => [t[0], t[1], t[2], nv + te[0], nv + te[1], nv + te[2]],
            })
            .collect();
        Arc::new(Space {
            mesh,
            degree,
            nodes,
            cell_nodes,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn n_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        &self.cell_nodes[cell][..self.degree.nodes_per_cell()]
    }

    pub fn element(&self, cell: usize) -> Element {
        let tri = self.mesh.triangles()[cell];
        let [a, b, c] = tri.map(|v| self.mesh.vertices()[v]);
        let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
        let d = e1[0] * e2[1] - e2[0] * e1[1];
        // rows of the inverse of [e1 e2]
        let g1 = [e2[1] / d, -e2[0] / d];
        let g2 = [-e1[1] / d, e1[0] / d];
        Element {
            cell,
            vertices: [a, b, c],
            area: 0.5 * d,
            grad_lambda: [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2],
        }
    }

    pub fn shape(&self, el: &Element, bary: [f64; 3]) -> Shape {
        let gl = el.grad_lambda;
        let mut s = Shape {
            n: self.degree.nodes_per_cell(),
            values: [0.0; 6],
            grads: [[0.0; 2]; 6],
        };
        match self.degree {
            Degree::P1 => {
                for i in 0..3 {
                    s.values[i] = bary[i];
                    s.grads[i] = gl[i];
                }
            }
            Degree::P2 => {
                for i in 0..3 {
                    s.values[i] = bary[i] * (2.0 * bary[i] - 1.0);
                    s.grads[i] = scale(4.0 * bary[i] - 1.0, gl[i]);
                }
                for k in 0..3 {
                    let (a, b) = (k, (k + 1) % 3);
                    s.values[3 + k] = 4.0 * bary[a] * bary[b];
                    s.grads[3 + k] = add(scale(4.0 * bary[b], gl[a]), scale(4.0 * bary[a], gl[b]));
                }
            }
        }
        s
    }

    /// Hessians of the local basis; zero for degree 1.
    pub fn hessians(&self, el: &Element) -> [Mat2; 6] {
        let mut h = [[[0.0; 2]; 2]; 6];
        if self.degree == Degree::P1 {
            return h;
        }
        let gl = el.grad_lambda;
        let outer = |a: Vec2, b: Vec2| [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
        for i in 0..3 {
            let o = outer(gl[i], gl[i]);
            h[i] = [[4.0 * o[0][0], 4.0 * o[0][1]], [4.0 * o[1][0], 4.0 * o[1][1]]];
        }
        for k in 0..3 {
            let (a, b) = (gl[k], gl[(k + 1) % 3]);
            let (o1, o2) = (outer(a, b), outer(b, a));
            for r in 0..2 {
                for c in 0..2 {
                    h[3 + k][r][c] = 4.0 * (o1[r][c] + o2[r][c]);
                }
            }
        }
        h
    }

    /// Nodes lying on facets with `tag`, sorted and deduplicated.
    pub fn boundary_nodes(&self, tag: FacetTag) -> Vec<usize> {
        let nv = self.mesh.vertices().len();
        let mut out = Vec::new();
        for (_, f) in self.mesh.facets_with_tag(tag) {
            out.extend_from_slice(&f.vertices);
            if self.degree == Degree::P2 {
                out.push(nv + f.edge);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Local node indices (into `cell_nodes`) lying on local edge `k`.
    pub fn edge_local_nodes(&self, k: usize) -> &'static [usize] {
        const P1: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
        const P2: [[usize; 3]; 3] = [[0, 1, 3], [1, 2, 4], [2, 0, 5]];
        match self.degree {
            Degree::P1 => &P1[k],
            Degree::P2 => &P2[k],
        }
    }

    pub fn check_same(&self, other: &Space) -> Result<()> {
        if self.degree != other.degree || self.nodes.len() != other.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "incompatible spaces: {:?}/{} vs {:?}/{}",
                self.degree,
                self.nodes.len(),
                other.degree,
                other.nodes.len()
            )));
        }
        Ok(())
    }
}

/// Interior quadrature point of a cell; `weight` already includes the area.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub cell: usize,
    /// Index of the point in the triangle rule.
    pub q: usize,
    pub bary: [f64; 3],
    pub x: Vec2,
    pub weight: f64,
    pub element: Element,
}

/// Quadrature point on a boundary facet; `weight` includes the facet length.
#[derive(Debug, Clone, Copy)]
pub struct FacetPoint {
    pub facet: usize,
    /// Index of the point in the edge rule.
    pub q: usize,
    pub tag: FacetTag,
    pub side: Side,
    pub cell: usize,
    pub bary: [f64; 3],
    pub x: Vec2,
    pub normal: Vec2,
    /// Unit tangent from the first to the second facet vertex.
    pub tangent: Vec2,
    pub weight: f64,
    pub element: Element,
}

impl Space {
    pub fn quad_points(&self, cell: usize) -> [QuadPoint; 7] {
        let element = self.element(cell);
        let mut q = 0;
        TRIANGLE_7.map(|(l1, l2, w)| {
            let bary = [1.0 - l1 - l2, l1, l2];
            q += 1;
            QuadPoint {
                cell,
                q: q - 1,
                bary,
                x: element.point(bary),
                weight: w * element.area,
                element,
            }
        })
    }

    pub fn facet_points(&self, facet: usize) -> Result<[FacetPoint; 3]> {
        let f = self.mesh.facets()[facet];
        let normal = self.mesh.facet_normal(facet)?;
        let len = self.mesh.facet_length(facet);
        let (a, b) = (self.mesh.vertices()[f.vertices[0]], self.mesh.vertices()[f.vertices[1]]);
        let tangent = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let element = self.element(f.triangle);
        let mut q = 0;
        Ok(GAUSS_3.map(|(s, w)| {
            let bary = edge_bary(f.local_edge, s);
            q += 1;
            FacetPoint {
                facet,
                q: q - 1,
                tag: f.tag,
                side: f.side,
                cell: f.triangle,
                bary,
                x: element.point(bary),
                normal,
                tangent,
                weight: w * len,
                element,
            }
        }))
    }
}

/// Barycentric coordinates of the point at parameter `s` along local edge `k`.
pub fn edge_bary(k: usize, s: f64) -> [f64; 3] {
    let mut b = [0.0; 3];
    b[k] = 1.0 - s;
    b[(k + 1) % 3] = s;
    b
}
