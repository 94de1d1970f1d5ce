//! Small fixed-size linear algebra used at quadrature points.

pub type Vec2 = [f64; 2];

/// Row-major 2x2 matrix, `m[i][j]` is row `i`, column `j`.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Inverse of `m` given its determinant.
#[inline]
pub fn inverse_with_det(m: &Mat2, d: f64) -> Mat2 {
    [
        [m[1][1] / d, -m[0][1] / d],
        [-m[1][0] / d, m[0][0] / d],
    ]
}

#[inline]
pub fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
pub fn mat_scale(s: f64, m: &Mat2) -> Mat2 {
    [[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]]
}

#[inline]
pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat2) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[0][0];
    let d = m[1][1];
    let b = 0.5 * (m[0][1] + m[1][0]);
    let mean = 0.5 * (a + d);
    let r = libm::sqrt(0.25 * (a - d) * (a - d) + b * b);
    (mean - r, mean + r)
}

/// Spectral norm of a general 2x2 matrix.
pub fn spectral_norm(m: &Mat2) -> f64 {
    let mtm = mat_mul(&transpose(m), m);
    libm::sqrt(sym_eigenvalues(&mtm).1.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = [[2.0, 1.0], [0.5, 3.0]];
        let inv = inverse_with_det(&m, det(&m));
        let p = mat_mul(&m, &inv);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[i][j] - IDENTITY[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_eigenvalues() {
        let (l0, l1) = sym_eigenvalues(&[[2.0, 1.0], [1.0, 2.0]]);
        assert!((l0 - 1.0).abs() < 1e-15 && (l1 - 3.0).abs() < 1e-15);
        assert!((spectral_norm(&[[0.0, 2.0], [0.0, 0.0]]) - 2.0).abs() < 1e-15);
    }
}
