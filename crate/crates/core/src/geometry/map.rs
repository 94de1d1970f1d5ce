use alloc::format;

use crate::error::{Error, Result};
use crate::math::{det, inverse_with_det, mat_mul, mat_vec, norm, sub, trace, Mat2, Vec2, IDENTITY};
use crate::profile::{SharedField, SharedProfile};

/// How the reference domain moves.
#[derive(Clone)]
pub enum Motion {
    /// `Phi(x, t) = x + t nu(x)`.
    LinearField(SharedField),
    /// `Phi(x, t) = (x1, x2 h(x1, t) / h(x1, 0))`; `h` may not drop below `floor`.
    GraphHeight { height: SharedProfile, floor: f64 },
}

impl core::fmt::Debug for Motion {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Motion::LinearField(_) => f.write_str("LinearField"),
            Motion::GraphHeight { floor, .. } => write!(f, "GraphHeight {{ floor: {floor} }}"),
        }
    }
}

/// Jacobian algebra of `Phi(., t)` at one reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianData {
    pub jacobian: Mat2,
    pub det: f64,
    pub inverse: Mat2,
    /// `d Phi / dt` at the point.
    pub map_velocity: Vec2,
    /// `d det J / dt`.
    pub det_rate: f64,
}

/// The family `Phi(., t)` on `{0 < x1 < L, 0 < x2 < h0(x1)}` for `t` in
/// `[0, t_max]`.
#[derive(Debug, Clone)]
pub struct DeformationMap {
    motion: Motion,
    length: f64,
    reference: SharedProfile,
    t_max: f64,
}

const SAMPLES: usize = 64;

impl DeformationMap {
    /// Map driven by a steady field. `h0` describes the reference domain and
    /// `horizon` caps `t_max`.
    pub fn linear_field(nu: SharedField, length: f64, h0: SharedProfile, horizon: f64) -> Result<Self> {
        Self::build(Motion::LinearField(nu), length, h0, horizon)
    }

    pub fn graph_height(height: SharedProfile, length: f64, floor: f64, horizon: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidInput(format!("h_floor must be positive, got {floor}")));
        }
        let h0 = alloc::sync::Arc::new(crate::profile::Frozen {
            inner: height.clone(),
            at: 0.0,
        });
        Self::build(Motion::GraphHeight { height, floor }, length, h0, horizon)
    }

    fn build(motion: Motion, length: f64, reference: SharedProfile, horizon: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidInput(format!("strip length must be positive, got {length}")));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!("time horizon must be finite and >= 0, got {horizon}")));
        }
        let mut map = DeformationMap {
            motion,
            length,
            reference,
            t_max: 0.0,
        };
        for i in 0..=SAMPLES {
            let x1 = length * i as f64 / SAMPLES as f64;
            let h = map.reference.value(x1, 0.0);
            if !(h > 0.0) {
                return Err(Error::InvalidInput(format!("reference height must be positive: h0({x1}) = {h}")));
            }
            if let Motion::GraphHeight { floor, .. } = map.motion {
                if h < floor {
                    return Err(Error::InvalidInput(format!("h0({x1}) = {h} lies below h_floor = {floor}")));
                }
            }
        }
        map.t_max = map.find_t_max(horizon);
        Ok(map)
    }

    fn admissible_at(&self, t: f64) -> bool {
        for i in 0..=SAMPLES {
            let x1 = self.length * i as f64 / SAMPLES as f64;
            let h0 = self.reference.value(x1, 0.0);
            if let Motion::GraphHeight { height, floor } = &self.motion {
                if !(height.value(x1, t) >= *floor) {
                    return false;
                }
                // det J = h / h0 does not depend on x2
                continue;
            }
            for j in 0..=SAMPLES {
                let x = [x1, h0 * j as f64 / SAMPLES as f64];
                if !(self.raw_jacobian(x, t).det > 0.0) {
                    return false;
                }
            }
        }
        true
    }

    fn find_t_max(&self, horizon: f64) -> f64 {
        let mut good = 0.0;
        let mut bad = None;
        for k in 1..=SAMPLES {
            let t = horizon * k as f64 / SAMPLES as f64;
            if self.admissible_at(t) {
                good = t;
            } else {
                bad = Some(t);
                break;
            }
        }
        let Some(mut bad) = bad else { return horizon };
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if self.admissible_at(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    }

    pub fn motion(&self) -> &Motion {
        &self.motion
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Reference height `h0(x1)`.
    pub fn reference_height(&self, x1: f64) -> f64 {
        self.reference.value(x1, 0.0)
    }

    pub fn reference_profile(&self) -> &SharedProfile {
        &self.reference
    }

    /// Largest admissible time, computed at construction.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn position(&self, x: Vec2, t: f64) -> Result<Vec2> {
        match &self.motion {
            Motion::LinearField(nu) => {
                let v = nu.value(x);
                Ok([x[0] + t * v[0], x[1] + t * v[1]])
            }
            Motion::GraphHeight { height, .. } => {
                let r = height.value(x[0], t) / self.reference.value(x[0], 0.0);
                Ok([x[0], x[1] * r])
            }
        }
    }

    fn raw_jacobian(&self, x: Vec2, t: f64) -> JacobianData {
        match &self.motion {
            Motion::LinearField(nu) => {
                let g = nu.gradient(x);
                let jac = [[1.0 + t * g[0][0], t * g[0][1]], [t * g[1][0], 1.0 + t * g[1][1]]];
                let d = det(&jac);
                let inverse = if d != 0.0 { inverse_with_det(&jac, d) } else { IDENTITY };
                let det_rate = d * trace(&mat_mul(&inverse, &g));
                JacobianData {
                    jacobian: jac,
                    det: d,
                    inverse,
                    map_velocity: nu.value(x),
                    det_rate,
                }
            }
            Motion::GraphHeight { height, .. } => {
                let h = height.jet(x[0], t);
                let h0 = self.reference.jet(x[0], 0.0);
                let r = h.value / h0.value;
                let r_x = (h.d_x * h0.value - h.value * h0.d_x) / (h0.value * h0.value);
                let jac = [[1.0, 0.0], [x[1] * r_x, r]];
                let inverse = [[1.0, 0.0], [-x[1] * r_x / r, 1.0 / r]];
                JacobianData {
                    jacobian: jac,
                    det: r,
                    inverse,
                    map_velocity: [0.0, x[1] * h.d_t / h0.value],
                    det_rate: h.d_t / h0.value,
                }
            }
        }
    }

    /// Jacobian data of `Phi(., t)` at reference point `x`.
    pub fn jacobian_at(&self, x: Vec2, t: f64) -> Result<JacobianData> {
        let jd = self.raw_jacobian(x, t);
        if !(jd.det > 0.0) {
            return Err(Error::DegenerateDeformation { point: x, t, det: jd.det });
        }
        Ok(jd)
    }

    /// Reference gradient of the map velocity, `grad_X (d Phi / dt)`.
    pub fn velocity_reference_gradient(&self, x: Vec2, t: f64) -> Mat2 {
        match &self.motion {
            Motion::LinearField(nu) => nu.gradient(x),
            Motion::GraphHeight { height, .. } => {
                let h = height.jet(x[0], t);
                let h0 = self.reference.jet(x[0], 0.0);
                let q = h.d_t / h0.value;
                let q_x = (h.d_xt * h0.value - h.d_t * h0.d_x) / (h0.value * h0.value);
                [[0.0, 0.0], [x[1] * q_x, q]]
            }
        }
    }

    /// Eulerian boundary velocity and its spatial gradient on `Omega^t`, both
    /// evaluated at the image of reference point `x`.
    pub fn eulerian_velocity(&self, x: Vec2, t: f64) -> Result<(Vec2, Mat2)> {
        let jd = self.jacobian_at(x, t)?;
        let g = mat_mul(&self.velocity_reference_gradient(x, t), &jd.inverse);
        Ok((jd.map_velocity, g))
    }

    /// Reference preimage of a current point.
    pub fn inverse(&self, y: Vec2, t: f64) -> Result<Vec2> {
        match &self.motion {
            Motion::GraphHeight { height, .. } => {
                let r = height.value(y[0], t) / self.reference.value(y[0], 0.0);
                Ok([y[0], y[1] / r])
            }
            Motion::LinearField(_) => {
                let mut x = y;
                for _ in 0..50 {
                    let res = sub(self.position(x, t)?, y);
                    if norm(res) <= 1e-14 * (1.0 + norm(y)) {
                        return Ok(x);
                    }
                    let jd = self.jacobian_at(x, t)?;
                    let dx = mat_vec(&jd.inverse, res);
                    x = sub(x, dx);
                }
                Err(Error::DegenerateDeformation {
                    point: y,
                    t,
                    det: self.raw_jacobian(x, t).det,
                })
            }
        }
    }

    /// Current height `h(x1, t)` and slope of the moving top in graph mode.
    pub fn top_jet(&self, x1: f64, t: f64) -> Option<crate::profile::Jet> {
        match &self.motion {
            Motion::GraphHeight { height, .. } => Some(height.jet(x1, t)),
            Motion::LinearField(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use alloc::sync::Arc;

    use super::*;
    use crate::profile::{AffineField, Constant, UniformGrowth};

    fn stretch() -> DeformationMap {
        let nu = AffineField {
            offset: [0.0, 0.0],
            gradient: [[0.0, 0.0], [0.0, 1.0]],
        };
        DeformationMap::linear_field(Arc::new(nu), 1.0, Arc::new(Constant(1.0)), 1.0).unwrap()
    }

    #[test]
    fn identity_field() {
        let m = DeformationMap::linear_field(Arc::new(AffineField::zero()), 1.0, Arc::new(Constant(1.0)), 3.0)
            .unwrap();
        let jd = m.jacobian_at([0.3, 0.7], 2.0).unwrap();
        assert_eq!(jd.jacobian, IDENTITY);
        assert_eq!(jd.det, 1.0);
        assert_eq!(jd.map_velocity, [0.0, 0.0]);
        assert_eq!(m.t_max(), 3.0);
    }

    #[test]
    fn vertical_stretch() {
        let jd = stretch().jacobian_at([0.2, 0.4], 0.5).unwrap();
        assert_eq!(jd.jacobian, [[1.0, 0.0], [0.0, 1.5]]);
        assert_eq!(jd.det, 1.5);
        assert!((jd.inverse[1][1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn t_max_bisected() {
        // det = 1 - t, so t_max approaches 1
        let nu = AffineField {
            offset: [0.0, 0.0],
            gradient: [[-1.0, 0.0], [0.0, 0.0]],
        };
        let m = DeformationMap::linear_field(Arc::new(nu), 1.0, Arc::new(Constant(1.0)), 4.0).unwrap();
        assert!(m.t_max() < 1.0 && m.t_max() > 1.0 - 1e-12);
        assert!(matches!(m.jacobian_at([0.5, 0.5], 1.5), Err(Error::DegenerateDeformation { .. })));
    }

    #[test]
    fn graph_floor_limits_t_max() {
        let h = UniformGrowth { base: 1.0, growth: -1.0 };
        let m = DeformationMap::graph_height(Arc::new(h), 1.0, 0.25, 2.0).unwrap();
        assert!((m.t_max() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let nu = AffineField {
            offset: [0.1, 0.0],
            gradient: [[0.2, 0.1], [-0.1, 0.3]],
        };
        let m = DeformationMap::linear_field(Arc::new(nu), 1.0, Arc::new(Constant(1.0)), 1.0).unwrap();
        let x = [0.3, 0.8];
        let y = m.position(x, 0.7).unwrap();
        let back = m.inverse(y, 0.7).unwrap();
        assert!(norm(sub(back, x)) < 1e-13);
    }
}
