//! Analytic data that the solvers differentiate exactly: height profiles
//! `h(x1, t)`, exterior signals `p(t)` and steady velocity fields `nu(x)`.
//!
//! Derivatives are always supplied by the data source. Nothing in the crate
//! differences user input numerically.

use alloc::sync::Arc;

use crate::math::{Mat2, Vec2};

/// Value and partial derivatives of a scalar function of `(x1, t)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d_x: f64,
    pub d_t: f64,
    pub d_xx: f64,
    pub d_xt: f64,
}

/// Scalar function of the horizontal coordinate and time.
pub trait Profile: Send + Sync {
    fn jet(&self, x1: f64, t: f64) -> Jet;

    fn value(&self, x1: f64, t: f64) -> f64 {
        self.jet(x1, t).value
    }
}

/// Scalar function of time only, with its rate.
pub trait Signal: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn rate(&self, t: f64) -> f64;
}

/// Steady 2-vector field with its gradient, `gradient[i][j] = d nu_i / d x_j`.
pub trait VelocityField: Send + Sync {
    fn value(&self, x: Vec2) -> Vec2;
    fn gradient(&self, x: Vec2) -> Mat2;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Profile for Constant {
    fn jet(&self, _x1: f64, _t: f64) -> Jet {
        Jet {
            value: self.0,
            ..Jet::default()
        }
    }
}

impl Signal for Constant {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn rate(&self, _t: f64) -> f64 {
        0.0
    }
}

/// `value + slope * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub value: f64,
    pub slope: f64,
}

impl Signal for Ramp {
    fn value(&self, t: f64) -> f64 {
        self.value + self.slope * t
    }
    fn rate(&self, _t: f64) -> f64 {
        self.slope
    }
}

/// `h(x1, t) = base * (1 + growth * t)`, a uniformly rising flat film.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrowth {
    pub base: f64,
    pub growth: f64,
}

impl Profile for UniformGrowth {
    fn jet(&self, _x1: f64, t: f64) -> Jet {
        Jet {
            value: self.base * (1.0 + self.growth * t),
            d_t: self.base * self.growth,
            ..Jet::default()
        }
    }
}

/// `h(x1, t) = base + amplitude * t * sin(pi x1 / length)`: a bump that grows
/// in the middle of the strip while the lateral walls stay put.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineBump {
    pub base: f64,
    pub amplitude: f64,
    pub length: f64,
}

impl Profile for SineBump {
    fn jet(&self, x1: f64, t: f64) -> Jet {
        let k = core::f64::consts::PI / self.length;
        let (s, c) = libm::sincos(k * x1);
        let a = self.amplitude;
        Jet {
            value: self.base + a * t * s,
            d_x: a * t * k * c,
            d_t: a * s,
            d_xx: -a * t * k * k * s,
            d_xt: a * k * c,
        }
    }
}

/// `h(x1, t) = base + slope * x1` held fixed in time (a wedge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub base: f64,
    pub slope: f64,
}

impl Profile for Wedge {
    fn jet(&self, x1: f64, _t: f64) -> Jet {
        Jet {
            value: self.base + self.slope * x1,
            d_x: self.slope,
            ..Jet::default()
        }
    }
}

/// Affine velocity field `nu(x) = offset + gradient * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineField {
    pub offset: Vec2,
    pub gradient: Mat2,
}

impl AffineField {
    pub fn zero() -> Self {
        AffineField {
            offset: [0.0; 2],
            gradient: [[0.0; 2]; 2],
        }
    }
}

impl VelocityField for AffineField {
    fn value(&self, x: Vec2) -> Vec2 {
        let g = &self.gradient;
        [
            self.offset[0] + g[0][0] * x[0] + g[0][1] * x[1],
            self.offset[1] + g[1][0] * x[0] + g[1][1] * x[1],
        ]
    }
    fn gradient(&self, _x: Vec2) -> Mat2 {
        self.gradient
    }
}

/// Profile given by a closure returning the full jet.
pub struct JetFn<F>(pub F);

impl<F> Profile for JetFn<F>
where
    F: Fn(f64, f64) -> Jet + Send + Sync,
{
    fn jet(&self, x1: f64, t: f64) -> Jet {
        (self.0)(x1, t)
    }
}

/// Shared profile handle.
pub type SharedProfile = Arc<dyn Profile>;
pub type SharedSignal = Arc<dyn Signal>;
pub type SharedField = Arc<dyn VelocityField>;

/// The `t = 0` slice of a time-dependent profile.
pub struct Frozen {
    pub inner: SharedProfile,
    pub at: f64,
}

impl Profile for Frozen {
    fn jet(&self, x1: f64, _t: f64) -> Jet {
        let j = self.inner.jet(x1, self.at);
        Jet {
            value: j.value,
            d_x: j.d_x,
            d_t: 0.0,
            d_xx: j.d_xx,
            d_xt: 0.0,
        }
    }
}

macro_rules! opaque_debug {
    ($($t:path),*) => {$(
        impl core::fmt::Debug for dyn $t {
            fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str(stringify!($t))
            }
        }
    )*};
}

opaque_debug!(Profile, Signal, VelocityField);
