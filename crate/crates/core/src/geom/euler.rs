use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::rotation::Rotation;

/// Middle-angle distance from 0 or π below which the 3-1-3 chart degenerates.
pub const GIMBAL_TOLERANCE: f64 = 1e-9;

/// 3-1-3 Euler angles `R₃(a) R₁(b) R₃(c)` with a, c ∈ [0, 2π) and b ∈ [0, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Set when b is within [`GIMBAL_TOLERANCE`] of 0 or π and c was fixed to 0.
    pub gimbal_lock: bool,
}

impl EulerAngles {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        EulerAngles {
            a,
            b,
            c,
            gimbal_lock: false,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

fn wrap_two_pi(t: f64) -> f64 {
    let w = t.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

pub fn rotation_from_euler(e: &EulerAngles) -> Rotation {
    Rotation::about_axis(2, e.a) * Rotation::about_axis(0, e.b) * Rotation::about_axis(2, e.c)
}

/// Decomposes a rotation into 3-1-3 angles; at gimbal lock `c` is set to 0.
pub fn euler_from_rotation(r: &Rotation) -> EulerAngles {
    let m: &Matrix3<f64> = r.matrix();
    let b = m[(0, 2)].hypot(m[(1, 2)]).atan2(m[(2, 2)]);
    if !(GIMBAL_TOLERANCE..=PI - GIMBAL_TOLERANCE).contains(&b) {
        // R = R₃(a ± c) R₁(b) and the first column still determines a when c = 0.
        let a = m[(1, 0)].atan2(m[(0, 0)]);
        return EulerAngles {
            a: wrap_two_pi(a),
            b,
            c: 0.0,
            gimbal_lock: true,
        };
    }
    let a = m[(0, 2)].atan2(-m[(1, 2)]);
    let c = m[(2, 0)].atan2(m[(2, 1)]);
    EulerAngles {
        a: wrap_two_pi(a),
        b,
        c: wrap_two_pi(c),
        gimbal_lock: false,
    }
}
