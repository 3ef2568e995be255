//! Rotations of three-space and the exponential chart of SO(3).

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Distance from the cut locus below which logarithms are refused: rotation
/// angles within this of π, and on S² inner products within this of −1.
pub const CUTLOCUS_TOLERANCE: f64 = 1e-9;

const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// An element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps `m` after checking `mᵀm = I` and `det m = 1` to 1e-10.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let defect = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if defect > ORTHOGONALITY_TOLERANCE || (det - 1.0).abs() > ORTHOGONALITY_TOLERANCE {
            return Err(Error::DomainError(format!(
                "not a rotation (orthogonality defect {defect:e}, determinant {det})"
            )));
        }
        Ok(Rotation(m))
    }

    /// Wraps `m` without checking. Callers guarantee it is a rotation.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    /// Rotation by `angle` about standard basis axis `axis` (0, 1 or 2), counterclockwise.
    pub fn about_axis(axis: usize, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let m = match axis {
            0 => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            1 => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
            2 => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            _ => panic!("axis index {axis} out of range"),
        };
        Rotation(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        let w = vee(&(self.0 - self.0.transpose())).norm() / 2.0;
        w.atan2((self.0.trace() - 1.0) / 2.0)
    }

    /// Geodesic distance `angle(selfᵀ other)` under the bi-invariant metric.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        (self.transpose() * *other).angle()
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<&Vector3<f64>> for &Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: &Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// Skew matrix with `hat(w) v = w × v`.
pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`hat`] applied to the skew part of `m`.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) / 2.0,
        (m[(0, 2)] - m[(2, 0)]) / 2.0,
        (m[(1, 0)] - m[(0, 1)]) / 2.0,
    )
}

/// Skew-symmetric part `(m − mᵀ)/2`.
pub fn skew(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m - m.transpose()) / 2.0
}

/// Rodrigues formula for `exp(hat(w))`.
pub fn so3_exp(w: &Vector3<f64>) -> Rotation {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-6 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(w);
    Rotation(Matrix3::identity() + k * a + k * k * b)
}

/// Axis-angle vector of `r`, the inverse of [`so3_exp`] on angles below π.
pub fn so3_log(r: &Rotation) -> Result<Vector3<f64>> {
    let m = r.matrix();
    let axial = vee(m);
    let s = axial.norm();
    let c = (m.trace() - 1.0) / 2.0;
    let theta = s.atan2(c);
    if theta >= PI - CUTLOCUS_TOLERANCE {
        return Err(Error::CutLocus);
    }
    if theta < 1e-6 {
        return Ok(axial * (1.0 + theta * theta / 6.0));
    }
    if theta < 3.0 {
        return Ok(axial * (theta / s));
    }
    // Near π the skew part is small; recover the axis from the symmetric part.
    let b = (m + m.transpose()) / 2.0 - Matrix3::identity() * c;
    let col = (0..3)
        .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
        .unwrap_or(0);
    let mut axis = b.column(col).into_owned();
    axis /= axis.norm();
    if axis.dot(&axial) < 0.0 {
        axis = -axis;
    }
    Ok(axis * theta)
}
