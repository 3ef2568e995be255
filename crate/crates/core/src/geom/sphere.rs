use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::rotation::{Rotation, CUTLOCUS_TOLERANCE};

const UNIT_TOLERANCE: f64 = 1e-12;
const TANGENT_TOLERANCE: f64 = 1e-10;

/// A point of the unit sphere in three-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vector3<f64>);

impl UnitVector {
    /// Accepts `v` if its norm is 1 within 1e-12.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::DomainError(format!(
                "vector has norm {n}, expected 1"
            )));
        }
        Ok(UnitVector(v / n))
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::OutsideTube("zero vector has no direction".into()));
        }
        Ok(UnitVector(v / n))
    }

    pub fn from_unchecked(v: Vector3<f64>) -> Self {
        UnitVector(v)
    }

    pub fn e1() -> Self {
        UnitVector(Vector3::x())
    }
    pub fn e2() -> Self {
        UnitVector(Vector3::y())
    }
    pub fn e3() -> Self {
        UnitVector(Vector3::z())
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn rotate(&self, r: &Rotation) -> UnitVector {
        UnitVector(r * &self.0)
    }
}

impl std::ops::Neg for UnitVector {
    type Output = UnitVector;
    fn neg(self) -> UnitVector {
        UnitVector(-self.0)
    }
}

/// `α / sin α`, with its Taylor series below 1e-4.
pub fn alpha_over_sin(alpha: f64) -> f64 {
    if alpha < 1e-4 {
        let a2 = alpha * alpha;
        1.0 + a2 / 6.0 + 7.0 * a2 * a2 / 360.0
    } else {
        alpha / alpha.sin()
    }
}

/// Great-circle distance in [0, π].
///
/// Evaluated as `atan2(|x × y|, ⟨x, y⟩)`, which equals the clamped arccosine
/// but keeps full precision for nearly equal or nearly antipodal points.
pub fn s2_dist(x: &UnitVector, y: &UnitVector) -> f64 {
    x.0.cross(&y.0).norm().atan2(x.0.dot(&y.0))
}

/// Logarithm map: the tangent vector at `x` pointing to `y` with length `s2_dist(x, y)`.
pub fn s2_log(x: &UnitVector, y: &UnitVector) -> Result<Vector3<f64>> {
    let c = x.dot(y);
    if c <= -1.0 + CUTLOCUS_TOLERANCE {
        return Err(Error::CutLocus);
    }
    let alpha = s2_dist(x, y);
    let perp = y.0 - x.0 * c;
    Ok(perp * alpha_over_sin(alpha))
}

/// Exponential map `cos|w|·x + sin|w|·w/|w|` for `w` tangent at `x`.
pub fn s2_exp(x: &UnitVector, w: &Vector3<f64>) -> Result<UnitVector> {
    let normal = w.dot(&x.0);
    if normal.abs() > TANGENT_TOLERANCE * w.norm().max(1.0) {
        return Err(Error::NotTangent(normal));
    }
    let t = w.norm();
    if t == 0.0 {
        return Ok(*x);
    }
    let p = x.0 * t.cos() + w * (t.sin() / t);
    Ok(UnitVector(p / p.norm()))
}
