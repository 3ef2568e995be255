//! Linear priors on orbits and the second-order Bayes estimator under them.
//!
//! With prior density `λ_v(φ) = α⟨v, φ⟩ + β` and gaussian noise of scale ε,
//! the estimator moves the projection `θ̂ = π(x)` a distance of order ε²
//! along the gradient of `log λ_v`:
//! `g̃(x) = exp(s ξ) θ̂` with `s = α ε² / λ_v(θ̂)` and `ξ θ̂ = d_θ̂π(v)`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geom::{s2_exp, UnitVector};
use crate::matdecomp::{shape, svd, RealMatrix};
use crate::orbits::{project, OrbitMatrix, OrbitPoint, OrbitSpec};
use crate::rotation::{skew, so3_exp, vee, Rotation};

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// The prior density `α⟨v, φ⟩ + β` on an orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPrior {
    pub v: RealMatrix,
    pub alpha: f64,
    pub beta: f64,
}

impl LinearPrior {
    pub fn new(v: RealMatrix, alpha: f64, beta: f64) -> Self {
        LinearPrior { v, alpha, beta }
    }

    /// The uniform prior on an orbit in `rows×cols` matrices.
    pub fn flat(rows: usize, cols: usize) -> Self {
        LinearPrior {
            v: RealMatrix::zeros(rows, cols),
            alpha: 0.0,
            beta: 1.0,
        }
    }

    /// Prior on S² peaked at `v`, with `β = 1` and `0 ≤ α < 1`.
    pub fn s2(v: UnitVector, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::PriorInvalid(format!(
                "alpha = {alpha} must lie in [0, 1)"
            )));
        }
        Ok(LinearPrior {
            v: RealMatrix::from_column_slice(3, 1, v.coords().as_slice()),
            alpha,
            beta: 1.0,
        })
    }

    /// `⟨v, φ⟩`.
    pub fn linear_part(&self, phi: &RealMatrix) -> f64 {
        self.v.dot(phi)
    }

    /// `α⟨v, φ⟩ + β` without validation.
    pub fn density_at(&self, phi: &RealMatrix) -> f64 {
        self.alpha * self.linear_part(phi) + self.beta
    }

    /// Checks normalization and positivity on the given orbit.
    pub fn validate(&self, spec: &OrbitSpec) -> Result<()> {
        if !self.alpha.is_finite()
            || !self.beta.is_finite()
            || self.v.iter().any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if self.alpha < 0.0 {
            return Err(Error::PriorInvalid(format!(
                "alpha = {} is negative",
                self.alpha
            )));
        }
        let (mean, min) = linear_extrema(spec, &self.v)?;
        let total = self.alpha * mean + self.beta;
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::PriorInvalid(format!(
                "density integrates to {total}, not 1"
            )));
        }
        let floor = self.alpha * min + self.beta;
        if !(floor > 0.0) {
            return Err(Error::NonPositiveDensity(floor));
        }
        Ok(())
    }
}

/// Mean and minimum of `φ ↦ ⟨v, φ⟩` over the orbit.
fn linear_extrema(spec: &OrbitSpec, v: &RealMatrix) -> Result<(f64, f64)> {
    let (rows, cols, complex) = spec.ambient_shape();
    if complex || v.shape() != (rows, cols) {
        return Err(Error::ShapeMismatch {
            expected: shape(rows, cols),
            found: shape(v.nrows(), v.ncols()),
        });
    }
    match spec {
        OrbitSpec::Sphere { .. } => Ok((0.0, -v.norm())),
        OrbitSpec::CompactGroup { n: 1 } => Ok((v[(0, 0)], v[(0, 0)])),
        OrbitSpec::CompactGroup { n } => {
            // max over SO(n) of tr(wᵀφ) is σ₁ + … + σₙ₋₁ + sign(det w)·σₙ; take w = −v.
            let d = svd(v)?;
            let sign = (-v).determinant().signum();
            let sign = if sign == 0.0 { 1.0 } else { sign };
            let head: f64 = d.sigma.iter().take(n - 1).sum();
            Ok((0.0, -(head + sign * d.sigma[n - 1])))
        }
        _ => Err(Error::Unsupported(format!(
            "linear priors on the {} orbit",
            spec.name()
        ))),
    }
}

/// `λ_v(φ)` for a point on a supported orbit.
pub fn prior_density(prior: &LinearPrior, phi: &OrbitPoint) -> Result<f64> {
    prior.validate(phi.spec())?;
    let value = match phi.value() {
        OrbitMatrix::Real(m) => prior.density_at(m),
        OrbitMatrix::Complex(_) => {
            return Err(Error::Unsupported("linear priors on complex orbits".into()))
        }
    };
    if !(value > 0.0) {
        return Err(Error::NonPositiveDensity(value));
    }
    Ok(value)
}

/// Second-order Bayes estimate together with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub estimate: OrbitPoint,
    /// The projection `θ̂ = π(x)`.
    pub base_point: OrbitPoint,
    /// Tangent vector `s·d_θ̂π(v)` at the base point.
    pub geodesic_step: RealMatrix,
    /// Riemannian length of the step (an angle on S² and SO(3)).
    pub step_length: f64,
    pub epsilon: f64,
}

/// Coefficients of `R(ε) = c₂ε² + c₄ε⁴ + O(ε⁶)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskExpansion {
    pub order2_coeff: f64,
    pub order4_coeff: f64,
}

impl RiskExpansion {
    pub fn value(&self, epsilon: f64) -> f64 {
        let e2 = epsilon * epsilon;
        self.order2_coeff * e2 + self.order4_coeff * e2 * e2
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "epsilon = {epsilon} must be positive"
        )))
    }
}

fn column(v: &Vector3<f64>) -> RealMatrix {
    RealMatrix::from_column_slice(3, 1, v.as_slice())
}

fn point(spec: &OrbitSpec, m: RealMatrix) -> Result<OrbitPoint> {
    OrbitPoint::new(spec.clone(), OrbitMatrix::Real(m))
}

/// Bayes estimate on S² for the observation `x ∈ E³`.
pub fn bayes_estimate_s2(
    x: &Vector3<f64>,
    prior: &LinearPrior,
    epsilon: f64,
) -> Result<EstimatorResult> {
    check_epsilon(epsilon)?;
    let spec = OrbitSpec::Sphere { n: 3 };
    prior.validate(&spec)?;
    let theta = UnitVector::normalize(*x)?;
    let v = Vector3::new(prior.v[(0, 0)], prior.v[(1, 0)], prior.v[(2, 0)]);
    let along = v.dot(theta.coords());
    let v_bar = v - theta.coords() * along;
    let s = prior.alpha * epsilon * epsilon / (prior.alpha * along + prior.beta);
    let step = v_bar * s;
    let estimate = s2_exp(&theta, &step)?;
    Ok(EstimatorResult {
        estimate: point(&spec, column(estimate.coords()))?,
        base_point: point(&spec, column(theta.coords()))?,
        geodesic_step: column(&step),
        step_length: step.norm(),
        epsilon,
    })
}

/// Bayes estimate on `Sⁿ⁻¹` or SO(3).
pub fn bayes_estimate_orbit(
    spec: &OrbitSpec,
    x: &OrbitMatrix,
    prior: &LinearPrior,
    epsilon: f64,
) -> Result<EstimatorResult> {
    check_epsilon(epsilon)?;
    match spec {
        OrbitSpec::Sphere { .. } | OrbitSpec::CompactGroup { n: 3 } => {}
        _ => {
            return Err(Error::Unsupported(format!(
                "Bayes estimate on the {} orbit",
                spec.name()
            )))
        }
    }
    prior.validate(spec)?;
    let base = project(spec, x)?;
    let theta = base.value().as_real().expect("real orbit").clone();
    let lambda = prior.density_at(&theta);
    let s = prior.alpha * epsilon * epsilon / lambda;
    match spec {
        OrbitSpec::Sphere { .. } => {
            let along = prior.v.dot(&theta);
            let v_bar = &prior.v - &theta * along;
            let step = v_bar * s;
            let t = step.norm();
            let estimate = if t == 0.0 {
                theta.clone()
            } else {
                let e = &theta * t.cos() + &step * (t.sin() / t);
                let norm = e.norm();
                e / norm
            };
            Ok(EstimatorResult {
                estimate: point(spec, estimate)?,
                base_point: base,
                geodesic_step: step,
                step_length: t,
                epsilon,
            })
        }
        _ => {
            let r = Matrix3::from_column_slice(theta.as_slice());
            let v = Matrix3::from_column_slice(prior.v.as_slice());
            let xi = skew(&(v * r.transpose()));
            let w = vee(&xi) * s;
            let estimate: Rotation = so3_exp(&w) * Rotation::from_matrix_unchecked(r);
            let step = xi * r * s;
            Ok(EstimatorResult {
                estimate: point(
                    spec,
                    RealMatrix::from_column_slice(3, 3, estimate.matrix().as_slice()),
                )?,
                base_point: base,
                geodesic_step: RealMatrix::from_column_slice(3, 3, step.as_slice()),
                step_length: w.norm(),
                epsilon,
            })
        }
    }
}

/// `⟨ṽ, τ(ι)⟩` on S² for a prior with parameter α:
/// `(α⁻² − 1)·log √((1−α)/(1+α)) + 1/α`.
///
/// Below α = 0.25 the equivalent series `Σ_{n odd} 2αⁿ/(n(n+2))` is summed
/// instead, since the closed form cancels catastrophically as α → 0.
pub fn vtilde_dot_tau(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::DomainError(format!(
            "alpha = {alpha} must lie in [0, 1)"
        )));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if alpha < 0.25 {
        let a2 = alpha * alpha;
        let mut power = alpha;
        let mut sum = 0.0;
        let mut n = 1.0;
        loop {
            let term = 2.0 * power / (n * (n + 2.0));
            sum += term;
            if term < 1e-18 * sum {
                return Ok(sum);
            }
            power *= a2;
            n += 2.0;
        }
    }
    let log_ratio = (-alpha).ln_1p() - alpha.ln_1p();
    Ok((1.0 / (alpha * alpha) - 1.0) * 0.5 * log_ratio + 1.0 / alpha)
}

/// Risk expansion of the S² estimator, `2ε² + (2/3 + ⟨ṽ, τ(ι)⟩)ε⁴`.
///
/// For `v` off the unit sphere the closed form depends on `α|v|`, which is
/// what is passed on.
pub fn bayes_risk_s2(prior: &LinearPrior, epsilon: f64) -> Result<RiskExpansion> {
    check_epsilon(epsilon)?;
    prior.validate(&OrbitSpec::Sphere { n: 3 })?;
    Ok(RiskExpansion {
        order2_coeff: 2.0,
        order4_coeff: 2.0 / 3.0 + vtilde_dot_tau(prior.alpha * prior.v.norm())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2_point(v: Vector3<f64>) -> OrbitPoint {
        OrbitPoint::new(OrbitSpec::Sphere { n: 3 }, OrbitMatrix::Real(column(&v))).unwrap()
    }

    #[test]
    fn density_examples() {
        let flat = LinearPrior::flat(3, 1);
        assert_eq!(prior_density(&flat, &s2_point(Vector3::y())).unwrap(), 1.0);
        let p = LinearPrior::s2(UnitVector::e1(), 0.5).unwrap();
        assert!((prior_density(&p, &s2_point(Vector3::x())).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(prior_density(&p, &s2_point(Vector3::z())).unwrap(), 1.0);
    }

    #[test]
    fn invalid_priors() {
        assert!(LinearPrior::s2(UnitVector::e1(), 1.0).is_err());
        let spec = OrbitSpec::Sphere { n: 3 };
        let unnormalized = LinearPrior::new(column(&Vector3::x()), 0.5, 0.9);
        assert!(matches!(
            unnormalized.validate(&spec),
            Err(Error::PriorInvalid(_))
        ));
        let negative = LinearPrior::new(column(&(Vector3::x() * 2.0)), 0.6, 1.0);
        assert!(matches!(
            negative.validate(&spec),
            Err(Error::NonPositiveDensity(_))
        ));
    }

    #[test]
    fn group_prior_minimum() {
        // v = I: tr(φ) over SO(3) has minimum −1, attained at half-turns.
        let spec = OrbitSpec::CompactGroup { n: 3 };
        let (mean, min) = linear_extrema(&spec, &RealMatrix::identity(3, 3)).unwrap();
        assert_eq!(mean, 0.0);
        assert!((min + 1.0).abs() < 1e-14);
        assert!(LinearPrior::new(RealMatrix::identity(3, 3), 0.99, 1.0)
            .validate(&spec)
            .is_ok());
        assert!(LinearPrior::new(RealMatrix::identity(3, 3), 1.0, 1.0)
            .validate(&spec)
            .is_err());
    }

    #[test]
    fn worked_example_step() {
        let prior = LinearPrior::s2(UnitVector::e1(), 0.5).unwrap();
        let r = bayes_estimate_s2(&Vector3::new(0.0, 0.0, 2.0), &prior, 0.1).unwrap();
        assert!((r.step_length - 5e-3).abs() < 1e-15);
        assert!((r.geodesic_step[(0, 0)] - 5e-3).abs() < 1e-15);
        let e = r.estimate.value().as_real().unwrap();
        assert!((e[(0, 0)] - 5e-3f64.sin()).abs() < 1e-15);
        assert!((e[(2, 0)] - 5e-3f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn flat_and_peaked_priors_leave_projection() {
        let x = Vector3::new(0.3, -1.0, 0.4);
        let flat = LinearPrior::flat(3, 1);
        let r = bayes_estimate_s2(&x, &flat, 0.2).unwrap();
        assert_eq!(r.estimate, r.base_point);
        let peaked = LinearPrior::s2(UnitVector::normalize(x).unwrap(), 0.7).unwrap();
        let r = bayes_estimate_s2(&x, &peaked, 0.2).unwrap();
        assert!(r.estimate.value().distance(r.base_point.value()) < 1e-15);
        assert!(matches!(
            bayes_estimate_s2(&Vector3::zeros(), &flat, 0.2),
            Err(Error::OutsideTube(_))
        ));
    }

    #[test]
    fn vtilde_values() {
        assert_eq!(vtilde_dot_tau(0.0).unwrap(), 0.0);
        assert!((vtilde_dot_tau(0.5).unwrap() - 0.352_081_566_997_835_46).abs() < 1e-15);
        assert!((vtilde_dot_tau(0.1).unwrap() - 0.066_800_574_623_517_52).abs() < 1e-16);
        assert!((vtilde_dot_tau(0.9).unwrap() - 0.765_775_675_282_948_3).abs() < 1e-15);
        assert!((vtilde_dot_tau(1e-6).unwrap() - 2.0e-6 / 3.0).abs() < 1e-18);
        // Series and closed form agree across the switch.
        let lo = vtilde_dot_tau(0.25 - 1e-12).unwrap();
        let hi = vtilde_dot_tau(0.25).unwrap();
        assert!((lo - hi).abs() < 1e-12);
        assert!(vtilde_dot_tau(1.0).is_err() && vtilde_dot_tau(-0.1).is_err());
    }

    #[test]
    fn flat_risk_constants() {
        let r = bayes_risk_s2(&LinearPrior::flat(3, 1), 0.1).unwrap();
        assert_eq!(r.order2_coeff, 2.0);
        assert_eq!(r.order4_coeff, 2.0 / 3.0);
    }
}
