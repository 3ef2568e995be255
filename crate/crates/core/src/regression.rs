//! Regression of a rotation from paired points on the sphere.
//!
//! Given design points θₗ and observations yₗ, find γ ∈ SO(3) minimizing
//! either the chordal loss `Σ|yₗ − γθₗ|²` (closed form, nearest rotation to
//! `ν = Σ yₗθₗᵀ`) or the geodesic loss `Σ dist(yₗ, γθₗ)²` (iterative).

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geom::{alpha_over_sin, s2_dist, UnitVector};
use crate::matdecomp::{project_special_orthogonal, shape, RealMatrix};
use crate::rotation::{hat, skew, so3_exp, Rotation};

pub const FOC_TOLERANCE: f64 = 1e-10;
pub const MAX_ITER: usize = 200;
pub const ANTIPODE_GUARD: f64 = 1e-6;

/// Paired design points and observations on S².
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    design: Vec<UnitVector>,
    observations: Vec<UnitVector>,
}

impl RegressionDataset {
    pub fn new(design: Vec<UnitVector>, observations: Vec<UnitVector>) -> Result<Self> {
        if design.len() != observations.len() {
            return Err(Error::InvalidArgument(format!(
                "{} design points but {} observations",
                design.len(),
                observations.len()
            )));
        }
        if design.len() < 3 {
            return Err(Error::DegenerateProjection(format!(
                "need at least 3 pairs, got {}",
                design.len()
            )));
        }
        Ok(RegressionDataset {
            design,
            observations,
        })
    }

    pub fn design(&self) -> &[UnitVector] {
        &self.design
    }

    pub fn observations(&self) -> &[UnitVector] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }

    fn pairs(&self) -> impl Iterator<Item = (&Vector3<f64>, &Vector3<f64>)> {
        self.design
            .iter()
            .zip(&self.observations)
            .map(|(t, y)| (t.coords(), y.coords()))
    }

    /// `ν = Σ yₗ θₗᵀ`.
    pub fn nu(&self) -> Matrix3<f64> {
        self.pairs().map(|(t, y)| y * t.transpose()).sum()
    }

    /// `τ = Σ θₗ θₗᵀ`.
    pub fn tau(&self) -> Matrix3<f64> {
        self.pairs().map(|(t, _)| t * t.transpose()).sum()
    }

    /// The dataset `(g θₗ, h yₗ)`.
    pub fn transformed(&self, g: &Rotation, h: &Rotation) -> Self {
        RegressionDataset {
            design: self.design.iter().map(|t| t.rotate(g)).collect(),
            observations: self.observations.iter().map(|y| y.rotate(h)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Extrinsic,
    Intrinsic,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::Extrinsic => "extrinsic",
            FitMethod::Intrinsic => "intrinsic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub gamma: Rotation,
    pub method: FitMethod,
    pub iterations: usize,
    /// `‖skew(γᵀν)‖_F` with ν normalized by the number of pairs.
    pub residual_norm: f64,
    pub converged: bool,
    /// Pairs whose residual angle is within the antipode guard of π.
    pub antipodal_pairs: Vec<usize>,
}

/// Iteration used by [`fit_intrinsic_so3_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntrinsicSolver {
    /// `γ ← π(ν(γ))` with no safeguard.
    FixedPoint,
    /// Newton steps in the exponential chart with a definite Hessian and a
    /// backtracking line search; a fixed-point step is taken only when the
    /// line search fails.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicOptions {
    pub max_iter: usize,
    pub foc_tolerance: f64,
    pub antipode_guard: f64,
    pub solver: IntrinsicSolver,
}

impl Default for IntrinsicOptions {
    fn default() -> Self {
        IntrinsicOptions {
            max_iter: MAX_ITER,
            foc_tolerance: FOC_TOLERANCE,
            antipode_guard: ANTIPODE_GUARD,
            solver: IntrinsicSolver::Newton,
        }
    }
}

/// Components of `ν − γτ` along a tangent basis of the admissible maps at γ.
///
/// Design points live in `Eˢ`, observations in `Eᵗ`, and γ is `t×s`.
/// The value along `B` is `−½` times the derivative of `Σ|yᵢ − γθᵢ|²` in direction `B`.
pub fn lsq_linear(
    design: &[DVector<f64>],
    observations: &[DVector<f64>],
    gamma: &RealMatrix,
    tangent_basis: &[RealMatrix],
) -> Result<DVector<f64>> {
    if design.len() != observations.len() || design.is_empty() {
        return Err(Error::InvalidArgument(
            "design and observations must be nonempty and paired".into(),
        ));
    }
    let (t, s) = (observations[0].len(), design[0].len());
    let mismatch = |r: usize, c: usize| Error::ShapeMismatch {
        expected: shape(t, s),
        found: shape(r, c),
    };
    if gamma.shape() != (t, s) {
        return Err(mismatch(gamma.nrows(), gamma.ncols()));
    }
    let mut nu = RealMatrix::zeros(t, s);
    let mut tau = RealMatrix::zeros(s, s);
    for (th, y) in design.iter().zip(observations) {
        if th.len() != s || y.len() != t {
            return Err(mismatch(y.len(), th.len()));
        }
        nu += y * th.transpose();
        tau += th * th.transpose();
    }
    let r = nu - gamma * tau;
    tangent_basis
        .iter()
        .map(|b| {
            if b.shape() != (t, s) {
                Err(mismatch(b.nrows(), b.ncols()))
            } else {
                Ok(r.dot(b))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(DVector::from_vec)
}

/// Tangent basis `{hat(eᵢ) γ}` of SO(3) at γ.
pub fn so3_tangent_basis(gamma: &Rotation) -> [Matrix3<f64>; 3] {
    [Vector3::x(), Vector3::y(), Vector3::z()].map(|e| hat(&e) * gamma.matrix())
}

/// Mean squared geodesic residual `(1/k) Σ dist(γθₗ, yₗ)²`.
pub fn sum_sq_intrinsic(data: &RegressionDataset, gamma: &Rotation) -> f64 {
    let total: f64 = data
        .design
        .iter()
        .zip(&data.observations)
        .map(|(t, y)| s2_dist(&t.rotate(gamma), y).powi(2))
        .sum();
    total / data.len() as f64
}

/// Mean squared chordal residual `(1/k) Σ |γθₗ − yₗ|²`.
pub fn sum_sq_extrinsic(data: &RegressionDataset, gamma: &Rotation) -> f64 {
    let total: f64 = data
        .pairs()
        .map(|(t, y)| (gamma * t - y).norm_squared())
        .sum();
    total / data.len() as f64
}

fn skew_residual(gamma: &Rotation, nu: &Matrix3<f64>) -> f64 {
    skew(&(gamma.matrix().transpose() * nu)).norm()
}

fn check_design_rank(data: &RegressionDataset) -> Result<()> {
    let eig = data.tau().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 1e-10 * max) {
        return Err(Error::DegenerateProjection(format!(
            "design second-moment matrix is rank deficient (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Least-squares fit: the rotation nearest to `ν`.
pub fn fit_extrinsic_so3(data: &RegressionDataset) -> Result<RegressionFit> {
    check_design_rank(data)?;
    let nu = data.nu() / data.len() as f64;
    let gamma = project_special_orthogonal(&nu)?;
    let residual_norm = skew_residual(&gamma, &nu);
    Ok(RegressionFit {
        gamma,
        method: FitMethod::Extrinsic,
        iterations: 0,
        residual_norm,
        converged: true,
        antipodal_pairs: Vec::new(),
    })
}

struct IntrinsicState {
    nu: Matrix3<f64>,
    objective: f64,
    gradient: Vector3<f64>,
    hessian: Matrix3<f64>,
    antipodal: Vec<usize>,
}

/// `f''(c)` for `f(c) = arccos(c)²`, as a function of `α = arccos c`.
fn second_derivative(alpha: f64) -> f64 {
    if alpha < 1e-3 {
        2.0 / 3.0 + 4.0 / 15.0 * alpha * alpha
    } else {
        let s = alpha.sin();
        2.0 * (s - alpha * alpha.cos()) / (s * s * s)
    }
}

fn evaluate(data: &RegressionDataset, gamma: &Rotation, guard: f64) -> IntrinsicState {
    let k = data.len() as f64;
    let mut nu = Matrix3::zeros();
    let mut objective = 0.0;
    let mut gradient = Vector3::zeros();
    let mut hessian = Matrix3::zeros();
    let mut antipodal = Vec::new();
    for (l, (t, y)) in data.design.iter().zip(&data.observations).enumerate() {
        let p = t.rotate(gamma);
        let alpha = s2_dist(&p, y);
        objective += alpha * alpha;
        if alpha >= PI - guard {
            antipodal.push(l);
        }
        // Inside the guard the weight is held at its boundary value to stay finite.
        let a = alpha.min(PI - guard);
        let w = alpha_over_sin(a);
        let (p, y) = (p.coords(), y.coords());
        nu += y * t.coords().transpose() * w;
        let g = p.cross(y);
        let c = p.dot(y);
        let hc = (y * p.transpose() + p * y.transpose()) * 0.5 - Matrix3::identity() * c;
        gradient -= g * (2.0 * w);
        hessian += g * g.transpose() * second_derivative(a) - hc * (2.0 * w);
    }
    IntrinsicState {
        nu: nu / k,
        objective: objective / k,
        gradient: gradient / k,
        hessian: (hessian + hessian.transpose()) / (2.0 * k),
        antipodal,
    }
}

/// Damped Newton step with Armijo backtracking on the objective.
///
/// Near a pair close to its antipode the Hessian can be indefinite; its
/// eigenvalues are replaced by their absolute values (floored), which keeps
/// the direction a descent direction.
fn newton_step(
    data: &RegressionDataset,
    gamma: &Rotation,
    state: &IntrinsicState,
    guard: f64,
) -> Option<(Rotation, IntrinsicState)> {
    let eig = state.hessian.symmetric_eigen();
    let floor = 1e-8 * eig.eigenvalues.amax().max(1.0);
    let inv = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.abs().max(floor)));
    let direction = -(eig.eigenvectors * inv * eig.eigenvectors.transpose()) * state.gradient;
    let slope = state.gradient.dot(&direction);
    let slack = 1e-12 * state.objective.max(f64::MIN_POSITIVE);
    let mut t = 1.0;
    for _ in 0..40 {
        let candidate = so3_exp(&(direction * t)) * *gamma;
        let next = evaluate(data, &candidate, guard);
        if next.objective <= state.objective + 1e-4 * t * slope + slack {
            return Some((candidate, next));
        }
        t *= 0.5;
    }
    None
}

/// The weighted matrix `ν(γ) = (1/k) Σ (αₗ/sin αₗ) yₗθₗᵀ` and the pairs inside the antipode guard.
pub fn intrinsic_nu(
    data: &RegressionDataset,
    gamma: &Rotation,
    guard: f64,
) -> (Matrix3<f64>, Vec<usize>) {
    let s = evaluate(data, gamma, guard);
    (s.nu, s.antipodal)
}

/// Geodesic-loss fit with default options.
pub fn fit_intrinsic_so3(
    data: &RegressionDataset,
    init: Option<Rotation>,
) -> Result<RegressionFit> {
    fit_intrinsic_so3_with(data, init, &IntrinsicOptions::default())
}

/// Geodesic-loss fit, started from `init` or else from the extrinsic fit.
///
/// Converged when `‖skew(γᵀν(γ))‖_F` drops below the tolerance, which is the
/// first-order condition `γᵀν(γ)` symmetric.
pub fn fit_intrinsic_so3_with(
    data: &RegressionDataset,
    init: Option<Rotation>,
    options: &IntrinsicOptions,
) -> Result<RegressionFit> {
    let mut gamma = match init {
        Some(g) => g,
        None => fit_extrinsic_so3(data)?.gamma,
    };
    let guard = options.antipode_guard;
    let mut state = evaluate(data, &gamma, guard);
    let mut residual = skew_residual(&gamma, &state.nu);
    let mut iterations = 0;
    while residual >= options.foc_tolerance && iterations < options.max_iter {
        iterations += 1;
        let newton = match options.solver {
            IntrinsicSolver::FixedPoint => None,
            IntrinsicSolver::Newton => newton_step(data, &gamma, &state, guard),
        };
        let (next_gamma, next_state) = match newton {
            Some(accepted) => accepted,
            None => {
                let candidate = project_special_orthogonal(&state.nu)?;
                let next = evaluate(data, &candidate, guard);
                (candidate, next)
            }
        };
        gamma = next_gamma;
        state = next_state;
        residual = skew_residual(&gamma, &state.nu);
    }
    if !state.antipodal.is_empty() {
        return Err(Error::AntipodalData(state.antipodal));
    }
    if residual >= options.foc_tolerance {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    Ok(RegressionFit {
        gamma,
        method: FitMethod::Intrinsic,
        iterations,
        residual_norm: residual,
        converged: true,
        antipodal_pairs: state.antipodal,
    })
}
