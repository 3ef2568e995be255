//! Posterior-mean regression of a rotation under the density `1 + c·tr(γᵀx)`.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{
    euler_from_rotation, gauss_legendre, quad_s2, quad_so3, rotation_from_euler, sample_haar_so3,
    EulerAngles,
};
use crate::parallel::{map_indexed, stream_rng};
use crate::rotation::Rotation;

/// Largest admissible `|c|`; keeps `1 + c·tr(γᵀx) ≥ 1 − 3|c| > 0`.
pub const MAX_COUPLING: f64 = 0.3;
/// Orders below this are raised to it in [`weighted_tau_with`].
pub const MIN_TAU_ORDER: usize = 8;
/// Samples drawn from one random stream in the seeded Monte Carlo routines.
pub const CHUNK_SAMPLES: usize = 1 << 14;

/// Posterior density `λ(γ) = 1 + c·tr(γᵀx)` against Haar measure (flat prior).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorModel {
    c: f64,
    x_statistic: Rotation,
}

impl PosteriorModel {
    pub fn new(c: f64, x_statistic: Rotation) -> Result<Self> {
        if !c.is_finite() || c.abs() > MAX_COUPLING {
            return Err(Error::InvalidArgument(format!(
                "coupling c = {c} must satisfy |c| <= {MAX_COUPLING}"
            )));
        }
        Ok(PosteriorModel { c, x_statistic })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x_statistic(&self) -> &Rotation {
        &self.x_statistic
    }

    pub fn density(&self, gamma: &Matrix3<f64>) -> f64 {
        1.0 + self.c * gamma.dot(self.x_statistic.matrix())
    }
}

/// Monte Carlo posterior mean with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMean {
    pub mean: Matrix3<f64>,
    pub std_error: Matrix3<f64>,
    pub n_samples: usize,
}

#[derive(Clone, Copy)]
struct Moments {
    sum: Matrix3<f64>,
    sum_sq: Matrix3<f64>,
    n: usize,
}

impl Moments {
    fn zero() -> Self {
        Moments {
            sum: Matrix3::zeros(),
            sum_sq: Matrix3::zeros(),
            n: 0,
        }
    }

    fn merge(self, o: Moments) -> Self {
        Moments {
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            n: self.n + o.n,
        }
    }

    fn finish(self) -> PosteriorMean {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean.component_mul(&mean)) * (n / (n - 1.0));
        PosteriorMean {
            mean,
            std_error: var.map(|v| (v.max(0.0) / n).sqrt()),
            n_samples: self.n,
        }
    }
}

fn accumulate<R: Rng + ?Sized>(model: &PosteriorModel, n: usize, rng: &mut R) -> Moments {
    let mut m = Moments::zero();
    for _ in 0..n {
        let g = sample_haar_so3(rng).into_inner();
        let v = g * model.density(&g);
        m.sum += v;
        m.sum_sq += v.component_mul(&v);
    }
    m.n = n;
    m
}

fn check_samples(n: usize, required: usize) -> Result<()> {
    if n < required {
        return Err(Error::TooFewSamples { required, found: n });
    }
    Ok(())
}

/// `γ̄ = ∫ γ λ(γ) dγ` by Monte Carlo over Haar samples.
pub fn posterior_mean<R: Rng + ?Sized>(
    model: &PosteriorModel,
    n_samples: usize,
    rng: &mut R,
) -> Result<PosteriorMean> {
    check_samples(n_samples, 10_000)?;
    Ok(accumulate(model, n_samples, rng).finish())
}

fn chunk_sizes(n: usize) -> Vec<usize> {
    let full = n / CHUNK_SAMPLES;
    let mut sizes = vec![CHUNK_SAMPLES; full];
    if !n.is_multiple_of(CHUNK_SAMPLES) {
        sizes.push(n % CHUNK_SAMPLES);
    }
    sizes
}

/// [`posterior_mean`] over independent streams of `seed`, one per chunk of
/// [`CHUNK_SAMPLES`]; the result is identical for every thread count.
pub fn posterior_mean_seeded(
    model: &PosteriorModel,
    n_samples: usize,
    seed: u64,
    threads: usize,
) -> Result<PosteriorMean> {
    check_samples(n_samples, 10_000)?;
    let sizes = chunk_sizes(n_samples);
    let parts = map_indexed(sizes.len(), threads, |i| {
        accumulate(model, sizes[i], &mut stream_rng(seed, i as u64))
    });
    Ok(parts
        .into_iter()
        .fold(Moments::zero(), Moments::merge)
        .finish())
}

/// `∫ λ(γ) dγ` by product quadrature; equals 1 for every admissible model.
pub fn posterior_normalizer(model: &PosteriorModel, order: usize) -> f64 {
    quad_so3(order).integrate(|g| model.density(g.matrix()))
}

/// A symmetric positive semi-definite form `τ` on the design space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauForm(Matrix3<f64>);

impl TauForm {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let scale = m.amax().max(1.0);
        let asym = (m - m.transpose()).amax() / scale;
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        let min = m.symmetric_eigen().eigenvalues.min();
        if min < -1e-12 * scale {
            return Err(Error::NotPositiveDefinite(min));
        }
        Ok(TauForm((m + m.transpose()) / 2.0))
    }

    /// `∫_{S²} θθᵀ dθ` evaluated by quadrature.
    pub fn s2(order: usize) -> Self {
        let rule = quad_s2(order);
        let m = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| t.coords() * t.coords().transpose() * *w)
            .sum();
        TauForm(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

/// Components of `(γ̄ − γ̂)τ` along a tangent basis at γ̂; zero at a Bayes estimator.
pub fn bayes_estimator_condition(
    gamma_hat: &Rotation,
    gamma_bar: &Matrix3<f64>,
    tau: &TauForm,
    tangent_basis: &[Matrix3<f64>],
) -> Result<DVector<f64>> {
    let eig = tau.0.symmetric_eigen().eigenvalues;
    if !(eig.min() > 1e-12 * eig.max()) {
        return Err(Error::SingularTau);
    }
    let r = (gamma_bar - gamma_hat.matrix()) * tau.0;
    Ok(DVector::from_iterator(
        tangent_basis.len(),
        tangent_basis.iter().map(|b| r.dot(b)),
    ))
}

/// Weight attached to the residual angle α in [`weighted_tau_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauWeight {
    /// `α / sin α`, from the geodesic loss.
    Intrinsic,
    /// Constant 1, from the chordal loss.
    Unit,
}

/// `τ(γ̂) = 3 ∫∫ λ(γ̂γ)·(α/sin α)·γθθᵀ dθ dγ` with `cos α = ⟨γθ, θ⟩`.
pub fn weighted_tau(gamma_hat: &Rotation, model: &PosteriorModel, order: usize) -> Matrix3<f64> {
    weighted_tau_with(gamma_hat, model, order, TauWeight::Intrinsic)
}

/// [`weighted_tau`] with a choice of weight.
///
/// For each θ the inner integral is written in a frame `R_θ` with
/// `R_θ e₃ = θ`, substituting `γ = R_θ γ' R_θᵀ`. Then α is the middle Euler
/// angle b of γ', and `(α/sin α)·sin b = b` is smooth, so a Gauss–Legendre
/// rule in b itself converges quickly.
pub fn weighted_tau_with(
    gamma_hat: &Rotation,
    model: &PosteriorModel,
    order: usize,
    weight: TauWeight,
) -> Matrix3<f64> {
    let order = order.max(MIN_TAU_ORDER);
    let outer = quad_s2(order);
    let (t, w) = gauss_legendre(order + 1);
    let m = order + 1;
    let mut inner: Vec<(Matrix3<f64>, f64)> = Vec::with_capacity(t.len() * m * m);
    for (ti, wi) in t.iter().zip(&w) {
        let b = PI * (ti + 1.0) / 2.0;
        let h = match weight {
            TauWeight::Intrinsic => b,
            TauWeight::Unit => b.sin(),
        };
        let weight = wi * PI / 4.0 * h / (m * m) as f64;
        for ja in 0..m {
            for jc in 0..m {
                let a = 2.0 * PI * ja as f64 / m as f64;
                let c = 2.0 * PI * jc as f64 / m as f64;
                inner.push((
                    rotation_from_euler(&EulerAngles::new(a, b, c)).into_inner(),
                    weight,
                ));
            }
        }
    }
    let mut tau = Matrix3::zeros();
    for (theta, w_theta) in outer.nodes.iter().zip(&outer.weights) {
        let th = theta.coords();
        let frame = frame_for(th);
        let mut acc = Vector3::zeros();
        for (g, w) in &inner {
            let gamma = frame * g * frame.transpose();
            let lambda = model.density(&(gamma_hat.matrix() * gamma));
            acc += frame * g.column(2) * (lambda * w);
        }
        tau += acc * th.transpose() * (3.0 * w_theta);
    }
    tau
}

/// A rotation taking e₃ to `theta`.
fn frame_for(theta: &Vector3<f64>) -> Matrix3<f64> {
    let b = theta.x.hypot(theta.y).atan2(theta.z);
    let phi = theta.y.atan2(theta.x);
    (Rotation::about_axis(2, phi + PI / 2.0) * Rotation::about_axis(0, b)).into_inner()
}

/// Monte Carlo value of the six-dimensional integral whose closed form is
/// `π⁴c²sin²(y)/256`, with y the middle Euler angle of `αᵀγ̂ᵀxα`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorIntegral {
    pub numeric: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub euler_y: f64,
    pub n_samples: usize,
}

impl PosteriorIntegral {
    /// `|numeric − analytic| / analytic`, or `None` when the analytic value
    /// vanishes to working precision (c = 0 or sin²y ≤ 1e-12).
    pub fn relative_error(&self) -> Option<f64> {
        let negligible = self.euler_y.sin().powi(2) <= 1e-12;
        (self.analytic != 0.0 && !negligible)
            .then(|| (self.numeric - self.analytic).abs() / self.analytic.abs())
    }
}

#[derive(Clone, Copy)]
struct Scalar {
    sum: f64,
    sum_sq: f64,
    n: usize,
}

fn integral_samples<R: Rng + ?Sized>(
    model: &PosteriorModel,
    gamma_hat: &Rotation,
    alpha: &Rotation,
    n: usize,
    rng: &mut R,
) -> Scalar {
    let outer = gamma_hat.matrix() * alpha.matrix();
    let lambda = |a: f64, b: f64, c: f64| {
        let g = rotation_from_euler(&EulerAngles::new(a, b, c)).into_inner();
        model.density(&(outer * g * alpha.matrix().transpose()))
    };
    let mut acc = Scalar {
        sum: 0.0,
        sum_sq: 0.0,
        n,
    };
    for _ in 0..n {
        let a1 = rng.random::<f64>() * 2.0 * PI;
        let a2 = rng.random::<f64>() * 2.0 * PI;
        let c1 = rng.random::<f64>() * 2.0 * PI;
        let c2 = rng.random::<f64>() * 2.0 * PI;
        let b1 = rng.random::<f64>() * PI;
        let b2 = rng.random::<f64>() * PI;
        // Average over the four azimuth shifts a_j → a_j + π. cos(a₁ − a₂)
        // flips sign with each shift, so the average factors into differences.
        let d1 = lambda(a1, b1, c1) - lambda(a1 + PI, b1, c1);
        let d2 = lambda(a2, b2, c2) - lambda(a2 + PI, b2, c2);
        let f = PI * PI / 4.0 * b1.sin() * b2.sin() * b1 * b2 * (a1 - a2).cos() * d1 * d2 / 4.0;
        acc.sum += f;
        acc.sum_sq += f * f;
    }
    acc
}

fn finish_integral(
    model: &PosteriorModel,
    gamma_hat: &Rotation,
    alpha: &Rotation,
    s: Scalar,
) -> PosteriorIntegral {
    let n = s.n as f64;
    let mean = s.sum / n;
    let var = ((s.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let x0 = alpha.transpose() * gamma_hat.transpose() * *model.x_statistic() * *alpha;
    let y = euler_from_rotation(&x0).b;
    PosteriorIntegral {
        numeric: mean,
        std_error: (var / n).sqrt(),
        analytic: PI.powi(4) * model.c * model.c * y.sin().powi(2) / 256.0,
        euler_y: y,
        n_samples: s.n,
    }
}

/// Monte Carlo check of the vanishing integral at the Bayes estimator.
///
/// Samples `(a₁, b₁, c₁, a₂, b₂, c₂)` uniformly and averages the integrand
/// `(1/64π⁴)·sin b₁ sin b₂·b₁b₂·cos(a₁−a₂)·λ(γ̂αγ₁α⁻¹)·λ(γ̂αγ₂α⁻¹)`
/// antithetically over azimuth shifts by π.
pub fn verify_posterior_integral<R: Rng + ?Sized>(
    model: &PosteriorModel,
    gamma_hat: &Rotation,
    alpha_test: &Rotation,
    n_samples: usize,
    rng: &mut R,
) -> Result<PosteriorIntegral> {
    check_samples(n_samples, 2)?;
    let s = integral_samples(model, gamma_hat, alpha_test, n_samples, rng);
    Ok(finish_integral(model, gamma_hat, alpha_test, s))
}

/// [`verify_posterior_integral`] over independent streams of `seed`.
pub fn verify_posterior_integral_seeded(
    model: &PosteriorModel,
    gamma_hat: &Rotation,
    alpha_test: &Rotation,
    n_samples: usize,
    seed: u64,
    threads: usize,
) -> Result<PosteriorIntegral> {
    check_samples(n_samples, 2)?;
    let sizes = chunk_sizes(n_samples);
    let parts = map_indexed(sizes.len(), threads, |i| {
        integral_samples(
            model,
            gamma_hat,
            alpha_test,
            sizes[i],
            &mut stream_rng(seed, i as u64),
        )
    });
    let total = parts.into_iter().fold(
        Scalar {
            sum: 0.0,
            sum_sq: 0.0,
            n: 0,
        },
        |a, b| Scalar {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            n: a.n + b.n,
        },
    );
    Ok(finish_integral(model, gamma_hat, alpha_test, total))
}
