//! Monte Carlo study of the geodesic-loss regressor on SO(3).
//!
//! Each draw fits a rotation to noisy directions, records its Euler angles,
//! and the per-σ cloud is whitened and tested for marginal normality.

mod artifacts;
mod ks;

pub use artifacts::{emit_artifacts, sigma_label};
pub use ks::{
    kolmogorov_survival, ks_statistic_normal, ks_test_normal, normal_cdf, KsResult, KS_MIN_SAMPLES,
};

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geom::{
    euler_from_rotation, rotation_from_euler, sample_uniform_s2, EulerAngles, UnitVector,
};
use crate::parallel::{map_indexed, mix64, stream_rng};
use crate::regression::{fit_extrinsic_so3, fit_intrinsic_so3, RegressionDataset};
use crate::rotation::Rotation;

/// Stream reserved for the shared design under [`DesignPolicy::FixedAcrossDraws`].
const DESIGN_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignPolicy {
    /// One set of design points shared by every draw and σ.
    #[default]
    FixedAcrossDraws,
    /// Fresh design points for each draw.
    RedrawnPerDraw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub k: usize,
    pub n_draws: usize,
    pub sigma_grid: Vec<f64>,
    pub true_gamma: Rotation,
    pub master_seed: u64,
    pub design_policy: DesignPolicy,
    /// Worker threads; results do not depend on this.
    pub threads: usize,
}

impl SimulationConfig {
    /// Validated configuration with the default true rotation and design policy.
    pub fn new(k: usize, n_draws: usize, sigma_grid: Vec<f64>, master_seed: u64) -> Result<Self> {
        let config = SimulationConfig {
            k,
            n_draws,
            sigma_grid,
            true_gamma: default_true_gamma(),
            master_seed,
            design_policy: DesignPolicy::default(),
            threads: 1,
        };
        config.validate()?;
        Ok(config)
    }

    /// k = 100, 1000 draws, σ = 0.1, 0.2, …, 0.9.
    pub fn full_scale(master_seed: u64) -> Self {
        let grid = (1..=9).map(|i| i as f64 / 10.0).collect();
        SimulationConfig::new(100, 1000, grid, master_seed).expect("valid configuration")
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::InvalidArgument(format!(
                "k = {} must be at least 3",
                self.k
            )));
        }
        if self.n_draws < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_draws = {} must be at least 2",
                self.n_draws
            )));
        }
        if let Some(s) = self
            .sigma_grid
            .iter()
            .find(|s| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "sigma = {s} must be positive"
            )));
        }
        Ok(())
    }
}

/// Euler angles (1, 1, 1): far from gimbal lock, so a and c are well defined.
pub fn default_true_gamma() -> Rotation {
    rotation_from_euler(&EulerAngles::new(1.0, 1.0, 1.0))
}

fn draw_stream(sigma: f64, draw_index: usize) -> u64 {
    mix64(mix64(sigma.to_bits()) ^ draw_index as u64)
}

fn design_points<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<UnitVector> {
    (0..k).map(|_| sample_uniform_s2(rng)).collect()
}

/// Dataset `y_l = u_l/|u_l|`, `u_l = γθ_l + σε_l`, determined by
/// `(master_seed, σ, draw_index)`.
pub fn generate_draw(
    config: &SimulationConfig,
    sigma: f64,
    draw_index: usize,
) -> RegressionDataset {
    let mut rng = stream_rng(config.master_seed, draw_stream(sigma, draw_index));
    let design = match config.design_policy {
        DesignPolicy::FixedAcrossDraws => {
            design_points(config.k, &mut stream_rng(config.master_seed, DESIGN_STREAM))
        }
        DesignPolicy::RedrawnPerDraw => design_points(config.k, &mut rng),
    };
    let observations = design
        .iter()
        .map(|theta| {
            let mean = config.true_gamma.matrix() * theta.coords();
            loop {
                let eps = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                if let Ok(y) = UnitVector::normalize(mean + eps * sigma) {
                    break y;
                }
            }
        })
        .collect();
    RegressionDataset::new(design, observations).expect("k >= 3 pairs")
}

/// Results for one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReport {
    pub sigma: f64,
    /// Euler angles of the fitted rotation, in draw order, for converged draws.
    pub euler: Vec<EulerAngles>,
    /// Indices of draws whose fit failed.
    pub failed_draws: Vec<usize>,
    /// Mean of (a, b, c); circular for a and c.
    pub mean: Vector3<f64>,
    /// Deviations from the mean, a and c wrapped into (−π, π].
    pub deviations: Vec<Vector3<f64>>,
    /// Sample covariance `CCᵀ` of the deviations.
    pub covariance: Matrix3<f64>,
    /// Lower Cholesky factor C, when the covariance is positive definite.
    pub cholesky: Option<Matrix3<f64>>,
    /// `ξ = C⁻¹x` per draw; empty without a Cholesky factor.
    pub whitened: Vec<Vector3<f64>>,
    /// KS tests of the three whitened coordinates, when there are enough draws.
    pub ks: Option<[KsResult; 3]>,
}

impl SigmaReport {
    pub fn failure_count(&self) -> usize {
        self.failed_draws.len()
    }

    pub fn p_values(&self) -> Option<[f64; 3]> {
        self.ks.map(|k| k.map(|r| r.p_value))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub sigmas: Vec<SigmaReport>,
}

impl SimulationReport {
    pub fn total_failures(&self) -> usize {
        self.sigmas.iter().map(SigmaReport::failure_count).sum()
    }

    /// Number of marginal KS tests with p below `level`.
    pub fn rejections(&self, level: f64) -> usize {
        self.sigmas
            .iter()
            .filter_map(SigmaReport::p_values)
            .flatten()
            .filter(|p| *p < level)
            .count()
    }
}

fn wrap_angle(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

fn circular_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let s: f64 = values.clone().map(f64::sin).sum();
    let c: f64 = values.map(f64::cos).sum();
    s.atan2(c)
}

/// Mean, deviations, covariance, whitening and KS tests for one Euler-angle cloud.
pub fn summarize(sigma: f64, euler: Vec<EulerAngles>, failed_draws: Vec<usize>) -> SigmaReport {
    let n = euler.len();
    let mut mean = Vector3::zeros();
    let mut deviations = Vec::with_capacity(n);
    if n > 0 {
        let ca = circular_mean(euler.iter().map(|e| e.a));
        let cc = circular_mean(euler.iter().map(|e| e.c));
        let mb = euler.iter().map(|e| e.b).sum::<f64>() / n as f64;
        let raw: Vec<Vector3<f64>> = euler
            .iter()
            .map(|e| Vector3::new(wrap_angle(e.a - ca), e.b - mb, wrap_angle(e.c - cc)))
            .collect();
        let shift = raw.iter().sum::<Vector3<f64>>() / n as f64;
        mean = Vector3::new(ca + shift.x, mb, cc + shift.z);
        deviations = raw
            .iter()
            .map(|d| Vector3::new(d.x - shift.x, d.y, d.z - shift.z))
            .collect();
    }
    let covariance = if n > 1 {
        deviations
            .iter()
            .map(|d| d * d.transpose())
            .sum::<Matrix3<f64>>()
            / (n - 1) as f64
    } else {
        Matrix3::zeros()
    };
    let cholesky = if n > 1 {
        covariance.cholesky().map(|c| c.l())
    } else {
        None
    };
    let whitened: Vec<Vector3<f64>> = match &cholesky {
        Some(l) => deviations
            .iter()
            .map(|d| l.solve_lower_triangular(d).expect("nonsingular factor"))
            .collect(),
        None => Vec::new(),
    };
    let ks = if whitened.len() >= KS_MIN_SAMPLES {
        let test = |i: usize| {
            let col: Vec<f64> = whitened.iter().map(|w| w[i]).collect();
            ks_test_normal(&col).expect("enough finite samples")
        };
        Some([test(0), test(1), test(2)])
    } else {
        None
    };
    SigmaReport {
        sigma,
        euler,
        failed_draws,
        mean,
        deviations,
        covariance,
        cholesky,
        whitened,
        ks,
    }
}

/// Fits every draw at one σ: extrinsic fit, then the geodesic-loss fit from it.
pub fn run_sigma(config: &SimulationConfig, sigma: f64) -> SigmaReport {
    let fits = map_indexed(config.n_draws, config.threads, |i| {
        let data = generate_draw(config, sigma, i);
        fit_extrinsic_so3(&data)
            .and_then(|ext| fit_intrinsic_so3(&data, Some(ext.gamma)))
            .map(|fit| euler_from_rotation(&fit.gamma))
    });
    let mut euler = Vec::with_capacity(fits.len());
    let mut failed = Vec::new();
    for (i, f) in fits.into_iter().enumerate() {
        match f {
            Ok(e) => euler.push(e),
            Err(_) => failed.push(i),
        }
    }
    summarize(sigma, euler, failed)
}

/// Runs the whole σ grid. Failed fits are excluded and counted per σ.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    Ok(SimulationReport {
        config: config.clone(),
        sigmas: config
            .sigma_grid
            .iter()
            .map(|&s| run_sigma(config, s))
            .collect(),
    })
}
