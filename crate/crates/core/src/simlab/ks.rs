//! One-sample Kolmogorov–Smirnov test against the standard normal.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;

use crate::error::{Error, Result};

/// Smallest sample accepted by [`ks_test_normal`].
pub const KS_MIN_SAMPLES: usize = 8;
const SERIES_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `D = sup |F_n − Φ|`, the largest gap at either side of each step.
pub fn ks_statistic_normal(samples: &[f64]) -> Result<f64> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            required: 1,
            found: 0,
        });
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = normal_cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    }))
}

/// `P(K > λ)` for the limiting Kolmogorov distribution.
///
/// The alternating series converges fast for large λ; for λ < 1 the Jacobi
/// theta form of the distribution function is used instead.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        let q = -PI * PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1.. {
            let m = (2 * k - 1) as f64;
            let term = (q * m * m).exp();
            cdf += term;
            if term < SERIES_CUTOFF {
                break;
            }
        }
        return (1.0 - (2.0 * PI).sqrt() / lambda * cdf).clamp(0.0, 1.0);
    }
    let mut p = 0.0;
    for k in 1.. {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
        if term < SERIES_CUTOFF {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// KS statistic and asymptotic p-value `P(K > √n·D)`.
pub fn ks_test_normal(samples: &[f64]) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: KS_MIN_SAMPLES,
            found: samples.len(),
        });
    }
    let d = ks_statistic_normal(samples)?;
    let n = samples.len();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival((n as f64).sqrt() * d),
        n,
    })
}
