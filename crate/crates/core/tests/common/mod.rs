#![allow(dead_code)]

use nalgebra::Vector3;
use num_complex::Complex64;
use orbitkit::geom::UnitVector;
use orbitkit::matdecomp::{ComplexMatrix, RealMatrix};
use orbitkit::orbits::{OrbitMatrix, OrbitSpec};
use orbitkit::regression::RegressionDataset;
use orbitkit::Rotation;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// One spec per orbit kind, with small dimensions.
pub fn catalogue() -> Vec<OrbitSpec> {
    vec![
        OrbitSpec::Sphere { n: 4 },
        OrbitSpec::Stiefel { k: 2, n: 4 },
        OrbitSpec::Grassmannian { k: 2, n: 5 },
        OrbitSpec::SvdOrbit {
            rows: 3,
            cols: 4,
            base: vec![3.0, 2.0, 1.0],
        },
        OrbitSpec::LagrangianGrassmannian { n: 3 },
        OrbitSpec::IsotropicGrassmannian { k: 2, n: 4 },
        OrbitSpec::ComplexStructures { n: 2 },
        OrbitSpec::CompactGroup { n: 3 },
    ]
}

/// A point of the orbit moved by a structured perturbation of size `scale`
/// that keeps it inside the tube (symmetric, complex symmetric or skew as the
/// orbit's ambient space requires).
pub fn near_orbit<R: Rng + ?Sized>(spec: &OrbitSpec, rng: &mut R, scale: f64) -> OrbitMatrix {
    let p = spec.sample_orbit_point(rng);
    let (r, c, _) = spec.ambient_shape();
    match (spec, p) {
        (OrbitSpec::Grassmannian { .. }, OrbitMatrix::Real(m)) => {
            let e = gaussian(rng, r, c);
            OrbitMatrix::Real(m + (&e + e.transpose()) * (scale / 2.0))
        }
        (OrbitSpec::ComplexStructures { .. }, OrbitMatrix::Real(m)) => {
            let e = gaussian(rng, r, c);
            OrbitMatrix::Real(m + (&e - e.transpose()) * (scale / 2.0))
        }
        (OrbitSpec::Sphere { .. }, OrbitMatrix::Real(m)) => {
            let stretch = 0.5 + 1.5 * rng.random::<f64>();
            OrbitMatrix::Real((m + gaussian(rng, r, c) * scale) * stretch)
        }
        (_, OrbitMatrix::Real(m)) => OrbitMatrix::Real(m + gaussian(rng, r, c) * scale),
        (_, OrbitMatrix::Complex(m)) => {
            let e = complex_gaussian(rng, r, c);
            OrbitMatrix::Complex(m + (&e + e.transpose()) * Complex64::new(scale / 2.0, 0.0))
        }
    }
}

/// Noisy direction pairs `y = normalize(γθ + σε)` with uniform design.
pub fn noisy_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    gamma: &Rotation,
    sigma: f64,
) -> RegressionDataset {
    let design: Vec<UnitVector> = (0..k)
        .map(|_| orbitkit::geom::sample_uniform_s2(rng))
        .collect();
    let obs = design
        .iter()
        .map(|t| {
            let e = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            UnitVector::normalize(gamma.matrix() * t.coords() + e * sigma).unwrap()
        })
        .collect();
    RegressionDataset::new(design, obs).unwrap()
}
