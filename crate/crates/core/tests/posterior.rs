mod common;

use std::f64::consts::PI;

use common::rng;
use nalgebra::Matrix3;
use orbitkit::geom::{rotation_from_euler, sample_haar_so3, EulerAngles};
use orbitkit::matdecomp::project_special_orthogonal;
use orbitkit::posterior::{
    bayes_estimator_condition, posterior_mean, posterior_mean_seeded, verify_posterior_integral,
    verify_posterior_integral_seeded, weighted_tau, weighted_tau_with, PosteriorModel, TauForm,
    TauWeight,
};
use orbitkit::regression::so3_tangent_basis;
use orbitkit::rotation::skew;
use orbitkit::{Error, Rotation};

fn within_se(a: &Matrix3<f64>, b: &Matrix3<f64>, se: &Matrix3<f64>, k: f64) -> bool {
    a.iter()
        .zip(b.iter())
        .zip(se.iter())
        .all(|((x, y), s)| (x - y).abs() <= k * s)
}

#[test]
fn flat_posterior_mean_vanishes() {
    let m = PosteriorModel::new(0.0, sample_haar_so3(&mut rng(51))).unwrap();
    let r = posterior_mean(&m, 50_000, &mut rng(52)).unwrap();
    assert!(within_se(&r.mean, &Matrix3::zeros(), &r.std_error, 3.5));
}

#[test]
fn posterior_mean_matches_orthogonality_oracle() {
    for (i, c) in [0.1, 0.2, 0.3, -0.2].into_iter().enumerate() {
        let x = sample_haar_so3(&mut rng(53 + i as u64));
        let m = PosteriorModel::new(c, x).unwrap();
        let r = posterior_mean_seeded(&m, 100_000, 60 + i as u64, 2).unwrap();
        assert!(
            within_se(&r.mean, &(x.matrix() * (c / 3.0)), &r.std_error, 3.5),
            "c = {c}"
        );
        if c > 0.0 {
            assert!(project_special_orthogonal(&r.mean).unwrap().angle_to(&x) < 0.1);
        }
    }
}

#[test]
fn posterior_mean_is_equivariant() {
    let mut r = rng(54);
    let (x, g, h) = (
        sample_haar_so3(&mut r),
        sample_haar_so3(&mut r),
        sample_haar_so3(&mut r),
    );
    let a = posterior_mean_seeded(&PosteriorModel::new(0.25, x).unwrap(), 100_000, 7, 1).unwrap();
    let b = posterior_mean_seeded(
        &PosteriorModel::new(0.25, g * x * h.transpose()).unwrap(),
        100_000,
        8,
        1,
    )
    .unwrap();
    let moved = g.matrix() * a.mean * h.matrix().transpose();
    let se = (a.std_error.norm() + b.std_error.norm()) * 3.0;
    assert!((moved - b.mean).norm() < se);
}

#[test]
fn seeded_results_do_not_depend_on_threads() {
    let m = PosteriorModel::new(0.2, sample_haar_so3(&mut rng(55))).unwrap();
    let a = posterior_mean_seeded(&m, 40_000, 3, 1).unwrap();
    let b = posterior_mean_seeded(&m, 40_000, 3, 4).unwrap();
    assert_eq!(a, b);
    let alpha = sample_haar_so3(&mut rng(56));
    let p =
        verify_posterior_integral_seeded(&m, &Rotation::identity(), &alpha, 50_000, 3, 1).unwrap();
    let q =
        verify_posterior_integral_seeded(&m, &Rotation::identity(), &alpha, 50_000, 3, 3).unwrap();
    assert_eq!(p, q);
}

#[test]
fn too_few_samples() {
    let m = PosteriorModel::new(0.2, Rotation::identity()).unwrap();
    assert!(matches!(
        posterior_mean(&m, 100, &mut rng(1)),
        Err(Error::TooFewSamples { .. })
    ));
}

#[test]
fn estimator_condition_at_projection() {
    let x = sample_haar_so3(&mut rng(57));
    let m = PosteriorModel::new(0.3, x).unwrap();
    let r = posterior_mean(&m, 20_000, &mut rng(58)).unwrap();
    let hat = project_special_orthogonal(&r.mean).unwrap();
    let tau = TauForm::s2(8);
    assert!(
        bayes_estimator_condition(&hat, &r.mean, &tau, &so3_tangent_basis(&hat))
            .unwrap()
            .norm()
            < 1e-8
    );
    let exact =
        bayes_estimator_condition(&hat, hat.matrix(), &tau, &so3_tangent_basis(&hat)).unwrap();
    assert_eq!(exact.norm(), 0.0);
    let wrong = sample_haar_so3(&mut rng(59));
    assert!(
        bayes_estimator_condition(&wrong, &r.mean, &tau, &so3_tangent_basis(&wrong))
            .unwrap()
            .norm()
            > 1e-3
    );
}

#[test]
fn weighted_tau_symmetric_at_estimator() {
    let x = sample_haar_so3(&mut rng(60));
    let m = PosteriorModel::new(0.3, x).unwrap();
    let tau = weighted_tau(&x, &m, 16);
    assert!(skew(&tau).norm() < 5e-3);
    let off = sample_haar_so3(&mut rng(61));
    assert!(skew(&weighted_tau(&off, &m, 16)).norm() > 1e-2);
}

#[test]
fn unit_weight_tau_reproduces_posterior_mean() {
    let x = sample_haar_so3(&mut rng(62));
    let m = PosteriorModel::new(0.2, x).unwrap();
    let hat = sample_haar_so3(&mut rng(63));
    let tau = weighted_tau_with(&hat, &m, 12, TauWeight::Unit);
    let mean = posterior_mean(&m, 200_000, &mut rng(64)).unwrap();
    assert!((hat.matrix() * tau - x.matrix() * (0.2 / 3.0)).norm() < 1e-10);
    assert!((hat.matrix() * tau - mean.mean).norm() < 4.0 * mean.std_error.norm());
}

#[test]
fn flat_tau_is_isotropic() {
    let m = PosteriorModel::new(0.0, Rotation::identity()).unwrap();
    let tau = weighted_tau(&sample_haar_so3(&mut rng(65)), &m, 16);
    let scale = tau.trace() / 3.0;
    assert!(scale.abs() > 0.1);
    assert!((tau - Matrix3::identity() * scale).norm() < 5e-3 * scale.abs());
}

#[test]
fn posterior_integral_vanishes_at_estimator() {
    let mut r = rng(66);
    let x = sample_haar_so3(&mut r);
    let m = PosteriorModel::new(0.3, x).unwrap();
    for _ in 0..3 {
        let alpha = sample_haar_so3(&mut r);
        let v = verify_posterior_integral(&m, &x, &alpha, 100_000, &mut r).unwrap();
        assert!(v.analytic.abs() < 1e-12);
        assert!(v.numeric.abs() < 3.0 * v.std_error);
    }
}

#[test]
fn posterior_integral_at_right_angle() {
    let mut r = rng(67);
    let (hat, alpha) = (sample_haar_so3(&mut r), sample_haar_so3(&mut r));
    let x0 = rotation_from_euler(&EulerAngles::new(0.4, PI / 2.0, 1.3));
    let x = hat * alpha * x0 * alpha.transpose();
    let c = 0.25;
    let m = PosteriorModel::new(c, x).unwrap();
    let v = verify_posterior_integral_seeded(&m, &hat, &alpha, 400_000, 9, 2).unwrap();
    assert!((v.euler_y - PI / 2.0).abs() < 1e-12);
    assert!((v.analytic - PI.powi(4) * c * c / 256.0).abs() < 1e-15);
    assert!(v.relative_error().unwrap() < 0.05, "{v:?}");
    assert!((v.numeric - v.analytic).abs() < 4.0 * v.std_error);
}
