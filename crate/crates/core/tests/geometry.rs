mod common;

use std::f64::consts::PI;

use common::{gaussian, rng};
use nalgebra::{Matrix3, Vector3};
use orbitkit::geom::{
    euler_from_rotation, gauss_legendre, quad_s2, quad_so3, rotation_from_euler, s2_dist, s2_exp,
    s2_log, sample_haar_so3, sample_uniform_s2, EulerAngles, UnitVector,
};
use orbitkit::rotation::{so3_exp, so3_log};
use orbitkit::{Error, Rotation};
use proptest::prelude::*;

fn mat3(m: &orbitkit::matdecomp::RealMatrix) -> Matrix3<f64> {
    Matrix3::from_iterator(m.iter().copied())
}

#[test]
fn sphere_second_and_fourth_moments() {
    let rule = quad_s2(4);
    let mut r = rng(21);
    for _ in 0..20 {
        let a = mat3(&gaussian(&mut r, 3, 3));
        let second = rule.integrate(|t| (a * t.coords()).norm_squared());
        let fourth = rule.integrate(|t| t.coords().dot(&(a * t.coords())).powi(2));
        let tr = a.trace();
        assert!((second - (a.transpose() * a).trace() / 3.0).abs() < 1e-12);
        let expect = (tr * tr + (a * a).trace() + (a.transpose() * a).trace()) / 15.0;
        assert!((fourth - expect).abs() < 1e-12);
    }
}

#[test]
fn sphere_rule_matches_monte_carlo() {
    let f = |v: &Vector3<f64>| (3.0 * v.x).exp() * v.y.cos();
    let exact = quad_s2(40).integrate(|t| f(t.coords()));
    let mut r = rng(22);
    let n = 200_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| f(sample_uniform_s2(&mut r).coords()))
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * sd / (n as f64).sqrt());
}

#[test]
fn so3_rule_orthogonality_relations() {
    // ∫ γᵢⱼ γₖₗ dγ = δᵢₖ δⱼₗ / 3 and ∫ γ dγ = 0.
    let rule = quad_so3(2);
    for i in 0..3 {
        for j in 0..3 {
            assert!(rule.integrate(|g| g.matrix()[(i, j)]).abs() < 1e-14);
            for k in 0..3 {
                for l in 0..3 {
                    let v = rule.integrate(|g| g.matrix()[(i, j)] * g.matrix()[(k, l)]);
                    let expect = if i == k && j == l { 1.0 / 3.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn so3_rule_matches_haar_sampling() {
    // E[tr(γ)²] = 1 under Haar measure.
    let exact = quad_so3(4).integrate(|g| g.matrix().trace().powi(2));
    assert!((exact - 1.0).abs() < 1e-13);
    let mut r = rng(23);
    let n = 100_000;
    let mean = (0..n)
        .map(|_| sample_haar_so3(&mut r).matrix().trace().powi(2))
        .sum::<f64>()
        / n as f64;
    assert!((mean - 1.0).abs() < 0.03);
}

#[test]
fn gauss_legendre_degree() {
    for n in 1..12 {
        let (t, w) = gauss_legendre(n);
        for p in 0..2 * n {
            let q: f64 = t.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            let exact = if p % 2 == 1 {
                0.0
            } else {
                2.0 / (p + 1) as f64
            };
            assert!((q - exact).abs() < 1e-13, "n={n} p={p}");
        }
    }
}

#[test]
fn euler_known_values() {
    let r = rotation_from_euler(&EulerAngles::new(0.0, PI / 2.0, 0.0));
    assert!((r.matrix() * Vector3::z() - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
    let e = euler_from_rotation(&Rotation::identity());
    assert!(e.gimbal_lock);
    assert_eq!(e.b, 0.0);
}

#[test]
fn s2_cut_locus_and_tangency() {
    let x = UnitVector::e3();
    assert_eq!(s2_log(&x, &-x), Err(Error::CutLocus));
    assert!(matches!(
        s2_exp(&x, &Vector3::new(0.0, 0.0, 0.5)),
        Err(Error::NotTangent(_))
    ));
    assert_eq!(s2_dist(&x, &x), 0.0);
    assert!((s2_dist(&x, &-x) - PI).abs() < 1e-15);
}

#[test]
fn so3_log_near_pi() {
    let axis = Vector3::new(0.3, -0.5, 0.8).normalize();
    for angle in [PI - 1e-6, PI - 1e-4, 3.0, 2.0] {
        let w = axis * angle;
        let back = so3_log(&so3_exp(&w)).unwrap();
        assert!((back - w).norm() < 1e-8, "angle {angle}");
    }
    assert_eq!(so3_log(&so3_exp(&(axis * PI))), Err(Error::CutLocus));
}

proptest! {
    #[test]
    fn prop_euler_round_trip(a in 0.0..2.0 * PI, b in 1e-3..PI - 1e-3, c in 0.0..2.0 * PI) {
        let r = rotation_from_euler(&EulerAngles::new(a, b, c));
        let e = euler_from_rotation(&r);
        let back = rotation_from_euler(&e);
        prop_assert!((back.matrix() - r.matrix()).amax() < 1e-12);
        prop_assert!((e.b - b).abs() < 1e-9);
    }

    #[test]
    fn prop_so3_exp_log(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64, t in 0.0..PI - 1e-6) {
        let v = Vector3::new(x, y, z);
        prop_assume!(v.norm() > 1e-3);
        let w = v.normalize() * t;
        let r = so3_exp(&w);
        prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-12);
        prop_assert!((so3_log(&r).unwrap() - w).norm() < 1e-8);
    }

    #[test]
    fn prop_s2_exp_log(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = sample_uniform_s2(&mut r);
        let y = sample_uniform_s2(&mut r);
        prop_assume!(x.dot(&y) > -1.0 + 1e-6);
        let w = s2_log(&x, &y).unwrap();
        prop_assert!((w.norm() - s2_dist(&x, &y)).abs() < 1e-12);
        let back = s2_exp(&x, &w).unwrap();
        prop_assert!((back.coords() - y.coords()).norm() < 1e-9);
    }
}
