use std::f64::consts::PI;

use nalgebra::Vector3;

use super::euler::{rotation_from_euler, EulerAngles};
use super::sphere::UnitVector;
use crate::rotation::Rotation;

/// Nodes with positive weights summing to 1, exact for polynomials up to `degree`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl<T> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate<F: Fn(&T) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product rule on S²: Gauss–Legendre in the polar cosine, uniform in azimuth.
///
/// Exact for polynomials of total degree ≤ `order` in the coordinates.
/// Orders below 2 are raised to 2.
pub fn quad_s2(order: usize) -> QuadratureRule<UnitVector> {
    let order = order.max(2);
    let (t, w) = gauss_legendre(order / 2 + 1);
    let m = order + 1;
    let mut nodes = Vec::with_capacity(t.len() * m);
    let mut weights = Vec::with_capacity(t.len() * m);
    for (ti, wi) in t.iter().zip(&w) {
        let s = (1.0 - ti * ti).sqrt();
        for j in 0..m {
            let phi = 2.0 * PI * j as f64 / m as f64;
            nodes.push(UnitVector::from_unchecked(Vector3::new(
                s * phi.cos(),
                s * phi.sin(),
                *ti,
            )));
            weights.push(wi / 2.0 / m as f64);
        }
    }
    QuadratureRule {
        nodes,
        weights,
        degree: order,
    }
}

/// Product rule for Haar measure on SO(3) in 3-1-3 Euler angles.
///
/// Gauss–Legendre in cos b and uniform grids in a and c; exact for polynomials
/// of degree ≤ `order` in the matrix entries. Orders below 2 are raised to 2.
pub fn quad_so3(order: usize) -> QuadratureRule<Rotation> {
    let order = order.max(2);
    let (t, w) = gauss_legendre(order / 2 + 1);
    let m = order + 1;
    let mut nodes = Vec::with_capacity(t.len() * m * m);
    let mut weights = Vec::with_capacity(t.len() * m * m);
    for (ti, wi) in t.iter().zip(&w) {
        let b = ti.clamp(-1.0, 1.0).acos();
        for ja in 0..m {
            let a = 2.0 * PI * ja as f64 / m as f64;
            for jc in 0..m {
                let c = 2.0 * PI * jc as f64 / m as f64;
                nodes.push(rotation_from_euler(&EulerAngles::new(a, b, c)));
                weights.push(wi / 2.0 / (m * m) as f64);
            }
        }
    }
    QuadratureRule {
        nodes,
        weights,
        degree: order,
    }
}
