use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::sphere::UnitVector;
use crate::matdecomp::{ComplexMatrix, RealMatrix};
use crate::rotation::Rotation;

/// Uniform point on S² from a normalized gaussian vector.
pub fn sample_uniform_s2<R: Rng + ?Sized>(rng: &mut R) -> UnitVector {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return UnitVector::from_unchecked(v / n);
        }
    }
}

/// Haar-distributed rotation from a uniformly random unit quaternion.
pub fn sample_haar_so3<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let q = Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-12 {
            let m = UnitQuaternion::from_quaternion(q)
                .to_rotation_matrix()
                .into_inner();
            return Rotation::from_matrix_unchecked(m);
        }
    }
}

/// Haar-distributed element of O(n): Gram–Schmidt on gaussian columns.
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RealMatrix {
    loop {
        let mut m = RealMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let mut ok = true;
        for j in 0..n {
            for _ in 0..2 {
                for i in 0..j {
                    let c = m.column(i).dot(&m.column(j));
                    let ci = m.column(i).into_owned();
                    m.column_mut(j).axpy(-c, &ci, 1.0);
                }
            }
            let norm = m.column(j).norm();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            m.column_mut(j).unscale_mut(norm);
        }
        if ok {
            return m;
        }
    }
}

/// Haar-distributed element of SO(n).
pub fn sample_haar_special_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RealMatrix {
    let mut m = sample_haar_orthogonal(rng, n);
    if n > 0 && m.determinant() < 0.0 {
        m.column_mut(0).neg_mut();
    }
    m
}

/// Haar-distributed element of U(n).
pub fn sample_haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let mut m = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let mut ok = true;
        for j in 0..n {
            for _ in 0..2 {
                for i in 0..j {
                    let c = m.column(i).dotc(&m.column(j));
                    let ci = m.column(i).into_owned();
                    m.column_mut(j).axpy(-c, &ci, Complex64::new(1.0, 0.0));
                }
            }
            let norm = m.column(j).norm();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            m.column_mut(j).unscale_mut(norm);
        }
        if ok {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_sequences_repeat() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            assert_eq!(sample_uniform_s2(&mut a), sample_uniform_s2(&mut b));
            assert_eq!(sample_haar_so3(&mut a), sample_haar_so3(&mut b));
        }
    }

    #[test]
    fn group_samples_are_group_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 1..6 {
            let o = sample_haar_orthogonal(&mut rng, n);
            assert!((o.transpose() * &o - RealMatrix::identity(n, n)).norm() < 1e-12);
            let s = sample_haar_special_orthogonal(&mut rng, n);
            assert!((s.determinant() - 1.0).abs() < 1e-12);
            let u = sample_haar_unitary(&mut rng, n);
            assert!((u.adjoint() * &u - ComplexMatrix::identity(n, n)).norm() < 1e-12);
        }
        let r = sample_haar_so3(&mut rng);
        assert!(Rotation::new(r.into_inner()).is_ok());
    }
}
