//! Intrinsic geometry of S² and SO(3).

mod euler;
mod quadrature;
mod sampling;
mod sphere;

pub use euler::{euler_from_rotation, rotation_from_euler, EulerAngles, GIMBAL_TOLERANCE};
pub use quadrature::{gauss_legendre, quad_s2, quad_so3, QuadratureRule};
pub use sampling::{
    sample_haar_orthogonal, sample_haar_so3, sample_haar_special_orthogonal, sample_haar_unitary,
    sample_uniform_s2,
};
pub use sphere::{alpha_over_sin, s2_dist, s2_exp, s2_log, UnitVector};
