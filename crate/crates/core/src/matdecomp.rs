//! Dense decompositions over real and complex scalars.
//!
//! Everything here is a thin, validated layer over nalgebra's symmetric
//! eigensolver and SVD, with eigen- and singular values always sorted
//! descending.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rotation::Rotation;

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative tolerance for the symmetry checks.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest admissible eigenvalue of a positive-definite input, relative to its norm.
pub const PD_TOLERANCE: f64 = 1e-10;
/// Reciprocal condition number below which a matrix counts as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// `m = Q diag(λ) Qᵀ` with λ descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomp {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: RealMatrix,
}

impl SpectralDecomp {
    pub fn reconstruct(&self) -> RealMatrix {
        let q = &self.eigenvectors;
        q * RealMatrix::from_diagonal(&self.eigenvalues) * q.transpose()
    }
}

/// Thin singular-value decomposition `m = u diag(σ) vᵀ`, σ descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdDecomp {
    pub u: RealMatrix,
    pub sigma: DVector<f64>,
    pub v: RealMatrix,
}

impl SvdDecomp {
    pub fn reconstruct(&self) -> RealMatrix {
        &self.u * RealMatrix::from_diagonal(&self.sigma) * self.v.transpose()
    }
}

/// `m = g p` with `g` orthogonal and `p` symmetric positive semi-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomp {
    pub orthogonal: RealMatrix,
    pub positive: RealMatrix,
}

/// `m = g diag(σ) gᵀ` with `g` unitary and σ ≥ 0 descending.
#[derive(Debug, Clone, PartialEq)]
pub struct TakagiDecomp {
    pub unitary: ComplexMatrix,
    pub values: DVector<f64>,
}

impl TakagiDecomp {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&self.values.map(|s| Complex64::new(s, 0.0)));
        &self.unitary * d * self.unitary.transpose()
    }
}

/// `gᵀ m g = α` with α block diagonal, blocks `[[0, aᵢ], [−aᵢ, 0]]`.
///
/// `g` is special orthogonal, so only `a₁ ≥ … ≥ aₙ₋₁ ≥ |aₙ|` can be arranged:
/// the last block carries the sign of the Pfaffian of `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewCanonical {
    pub rotation: RealMatrix,
    pub blocks: DVector<f64>,
}

impl SkewCanonical {
    pub fn block_matrix(&self) -> RealMatrix {
        block_diagonal(self.blocks.as_slice())
    }

    pub fn reconstruct(&self) -> RealMatrix {
        &self.rotation * self.block_matrix() * self.rotation.transpose()
    }
}

/// Block-diagonal skew matrix with blocks `[[0, aᵢ], [−aᵢ, 0]]`.
pub fn block_diagonal(a: &[f64]) -> RealMatrix {
    let mut m = RealMatrix::zeros(2 * a.len(), 2 * a.len());
    for (i, &ai) in a.iter().enumerate() {
        m[(2 * i, 2 * i + 1)] = ai;
        m[(2 * i + 1, 2 * i)] = -ai;
    }
    m
}

pub(crate) fn shape(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}

fn require_square(m: &RealMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::ShapeMismatch {
            expected: "nonempty square matrix".into(),
            found: shape(m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

fn require_finite(m: &RealMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn require_finite_complex(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Largest entry of `m − mᵀ` relative to `max(1, largest entry of m)`.
pub fn asymmetry(m: &RealMatrix) -> f64 {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() / scale
}

/// Largest entry of `m + mᵀ` relative to `max(1, largest entry of m)`.
pub fn skewness_defect(m: &RealMatrix) -> f64 {
    let scale = m.amax().max(1.0);
    (m + m.transpose()).amax() / scale
}

/// Largest entry of `m − mᵀ` (plain transpose) relative to `max(1, largest modulus)`.
pub fn complex_asymmetry(m: &ComplexMatrix) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let d = m - m.transpose();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

fn descending_order(values: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    idx
}

/// Spectral decomposition of a real symmetric matrix, eigenvalues descending.
pub fn symmetric_eigen(m: &RealMatrix) -> Result<SpectralDecomp> {
    require_square(m)?;
    require_finite(m)?;
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let order = descending_order(&eig.eigenvalues);
    let eigenvalues =
        DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = eig.eigenvectors.select_columns(&order);
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Thin SVD with singular values sorted descending.
pub fn svd(m: &RealMatrix) -> Result<SvdDecomp> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::ShapeMismatch {
            expected: "nonempty matrix".into(),
            found: shape(m.nrows(), m.ncols()),
        });
    }
    require_finite(m)?;
    let s = m.clone().svd(true, true);
    let (u, v_t) = match (s.u, s.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Unsupported(
                "SVD did not return singular vectors".into(),
            ))
        }
    };
    let order = descending_order(&s.singular_values);
    let sigma = DVector::from_iterator(order.len(), order.iter().map(|&i| s.singular_values[i]));
    Ok(SvdDecomp {
        u: u.select_columns(&order),
        sigma,
        v: v_t.transpose().select_columns(&order),
    })
}

fn spd_spectrum(m: &RealMatrix) -> Result<SpectralDecomp> {
    let d = symmetric_eigen(m)?;
    let n = d.eigenvalues.len();
    let scale = d.eigenvalues.amax();
    let smallest = d.eigenvalues[n - 1];
    if !(smallest > PD_TOLERANCE * scale) {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    Ok(d)
}

fn spectral_function(d: &SpectralDecomp, f: impl Fn(f64) -> f64) -> RealMatrix {
    let q = &d.eigenvectors;
    let r = q * RealMatrix::from_diagonal(&d.eigenvalues.map(f)) * q.transpose();
    (&r + r.transpose()) * 0.5
}

/// The symmetric positive-definite square root.
pub fn sym_sqrt(m: &RealMatrix) -> Result<RealMatrix> {
    Ok(spectral_function(&spd_spectrum(m)?, f64::sqrt))
}

/// Inverse of [`sym_sqrt`].
pub fn sym_inv_sqrt(m: &RealMatrix) -> Result<RealMatrix> {
    Ok(spectral_function(&spd_spectrum(m)?, |l| 1.0 / l.sqrt()))
}

/// Polar decomposition of an invertible square matrix.
pub fn polar(m: &RealMatrix) -> Result<PolarDecomp> {
    require_square(m)?;
    let d = svd(m)?;
    let n = d.sigma.len();
    if !(d.sigma[n - 1] > SINGULAR_TOLERANCE * d.sigma[0]) {
        return Err(Error::SingularInput);
    }
    let orthogonal = &d.u * d.v.transpose();
    let p = &d.v * RealMatrix::from_diagonal(&d.sigma) * d.v.transpose();
    Ok(PolarDecomp {
        orthogonal,
        positive: (&p + p.transpose()) * 0.5,
    })
}

/// Frobenius-nearest element of SO(n): `u diag(1, …, 1, det(uvᵀ)) vᵀ`.
pub fn nearest_special_orthogonal(m: &RealMatrix) -> Result<RealMatrix> {
    let n = require_square(m)?;
    require_finite(m)?;
    if n == 1 {
        return Ok(RealMatrix::identity(1, 1));
    }
    let d = svd(m)?;
    let mut u = d.u;
    let sign = (&u * d.v.transpose()).determinant().signum();
    let margin = d.sigma[n - 2] + sign * d.sigma[n - 1];
    if !(margin > SINGULAR_TOLERANCE * d.sigma[0]) {
        return Err(Error::DegenerateProjection(format!(
            "sigma[n-1] + det(uv^T) sigma[n] = {margin:e}"
        )));
    }
    if sign < 0.0 {
        let mut last = u.column_mut(n - 1);
        last *= -1.0;
    }
    Ok(u * d.v.transpose())
}

/// Nearest rotation to a 3×3 matrix.
pub fn project_special_orthogonal(m: &Matrix3<f64>) -> Result<Rotation> {
    let dm = RealMatrix::from_column_slice(3, 3, m.as_slice());
    let r = nearest_special_orthogonal(&dm)?;
    Ok(Rotation::from_matrix_unchecked(Matrix3::from_column_slice(
        r.as_slice(),
    )))
}

fn require_complex_symmetric(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::ShapeMismatch {
            expected: "nonempty square matrix".into(),
            found: shape(m.nrows(), m.ncols()),
        });
    }
    require_finite_complex(m)?;
    let asym = complex_asymmetry(m);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotComplexSymmetric(asym));
    }
    Ok(m.nrows())
}

/// Leading `k` Takagi vectors and all `n` Takagi values of a complex symmetric matrix.
///
/// For `m = X + iY` the real symmetric matrix `[[X, Y], [Y, −X]]` has spectrum ±σᵢ;
/// an eigenvector `[p; q]` for `+σ` gives a Takagi vector `p + iq` with `m ū = σ u`.
/// Repeated positive values are handled because any orthonormal basis of the
/// `+σ` eigenspace yields orthonormal Takagi vectors. Vectors for a zero value
/// are not determined, so only columns with positive value are reliable.
pub(crate) fn takagi_leading(m: &ComplexMatrix, k: usize) -> Result<TakagiDecomp> {
    let n = require_complex_symmetric(m)?;
    let sym = (m + m.transpose()) * Complex64::new(0.5, 0.0);
    let mut big = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = sym[(i, j)];
            big[(i, j)] = z.re;
            big[(i, n + j)] = z.im;
            big[(n + i, j)] = z.im;
            big[(n + i, n + j)] = -z.re;
        }
    }
    let d = symmetric_eigen(&big)?;
    let values = DVector::from_iterator(n, (0..n).map(|i| d.eigenvalues[i].max(0.0)));
    let mut unitary = ComplexMatrix::zeros(n, k);
    for c in 0..k {
        for r in 0..n {
            let p = d.eigenvectors[(r, c)];
            let q = d.eigenvectors[(n + r, c)];
            unitary[(r, c)] = Complex64::new(p, q);
        }
    }
    Ok(TakagiDecomp { unitary, values })
}

/// Takagi factorization of a nonsingular complex symmetric matrix.
pub fn takagi(m: &ComplexMatrix) -> Result<TakagiDecomp> {
    let n = require_complex_symmetric(m)?;
    let t = takagi_leading(m, n)?;
    if !(t.values[n - 1] > SINGULAR_TOLERANCE * t.values[0]) {
        return Err(Error::SingularInput);
    }
    Ok(t)
}

fn orthonormalize_against(v: &mut DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
    let norm = v.norm();
    if norm > 0.0 {
        *v /= norm;
    }
    norm
}

/// Canonical form of a real skew-symmetric matrix of even dimension.
///
/// Built from the Hermitian eigendecomposition of `i·m`: an eigenvector
/// `w = p + iq` for eigenvalue `a > 0` spans an invariant plane with
/// `m p = a q`, `m q = −a p`. Kernel directions are completed by Gram–Schmidt.
pub fn skew_canonical(m: &RealMatrix) -> Result<SkewCanonical> {
    let dim = require_square(m)?;
    if dim % 2 != 0 {
        return Err(Error::ShapeMismatch {
            expected: "even dimension".into(),
            found: shape(dim, dim),
        });
    }
    require_finite(m)?;
    let defect = skewness_defect(m);
    if defect > SYMMETRY_TOLERANCE {
        return Err(Error::NotSkewSymmetric(defect));
    }
    let n = dim / 2;
    let x = (m - m.transpose()) * 0.5;
    let h = x.map(|v| Complex64::new(0.0, v));
    let eig = SymmetricEigen::new(h);
    let order = descending_order(&eig.eigenvalues);
    let scale = eig.eigenvalues.amax();
    let zero_tol = 1e-10 * scale;

    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for &idx in order.iter().take(n) {
        if !(eig.eigenvalues[idx] > zero_tol) {
            break;
        }
        let w = eig.eigenvectors.column(idx);
        let mut q = w.map(|z| z.im);
        let mut p = w.map(|z| z.re);
        orthonormalize_against(&mut q, &cols);
        cols.push(q);
        orthonormalize_against(&mut p, &cols);
        cols.push(p);
    }
    while cols.len() < dim {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for j in 0..dim {
            let mut e = DVector::zeros(dim);
            e[j] = 1.0;
            let norm = orthonormalize_against(&mut e, &cols);
            if norm > best_norm {
                best_norm = norm;
                best = Some(e);
            }
        }
        cols.push(best.expect("orthogonal complement is nonempty"));
    }
    let mut g = RealMatrix::from_columns(&cols);
    if g.determinant() < 0.0 {
        g.swap_columns(dim - 2, dim - 1);
    }
    let alpha = g.transpose() * &x * &g;
    let blocks = DVector::from_iterator(n, (0..n).map(|i| alpha[(2 * i, 2 * i + 1)]));
    Ok(SkewCanonical {
        rotation: g,
        blocks,
    })
}
