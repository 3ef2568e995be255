//! Nearest-point projections onto compact group orbits in matrix spaces.
//!
//! Each [`OrbitSpec`] names an orbit `G·θ` of a fixed base point θ. The
//! projection is defined on the open set where the relevant eigen- or
//! singular-value gap is positive (the tube); points on the boundary of
//! that set are rejected.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{sample_haar_orthogonal, sample_haar_special_orthogonal, sample_haar_unitary};
use crate::matdecomp::{
    asymmetry, block_diagonal, complex_asymmetry, nearest_special_orthogonal, shape,
    skew_canonical, skewness_defect, svd, symmetric_eigen, takagi_leading, ComplexMatrix,
    RealMatrix, SYMMETRY_TOLERANCE,
};

/// Gap margin relative to the scale of the input.
pub const GAP_TOLERANCE: f64 = 1e-8;
/// Tolerance of [`on_orbit`] membership checks.
pub const ON_ORBIT_TOLERANCE: f64 = 1e-8;

/// The catalogue of supported orbits.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitSpec {
    /// Unit sphere in `Eⁿ`, points stored as `n×1` columns.
    Sphere { n: usize },
    /// Orthonormal `k`-frames in `Eⁿ` as `n×k` matrices.
    Stiefel { k: usize, n: usize },
    /// Rank-`k` orthogonal projectors on `Eⁿ`.
    Grassmannian { k: usize, n: usize },
    /// `rows×cols` matrices with singular values `base` (descending, length `min(rows, cols)`).
    SvdOrbit {
        rows: usize,
        cols: usize,
        base: Vec<f64>,
    },
    /// Complex symmetric unitary `n×n` matrices, the orbit of `I` under `U(n)` congruence.
    LagrangianGrassmannian { n: usize },
    /// Complex symmetric `n×n` matrices congruent to `diag(1ₖ, 0)`.
    IsotropicGrassmannian { k: usize, n: usize },
    /// Orthogonal complex structures on `E²ⁿ` in the component of the standard one.
    ComplexStructures { n: usize },
    /// The group `SO(n)` itself.
    CompactGroup { n: usize },
}

/// A real or complex matrix, as demanded by the orbit type.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitMatrix {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

impl OrbitMatrix {
    pub fn as_real(&self) -> Option<&RealMatrix> {
        match self {
            OrbitMatrix::Real(m) => Some(m),
            OrbitMatrix::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&ComplexMatrix> {
        match self {
            OrbitMatrix::Complex(m) => Some(m),
            OrbitMatrix::Real(_) => None,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            OrbitMatrix::Real(m) => m.shape(),
            OrbitMatrix::Complex(m) => m.shape(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            OrbitMatrix::Real(m) => m.norm(),
            OrbitMatrix::Complex(m) => m.norm(),
        }
    }

    /// Frobenius distance; infinite when the kinds or shapes differ.
    pub fn distance(&self, other: &OrbitMatrix) -> f64 {
        match (self, other) {
            (OrbitMatrix::Real(a), OrbitMatrix::Real(b)) if a.shape() == b.shape() => {
                (a - b).norm()
            }
            (OrbitMatrix::Complex(a), OrbitMatrix::Complex(b)) if a.shape() == b.shape() => {
                (a - b).norm()
            }
            _ => f64::INFINITY,
        }
    }
}

/// A point on an orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint {
    spec: OrbitSpec,
    value: OrbitMatrix,
}

impl OrbitPoint {
    /// Wraps `value` after checking it lies on the orbit.
    pub fn new(spec: OrbitSpec, value: OrbitMatrix) -> Result<Self> {
        spec.validate()?;
        spec.check_shape(&value)?;
        if !on_orbit(&spec, &value, ON_ORBIT_TOLERANCE) {
            return Err(Error::DomainError(format!(
                "value is not on the {} orbit",
                spec.name()
            )));
        }
        Ok(OrbitPoint { spec, value })
    }

    pub fn spec(&self) -> &OrbitSpec {
        &self.spec
    }

    pub fn value(&self) -> &OrbitMatrix {
        &self.value
    }

    pub fn into_value(self) -> OrbitMatrix {
        self.value
    }
}

/// Result of a tube membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeCheck {
    pub inside: bool,
    /// The gap quantity that decided membership (smallest one if several).
    pub margin: f64,
    pub diagnostic: String,
}

/// An element of the group acting on an orbit's ambient space.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// Orthogonal matrix acting by left multiplication or congruence.
    Orthogonal(RealMatrix),
    /// `(g₁, g₂)` acting by `x ↦ g₁ x g₂ᵀ`.
    Pair(RealMatrix, RealMatrix),
    /// Unitary matrix acting by `x ↦ g x gᵀ`.
    Unitary(ComplexMatrix),
}

impl OrbitSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitSpec::Sphere { .. } => "sphere",
            OrbitSpec::Stiefel { .. } => "stiefel",
            OrbitSpec::Grassmannian { .. } => "grassmannian",
            OrbitSpec::SvdOrbit { .. } => "svd",
            OrbitSpec::LagrangianGrassmannian { .. } => "lagrangian",
            OrbitSpec::IsotropicGrassmannian { .. } => "isotropic",
            OrbitSpec::ComplexStructures { .. } => "complex-structures",
            OrbitSpec::CompactGroup { .. } => "group",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            OrbitSpec::Sphere { n }
            | OrbitSpec::LagrangianGrassmannian { n }
            | OrbitSpec::ComplexStructures { n }
            | OrbitSpec::CompactGroup { n } => {
                if *n == 0 {
                    return bad("dimension must be at least 1".into());
                }
            }
            OrbitSpec::Stiefel { k, n }
            | OrbitSpec::Grassmannian { k, n }
            | OrbitSpec::IsotropicGrassmannian { k, n } => {
                if *k == 0 || k > n {
                    return bad(format!("need 1 <= k <= n, got k={k}, n={n}"));
                }
            }
            OrbitSpec::SvdOrbit { rows, cols, base } => {
                if *rows == 0 || *cols == 0 {
                    return bad("dimensions must be at least 1".into());
                }
                if base.len() != (*rows).min(*cols) {
                    return bad(format!(
                        "expected {} base singular values, got {}",
                        (*rows).min(*cols),
                        base.len()
                    ));
                }
                if base.iter().any(|s| !s.is_finite() || *s < 0.0) {
                    return bad("base singular values must be finite and nonnegative".into());
                }
                if base.windows(2).any(|w| w[0] < w[1]) {
                    return bad("base singular values must be descending".into());
                }
            }
        }
        Ok(())
    }

    /// `(rows, cols, complex)` of the ambient matrix space.
    pub fn ambient_shape(&self) -> (usize, usize, bool) {
        match self {
            OrbitSpec::Sphere { n } => (*n, 1, false),
            OrbitSpec::Stiefel { k, n } => (*n, *k, false),
            OrbitSpec::Grassmannian { n, .. } => (*n, *n, false),
            OrbitSpec::SvdOrbit { rows, cols, .. } => (*rows, *cols, false),
            OrbitSpec::LagrangianGrassmannian { n } => (*n, *n, true),
            OrbitSpec::IsotropicGrassmannian { n, .. } => (*n, *n, true),
            OrbitSpec::ComplexStructures { n } => (2 * n, 2 * n, false),
            OrbitSpec::CompactGroup { n } => (*n, *n, false),
        }
    }

    fn check_shape(&self, x: &OrbitMatrix) -> Result<()> {
        let (r, c, complex) = self.ambient_shape();
        let ok = x.shape() == (r, c) && complex == matches!(x, OrbitMatrix::Complex(_));
        if ok {
            return Ok(());
        }
        let kind = |cx: bool| if cx { "complex" } else { "real" };
        let (xr, xc) = x.shape();
        Err(Error::ShapeMismatch {
            expected: format!("{} {}", kind(complex), shape(r, c)),
            found: format!(
                "{} {}",
                kind(matches!(x, OrbitMatrix::Complex(_))),
                shape(xr, xc)
            ),
        })
    }

    /// The base point θ.
    pub fn base_point(&self) -> OrbitMatrix {
        match self {
            OrbitSpec::Sphere { n } => {
                let mut v = RealMatrix::zeros(*n, 1);
                v[(0, 0)] = 1.0;
                OrbitMatrix::Real(v)
            }
            OrbitSpec::Stiefel { k, n } => OrbitMatrix::Real(RealMatrix::identity(*n, *k)),
            OrbitSpec::Grassmannian { k, n } => OrbitMatrix::Real(leading_projector(*n, *k)),
            OrbitSpec::SvdOrbit { rows, cols, base } => {
                let mut m = RealMatrix::zeros(*rows, *cols);
                for (i, s) in base.iter().enumerate() {
                    m[(i, i)] = *s;
                }
                OrbitMatrix::Real(m)
            }
            OrbitSpec::LagrangianGrassmannian { n } => {
                OrbitMatrix::Complex(ComplexMatrix::identity(*n, *n))
            }
            OrbitSpec::IsotropicGrassmannian { k, n } => {
                OrbitMatrix::Complex(leading_projector(*n, *k).map(|v| Complex64::new(v, 0.0)))
            }
            OrbitSpec::ComplexStructures { n } => {
                OrbitMatrix::Real(block_diagonal(&vec![-1.0; *n]))
            }
            OrbitSpec::CompactGroup { n } => OrbitMatrix::Real(RealMatrix::identity(*n, *n)),
        }
    }

    /// A Haar-random element of the acting group.
    pub fn sample_group_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match self {
            OrbitSpec::Sphere { n }
            | OrbitSpec::Stiefel { n, .. }
            | OrbitSpec::Grassmannian { n, .. } => {
                GroupElement::Orthogonal(sample_haar_orthogonal(rng, *n))
            }
            OrbitSpec::SvdOrbit { rows, cols, .. } => GroupElement::Pair(
                sample_haar_orthogonal(rng, *rows),
                sample_haar_orthogonal(rng, *cols),
            ),
            OrbitSpec::LagrangianGrassmannian { n }
            | OrbitSpec::IsotropicGrassmannian { n, .. } => {
                GroupElement::Unitary(sample_haar_unitary(rng, *n))
            }
            OrbitSpec::ComplexStructures { n } => {
                GroupElement::Orthogonal(sample_haar_special_orthogonal(rng, 2 * n))
            }
            OrbitSpec::CompactGroup { n } => {
                GroupElement::Orthogonal(sample_haar_special_orthogonal(rng, *n))
            }
        }
    }

    /// A random point of the orbit, `g·θ` for Haar-random `g`.
    pub fn sample_orbit_point<R: Rng + ?Sized>(&self, rng: &mut R) -> OrbitMatrix {
        let g = self.sample_group_element(rng);
        act(self, &g, &self.base_point()).expect("group element matches the spec")
    }
}

fn leading_projector(n: usize, k: usize) -> RealMatrix {
    let mut m = RealMatrix::zeros(n, n);
    for i in 0..k {
        m[(i, i)] = 1.0;
    }
    m
}

fn check_orthogonal(g: &RealMatrix, n: usize) -> Result<()> {
    if g.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: shape(n, n),
            found: shape(g.nrows(), g.ncols()),
        });
    }
    let defect = (g.transpose() * g - RealMatrix::identity(n, n)).amax();
    if defect > ON_ORBIT_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "group element is not orthogonal ({defect:e})"
        )));
    }
    Ok(())
}

fn check_unitary(g: &ComplexMatrix, n: usize) -> Result<()> {
    if g.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: shape(n, n),
            found: shape(g.nrows(), g.ncols()),
        });
    }
    let defect = (g.adjoint() * g - ComplexMatrix::identity(n, n)).norm();
    if defect > ON_ORBIT_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "group element is not unitary ({defect:e})"
        )));
    }
    Ok(())
}

/// The group action on the ambient space.
pub fn act(spec: &OrbitSpec, g: &GroupElement, x: &OrbitMatrix) -> Result<OrbitMatrix> {
    spec.check_shape(x)?;
    let mismatch =
        || Error::InvalidArgument(format!("wrong kind of group element for {}", spec.name()));
    match (spec, g, x) {
        (
            OrbitSpec::Sphere { n } | OrbitSpec::Stiefel { n, .. } | OrbitSpec::CompactGroup { n },
            GroupElement::Orthogonal(g),
            OrbitMatrix::Real(x),
        ) => {
            check_orthogonal(g, *n)?;
            if matches!(spec, OrbitSpec::CompactGroup { .. }) && g.determinant() < 0.0 {
                return Err(Error::InvalidArgument(
                    "group element must have determinant 1".into(),
                ));
            }
            Ok(OrbitMatrix::Real(g * x))
        }
        (OrbitSpec::Grassmannian { n, .. }, GroupElement::Orthogonal(g), OrbitMatrix::Real(x)) => {
            check_orthogonal(g, *n)?;
            Ok(OrbitMatrix::Real(g * x * g.transpose()))
        }
        (OrbitSpec::ComplexStructures { n }, GroupElement::Orthogonal(g), OrbitMatrix::Real(x)) => {
            check_orthogonal(g, 2 * n)?;
            if g.determinant() < 0.0 {
                return Err(Error::InvalidArgument(
                    "group element must have determinant 1".into(),
                ));
            }
            Ok(OrbitMatrix::Real(g * x * g.transpose()))
        }
        (
            OrbitSpec::SvdOrbit { rows, cols, .. },
            GroupElement::Pair(g1, g2),
            OrbitMatrix::Real(x),
        ) => {
            check_orthogonal(g1, *rows)?;
            check_orthogonal(g2, *cols)?;
            Ok(OrbitMatrix::Real(g1 * x * g2.transpose()))
        }
        (
            OrbitSpec::LagrangianGrassmannian { n } | OrbitSpec::IsotropicGrassmannian { n, .. },
            GroupElement::Unitary(g),
            OrbitMatrix::Complex(x),
        ) => {
            check_unitary(g, *n)?;
            Ok(OrbitMatrix::Complex(g * x * g.transpose()))
        }
        _ => Err(mismatch()),
    }
}

struct Analysis {
    check: TubeCheck,
    projection: Option<OrbitMatrix>,
}

fn inside(margin: f64, threshold: f64, what: impl FnOnce() -> String) -> TubeCheck {
    let ok = margin > threshold;
    TubeCheck {
        inside: ok,
        margin,
        diagnostic: if ok {
            String::new()
        } else {
            format!("{} = {margin:e} does not exceed {threshold:e}", what())
        },
    }
}

fn rejected(diagnostic: String) -> Analysis {
    Analysis {
        check: TubeCheck {
            inside: false,
            margin: 0.0,
            diagnostic,
        },
        projection: None,
    }
}

fn analyze(spec: &OrbitSpec, x: &OrbitMatrix) -> Result<Analysis> {
    spec.validate()?;
    spec.check_shape(x)?;
    let finite = match x {
        OrbitMatrix::Real(m) => m.iter().all(|v| v.is_finite()),
        OrbitMatrix::Complex(m) => m.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
    };
    if !finite {
        return Err(Error::NonFinite);
    }
    let result = match (spec, x) {
        (OrbitSpec::Sphere { .. }, OrbitMatrix::Real(v)) => {
            let norm = v.norm();
            let check = inside(norm, 0.0, || "norm".into());
            let projection = check.inside.then(|| OrbitMatrix::Real(v / norm));
            Analysis { check, projection }
        }
        (OrbitSpec::Stiefel { k, .. }, OrbitMatrix::Real(m)) => {
            let d = svd(m)?;
            let check = inside(d.sigma[k - 1], GAP_TOLERANCE * d.sigma[0], || {
                format!("smallest singular value sigma[{k}]")
            });
            // x (xᵀx)^(-1/2) = u vᵀ for the thin SVD x = u Σ vᵀ.
            let projection = check
                .inside
                .then(|| OrbitMatrix::Real(&d.u * d.v.transpose()));
            Analysis { check, projection }
        }
        (OrbitSpec::Grassmannian { k, n }, OrbitMatrix::Real(m)) => {
            let asym = asymmetry(m);
            if asym > SYMMETRY_TOLERANCE {
                return Ok(rejected(format!(
                    "input is not symmetric (asymmetry {asym:e})"
                )));
            }
            let d = symmetric_eigen(m)?;
            let check = if k == n {
                inside(1.0, 0.0, String::new)
            } else {
                let scale = d.eigenvalues.amax();
                inside(
                    d.eigenvalues[k - 1] - d.eigenvalues[*k],
                    GAP_TOLERANCE * scale,
                    || format!("eigenvalue gap lambda[{k}] - lambda[{}]", k + 1),
                )
            };
            let projection = check.inside.then(|| {
                let q = d.eigenvectors.columns(0, *k);
                OrbitMatrix::Real(q * q.transpose())
            });
            Analysis { check, projection }
        }
        (OrbitSpec::SvdOrbit { base, .. }, OrbitMatrix::Real(m)) => {
            let d = svd(m)?;
            let r = base.len();
            let theta = |i: usize| if i < r { base[i] } else { 0.0 };
            let sigma = |i: usize| if i < r { d.sigma[i] } else { 0.0 };
            let threshold = GAP_TOLERANCE * d.sigma[0];
            let mut check = inside(f64::INFINITY, threshold, String::new);
            for i in 0..r {
                if theta(i) != theta(i + 1) {
                    let gap = sigma(i) - sigma(i + 1);
                    if gap < check.margin {
                        check = inside(gap, threshold, || {
                            if i + 1 < r {
                                format!("singular value gap sigma[{}] - sigma[{}]", i + 1, i + 2)
                            } else {
                                format!("smallest singular value sigma[{}]", i + 1)
                            }
                        });
                    }
                }
            }
            let projection = check.inside.then(|| {
                let t = DVector::from_column_slice(base);
                OrbitMatrix::Real(&d.u * RealMatrix::from_diagonal(&t) * d.v.transpose())
            });
            Analysis { check, projection }
        }
        (OrbitSpec::LagrangianGrassmannian { n }, OrbitMatrix::Complex(m))
        | (OrbitSpec::IsotropicGrassmannian { n, .. }, OrbitMatrix::Complex(m)) => {
            let k = match spec {
                OrbitSpec::IsotropicGrassmannian { k, .. } => *k,
                _ => *n,
            };
            let asym = complex_asymmetry(m);
            if asym > SYMMETRY_TOLERANCE {
                return Ok(rejected(format!(
                    "input is not complex symmetric (asymmetry {asym:e})"
                )));
            }
            let t = takagi_leading(m, k)?;
            let next = if k < *n { t.values[k] } else { 0.0 };
            let check = inside(t.values[k - 1] - next, GAP_TOLERANCE * t.values[0], || {
                if k < *n {
                    format!("Takagi value gap sigma[{k}] - sigma[{}]", k + 1)
                } else {
                    format!("smallest Takagi value sigma[{k}]")
                }
            });
            let projection = check
                .inside
                .then(|| OrbitMatrix::Complex(&t.unitary * t.unitary.transpose()));
            Analysis { check, projection }
        }
        (OrbitSpec::ComplexStructures { n }, OrbitMatrix::Real(m)) => {
            let defect = skewness_defect(m);
            if defect > SYMMETRY_TOLERANCE {
                return Ok(rejected(format!(
                    "input is not skew-symmetric (defect {defect:e})"
                )));
            }
            let s = skew_canonical(m)?;
            let last = s.blocks[n - 1];
            let expected_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let mut check = inside(last.abs(), GAP_TOLERANCE * s.blocks[0].abs(), || {
                "smallest block |a_n| (singularity)".into()
            });
            if check.inside && last.signum() != expected_sign {
                check = TubeCheck {
                    inside: false,
                    margin: last,
                    diagnostic: "Pfaffian sign differs from the base point's component".into(),
                };
            }
            let projection = check.inside.then(|| {
                let signs: Vec<f64> = s.blocks.iter().map(|a| a.signum()).collect();
                OrbitMatrix::Real(&s.rotation * block_diagonal(&signs) * s.rotation.transpose())
            });
            Analysis { check, projection }
        }
        (OrbitSpec::CompactGroup { n }, OrbitMatrix::Real(m)) => {
            if *n == 1 {
                return Ok(Analysis {
                    check: inside(1.0, 0.0, String::new),
                    projection: Some(OrbitMatrix::Real(RealMatrix::identity(1, 1))),
                });
            }
            let d = svd(m)?;
            let sign = (&d.u * d.v.transpose()).determinant().signum();
            let check = inside(
                d.sigma[n - 2] + sign * d.sigma[n - 1],
                GAP_TOLERANCE * d.sigma[0],
                || format!("sigma[{}] + det(uv^T) sigma[{n}]", n - 1),
            );
            let projection = if check.inside {
                Some(OrbitMatrix::Real(nearest_special_orthogonal(m)?))
            } else {
                None
            };
            Analysis { check, projection }
        }
        _ => unreachable!("shape check guarantees matching kinds"),
    };
    Ok(result)
}

/// Whether `x` lies in the tube on which the projection is defined.
pub fn in_tube(spec: &OrbitSpec, x: &OrbitMatrix) -> Result<TubeCheck> {
    Ok(analyze(spec, x)?.check)
}

/// The nearest point of the orbit to `x`.
pub fn project(spec: &OrbitSpec, x: &OrbitMatrix) -> Result<OrbitPoint> {
    let a = analyze(spec, x)?;
    match a.projection {
        Some(value) if a.check.inside => Ok(OrbitPoint {
            spec: spec.clone(),
            value,
        }),
        _ => Err(Error::OutsideTube(a.check.diagnostic)),
    }
}

/// `‖π(g·x) − g·π(x)‖_F`.
pub fn equivariance_check(spec: &OrbitSpec, x: &OrbitMatrix, g: &GroupElement) -> Result<f64> {
    let px = project(spec, x)?;
    let gpx = act(spec, g, px.value())?;
    let pgx = project(spec, &act(spec, g, x)?)?;
    Ok(pgx.value().distance(&gpx))
}

/// Membership test for the orbit, within `tol`.
pub fn on_orbit(spec: &OrbitSpec, value: &OrbitMatrix, tol: f64) -> bool {
    if spec.check_shape(value).is_err() {
        return false;
    }
    match (spec, value) {
        (OrbitSpec::Sphere { .. }, OrbitMatrix::Real(v)) => (v.norm() - 1.0).abs() < tol,
        (OrbitSpec::Stiefel { k, .. }, OrbitMatrix::Real(x)) => {
            (x.transpose() * x - RealMatrix::identity(*k, *k)).amax() < tol
        }
        (OrbitSpec::Grassmannian { k, .. }, OrbitMatrix::Real(p)) => {
            (p - p.transpose()).amax() < tol
                && (p * p - p).amax() < tol
                && (p.trace() - *k as f64).abs() < tol
        }
        (OrbitSpec::SvdOrbit { base, .. }, OrbitMatrix::Real(x)) => match svd(x) {
            Ok(d) => base
                .iter()
                .zip(d.sigma.iter())
                .all(|(t, s)| (t - s).abs() < tol),
            Err(_) => false,
        },
        (OrbitSpec::LagrangianGrassmannian { n }, OrbitMatrix::Complex(x)) => {
            complex_asymmetry(x) < tol
                && (x.adjoint() * x - ComplexMatrix::identity(*n, *n)).norm() < tol
        }
        (OrbitSpec::IsotropicGrassmannian { k, .. }, OrbitMatrix::Complex(x)) => {
            let p = x.adjoint() * x;
            complex_asymmetry(x) < tol
                && (&p * &p - &p).norm() < tol
                && (&p - p.adjoint()).norm() < tol
                && (p.trace().re - *k as f64).abs() < tol
        }
        (OrbitSpec::ComplexStructures { n }, OrbitMatrix::Real(j)) => {
            let dim = 2 * n;
            if (j + j.transpose()).amax() >= tol
                || (j.transpose() * j - RealMatrix::identity(dim, dim)).amax() >= tol
            {
                return false;
            }
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            match skew_canonical(&((j - j.transpose()) * 0.5)) {
                Ok(s) => s.blocks[n - 1].signum() == expected,
                Err(_) => false,
            }
        }
        (OrbitSpec::CompactGroup { n }, OrbitMatrix::Real(g)) => {
            (g.transpose() * g - RealMatrix::identity(*n, *n)).amax() < tol
                && (g.determinant() - 1.0).abs() < tol
        }
        _ => false,
    }
}

/// Truncates the SVD of `x` to its `l` leading singular values.
pub fn low_rank_project(x: &RealMatrix, l: usize) -> Result<RealMatrix> {
    let d = svd(x)?;
    let r = d.sigma.len();
    if l == 0 || l > r {
        return Err(Error::InvalidArgument(format!(
            "target rank {l} must be in 1..={r}"
        )));
    }
    let gap = GAP_TOLERANCE * d.sigma[0];
    let next = if l < r { d.sigma[l] } else { 0.0 };
    if !(d.sigma[l - 1] > gap) || !(d.sigma[l - 1] - next > gap) {
        return Err(Error::RankGapViolation(format!(
            "sigma[{l}] = {:e}, sigma[{}] = {next:e}",
            d.sigma[l - 1],
            l + 1
        )));
    }
    let u = d.u.columns(0, l);
    let v = d.v.columns(0, l);
    let s = RealMatrix::from_diagonal(&d.sigma.rows(0, l).into_owned());
    Ok(u * s * v.transpose())
}
