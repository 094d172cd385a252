//! Dense complex matrix kernels.
//!
//! [`ComplexMatrix`] is a square, finite-valued wrapper around a
//! `nalgebra::DMatrix<Complex64>`. The decompositions below are the only
//! places where the rest of the crate touches `nalgebra` directly.
//!
//! Residual checks are relative to operand norms. A norm below
//! [`ZERO_NORM`] is treated as zero and the check falls back to absolute.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Norms below this are treated as exactly zero.
pub const ZERO_NORM: f64 = 1e-300;

/// Square complex matrix with finite entries, addressed `(row, col)` from zero.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Empty);
        }
        for c in 0..cols {
            for r in 0..rows {
                let z = inner[(r, c)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self(inner))
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        debug_assert!(inner.is_square());
        Self(inner)
    }

    /// Builds an `dim x dim` matrix from entries in row-major order.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(n, &entries)
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn row_major_entries(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `diff / scale`, or `diff` itself when `scale` is numerically zero.
pub fn relative(diff: f64, scale: f64) -> f64 {
    if scale < ZERO_NORM {
        diff
    } else {
        diff / scale
    }
}

/// `‖a − b‖ / scale`.
pub fn relative_distance(a: &ComplexMatrix, b: &ComplexMatrix, scale: f64) -> f64 {
    relative(frobenius_norm(&(a - b)), scale)
}

/// `‖M − M†‖ / ‖M‖`.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    relative(frobenius_norm(&(m - &m.adjoint())), frobenius_norm(m))
}

/// `‖M†M − I‖`.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    frobenius_norm(&(&(&m.adjoint() * m) - &ComplexMatrix::identity(m.dim())))
}

/// Returns the Hermitian part of `m` after checking it is Hermitian within
/// `residual_tol`.
pub fn symmetrize_checked(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let residual = hermiticity_residual(m);
    if residual > tol.residual_tol {
        return Err(Error::NotHermitian { residual });
    }
    Ok(m.hermitian_part())
}

/// Ascending eigenvalues and a unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V·f(Λ)·V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.vectors.0;
        let n = v.nrows();
        let scaled = DMatrix::from_fn(n, n, |r, c| v[(r, c)] * f(self.eigenvalues[c]));
        ComplexMatrix(&scaled * v.adjoint())
    }
}

pub fn hermitian_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    let sym = symmetrize_checked(m, tol)?;
    Ok(hermitian_eig_unchecked(&sym))
}

pub(crate) fn hermitian_eig_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let eig = SymmetricEigen::new(m.0.clone());
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen {
        eigenvalues,
        vectors: ComplexMatrix(vectors),
    }
}

/// Unique Hermitian positive-definite square root.
pub fn sqrt_pd(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    sqrt_pd_with_min_eigenvalue(m, tol).map(|(root, _)| root)
}

pub(crate) fn sqrt_pd_with_min_eigenvalue(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, f64)> {
    let eig = hermitian_eig(m, tol)?;
    let min_eigenvalue = eig.eigenvalues[0];
    if min_eigenvalue <= tol.positivity_floor * frobenius_norm(m) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let root = eig.reconstruct_with(f64::sqrt).hermitian_part();
    Ok((root, min_eigenvalue))
}

/// `T = U·ρ` with `U` unitary and `ρ = √(T†T)` positive-definite.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub unitary: ComplexMatrix,
    pub positive: ComplexMatrix,
}

pub fn polar_decompose(t: &ComplexMatrix, tol: &Tolerances) -> Result<PolarDecomposition> {
    let gram = (&t.adjoint() * t).hermitian_part();
    let eig = hermitian_eig_unchecked(&gram);
    let min_singular_value = eig.eigenvalues[0].max(0.0).sqrt();
    if min_singular_value <= tol.positivity_floor * frobenius_norm(t) {
        return Err(Error::SingularTransform { min_singular_value });
    }
    let positive = eig.reconstruct_with(f64::sqrt).hermitian_part();
    let unitary = solve_right(t, &positive, tol)?;
    Ok(PolarDecomposition { unitary, positive })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = SVD::new(m.0.clone(), false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// 2-norm condition number `σ_max / σ_min`; infinite for singular input.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = singular_values(m);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_invertible(m: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    let sv = singular_values(m);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if max < ZERO_NORM || min <= f64::EPSILON * max * m.dim() as f64 {
        return Err(Error::SingularTransform {
            min_singular_value: min,
        });
    }
    let condition = max / min;
    if condition > tol.condition_cap {
        return Err(Error::IllConditioned { condition });
    }
    Ok(())
}

/// Solves `M·X = rhs`.
pub fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    if m.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: rhs.dim(),
        });
    }
    check_invertible(m, tol)?;
    m.0.clone()
        .lu()
        .solve(&rhs.0)
        .map(ComplexMatrix)
        .ok_or(Error::SingularTransform {
            min_singular_value: 0.0,
        })
}

/// Solves `X·M = rhs`, i.e. returns `rhs·M⁻¹` without forming the inverse.
pub fn solve_right(
    rhs: &ComplexMatrix,
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    solve(&m.adjoint(), &rhs.adjoint(), tol).map(|x| x.adjoint())
}
