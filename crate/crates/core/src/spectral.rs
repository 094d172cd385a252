//! Diagonalization of non-Hermitian matrices with certified real spectrum.
//!
//! [`eig_decompose`] returns `T` and `H_d` with `H = T⁻¹·H_d·T`. The rows of
//! `T` are left eigenvectors of `H`, normalized to unit length with the
//! first significant entry made real and positive. Rows belonging to a
//! degeneracy cluster are an orthonormal basis of that left eigenspace.
//!
//! Row scaling of `T` changes the metric `T†T`, so the normalization is
//! what pins down which metric the pipeline returns.

use nalgebra::{DMatrix, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, frobenius_norm, relative, ComplexMatrix};
use crate::tolerances::Tolerances;

/// Entries smaller than this fraction of a row's largest entry are skipped
/// when choosing the phase reference.
const PHASE_REFERENCE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Raw eigenvalues, ascending by real part then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Certified real eigenvalues; degenerate clusters share their mean.
    pub real_eigenvalues: Vec<f64>,
    /// Left eigenvectors as rows.
    pub t: ComplexMatrix,
    pub h_d: ComplexMatrix,
    pub cond_t: f64,
    pub clusters: Vec<Vec<usize>>,
    /// `‖T·H − H_d·T‖ / (‖H‖·‖T‖)`.
    pub eigen_residual: f64,
}

impl SpectralData {
    /// `T⁻¹·H_d·T`.
    pub fn reconstruct(&self, tol: &Tolerances) -> Result<ComplexMatrix> {
        crate::linalg::solve(&self.t, &(&self.h_d * &self.t), tol)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }
}

/// Eigenvalues of an arbitrary square matrix from its complex Schur form,
/// sorted ascending by real part then imaginary part.
pub fn raw_eigenvalues(h: &ComplexMatrix) -> Vec<Complex64> {
    let schur = Schur::new(h.as_matrix().clone());
    let (_, upper) = schur.unpack();
    let mut values: Vec<Complex64> = (0..upper.nrows()).map(|i| upper[(i, i)]).collect();
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    values
}

/// Groups ascending eigenvalues whose consecutive gaps are at most
/// `degeneracy_cluster_tol · max(spread, 1)`.
pub fn cluster_degeneracies(eigenvalues: &[f64], tol: &Tolerances) -> Vec<Vec<usize>> {
    if eigenvalues.is_empty() {
        return Vec::new();
    }
    let spread = eigenvalues[eigenvalues.len() - 1] - eigenvalues[0];
    let threshold = tol.degeneracy_cluster_tol * spread.max(1.0);
    let mut clusters = vec![vec![0]];
    for i in 1..eigenvalues.len() {
        if eigenvalues[i] - eigenvalues[i - 1] <= threshold {
            clusters.last_mut().unwrap().push(i);
        } else {
            clusters.push(vec![i]);
        }
    }
    clusters
}

fn reality_gate(values: &[Complex64], tol: &Tolerances) -> Result<()> {
    let offending: Vec<Complex64> = values
        .iter()
        .copied()
        .filter(|z| z.im.abs() > tol.spectral_reality_tol * z.norm().max(1.0))
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::ComplexSpectrum {
            eigenvalues: offending,
        })
    }
}

pub fn eig_decompose(h: &ComplexMatrix, tol: &Tolerances) -> Result<SpectralData> {
    tol.validate()?;
    let n = h.dim();
    let adjoint = h.adjoint().into_inner();

    // Left eigenvectors of H are conjugated right eigenvectors of H†.
    let (q, r) = Schur::new(adjoint.clone()).unpack();
    let mut order: Vec<usize> = (0..n).collect();
    let eig_of = |i: usize| r[(i, i)].conj();
    order.sort_by(|&a, &b| {
        let (za, zb) = (eig_of(a), eig_of(b));
        za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
    });
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| eig_of(i)).collect();
    reality_gate(&eigenvalues, tol)?;

    let real: Vec<f64> = eigenvalues.iter().map(|z| z.re).collect();
    let clusters = cluster_degeneracies(&real, tol);

    let mut t = DMatrix::<Complex64>::zeros(n, n);
    let mut real_eigenvalues = real.clone();
    for cluster in &clusters {
        if cluster.len() == 1 {
            let i = cluster[0];
            let v = &q * triangular_eigenvector(&r, order[i]);
            set_row_from_right_vector(&mut t, i, v.as_slice());
        } else {
            let mean = cluster.iter().map(|&i| real[i]).sum::<f64>() / cluster.len() as f64;
            for &i in cluster {
                real_eigenvalues[i] = mean;
            }
            let basis = eigenspace_basis(&adjoint, mean, cluster.len());
            for (&i, v) in cluster.iter().zip(basis) {
                set_row_from_right_vector(&mut t, i, &v);
            }
        }
    }
    for i in 0..n {
        normalize_row(&mut t, i);
    }

    let t = ComplexMatrix::from_inner(t);
    let h_d = ComplexMatrix::from_real_diagonal(&real_eigenvalues);
    let eigen_residual = relative(
        frobenius_norm(&(&(&t * h) - &(&h_d * &t))),
        frobenius_norm(h) * frobenius_norm(&t),
    );
    let cond_t = condition_number(&t);
    if cond_t.is_nan() || cond_t > tol.condition_cap || eigen_residual > tol.residual_tol {
        return Err(Error::NonDiagonalizable {
            condition: cond_t,
            residual: eigen_residual,
        });
    }

    Ok(SpectralData {
        eigenvalues,
        real_eigenvalues,
        t,
        h_d,
        cond_t,
        clusters,
        eigen_residual,
    })
}

/// Eigenvector of the upper-triangular `r` for its `k`-th diagonal entry,
/// by back substitution. Near-zero pivots are replaced by a tiny value.
fn triangular_eigenvector(r: &DMatrix<Complex64>, k: usize) -> nalgebra::DVector<Complex64> {
    let n = r.nrows();
    let lambda = r[(k, k)];
    let scale = r
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;
    let mut x = nalgebra::DVector::<Complex64>::zeros(n);
    x[k] = Complex64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (i + 1)..=k {
            acc += r[(i, j)] * x[j];
        }
        let mut pivot = r[(i, i)] - lambda;
        if pivot.norm() < small {
            pivot = Complex64::new(small, 0.0);
        }
        x[i] = -acc / pivot;
    }
    x
}

/// Orthonormal basis of the approximate null space of `m − shift·I`,
/// taken from the right singular vectors with the `dim` smallest
/// singular values.
fn eigenspace_basis(m: &DMatrix<Complex64>, shift: f64, dim: usize) -> Vec<Vec<Complex64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::<Complex64>::identity(n, n) * Complex64::new(shift, 0.0);
    let svd = SVD::new(shifted, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order
        .into_iter()
        .take(dim)
        .map(|row| (0..n).map(|c| v_t[(row, c)].conj()).collect())
        .collect()
}

fn set_row_from_right_vector(t: &mut DMatrix<Complex64>, row: usize, v: &[Complex64]) {
    for (c, z) in v.iter().enumerate() {
        t[(row, c)] = z.conj();
    }
}

fn normalize_row(t: &mut DMatrix<Complex64>, row: usize) {
    let n = t.ncols();
    let norm = (0..n).map(|c| t[(row, c)].norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let largest = (0..n).map(|c| t[(row, c)].norm()).fold(0.0, f64::max);
    let reference = (0..n)
        .map(|c| t[(row, c)])
        .find(|z| z.norm() > PHASE_REFERENCE_CUTOFF * largest)
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = reference.conj() / reference.norm();
    for c in 0..n {
        t[(row, c)] = t[(row, c)] * phase / norm;
    }
}

/// Serializable summary of a spectral analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<[f64; 2]>,
    /// Absent when diagonalization did not get that far.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(default)]
    pub clusters: Vec<Vec<usize>>,
}

impl SpectrumSummary {
    /// Eigenvalues only, for matrices that failed certification.
    pub fn raw(h: &ComplexMatrix) -> Self {
        Self {
            eigenvalues: raw_eigenvalues(h).iter().map(|z| [z.re, z.im]).collect(),
            condition_number: None,
            clusters: Vec::new(),
        }
    }
}

impl From<&SpectralData> for SpectrumSummary {
    fn from(s: &SpectralData) -> Self {
        Self {
            eigenvalues: s.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            condition_number: Some(s.cond_t),
            clusters: s.clusters.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn diagonal_input() {
        let h = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let s = eig_decompose(&h, &tol()).unwrap();
        assert_eq!(s.real_eigenvalues, vec![1.0, 2.0]);
        assert!(frobenius_norm(&(&s.t - &ComplexMatrix::identity(2))) < 1e-15);
        assert!((s.cond_t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_triangular_left_eigenvectors() {
        let h = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 2.0]]).unwrap();
        let s = eig_decompose(&h, &tol()).unwrap();
        let r = 0.5f64.sqrt();
        let expected = ComplexMatrix::from_real_rows(&[[r, -r], [0.0, 1.0]]).unwrap();
        assert!(frobenius_norm(&(&s.t - &expected)) < 1e-14, "{:?}", s.t);
        assert!((s.real_eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.real_eigenvalues[1] - 2.0).abs() < 1e-14);
        let back = s.reconstruct(&tol()).unwrap();
        assert!(frobenius_norm(&(&back - &h)) < 1e-13);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let h = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            eig_decompose(&h, &tol()),
            Err(Error::NonDiagonalizable { .. })
        ));
    }

    #[test]
    fn rotation_is_rejected() {
        let h = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        match eig_decompose(&h, &tol()) {
            Err(Error::ComplexSpectrum { eigenvalues }) => {
                assert_eq!(eigenvalues.len(), 2);
                for z in eigenvalues {
                    assert!((z.im.abs() - 1.0).abs() < 1e-12);
                }
            }
            other => panic!("expected ComplexSpectrum, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_hermitian_gets_unitary_t() {
        let h = ComplexMatrix::from_real_rows(&[[2.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]])
            .unwrap();
        // eigenvalues 0, 2, 2
        let s = eig_decompose(&h, &tol()).unwrap();
        assert_eq!(s.cluster_sizes(), vec![1, 2]);
        assert!(crate::linalg::unitarity_residual(&s.t) < 1e-12);
    }

    #[test]
    fn rows_are_unit_with_positive_leading_entry() {
        let h = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)],
            vec![Complex64::new(0.0, 0.25), Complex64::new(3.0, 0.0)],
        ])
        .unwrap();
        let s = eig_decompose(&h, &tol()).unwrap();
        for r in 0..2 {
            let norm: f64 = (0..2).map(|c| s.t.get(r, c).norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
            let lead = s.t.get(r, 0);
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
    }

    #[test]
    fn clustering_examples() {
        let t = tol();
        assert_eq!(
            cluster_degeneracies(&[1.0, 2.0, 3.0], &t),
            vec![vec![0], vec![1], vec![2]]
        );
        assert_eq!(
            cluster_degeneracies(&[1.0, 1.0, 5.0], &t),
            vec![vec![0, 1], vec![2]]
        );
        assert_eq!(
            cluster_degeneracies(&[1.0, 1.0 + 1e-12, 2.0], &t),
            vec![vec![0, 1], vec![2]]
        );
        // chains merge transitively
        assert_eq!(
            cluster_degeneracies(&[0.0, 0.6e-7, 1.2e-7, 1.0], &t),
            vec![vec![0, 1, 2], vec![3]]
        );
        assert!(cluster_degeneracies(&[], &t).is_empty());
    }

    #[test]
    fn raw_eigenvalues_are_sorted() {
        let h = ComplexMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        let v = raw_eigenvalues(&h);
        assert_eq!(
            v.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![-1.0, 2.0, 3.0]
        );
    }
}
