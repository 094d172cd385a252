//! Metric operator and Hermitian equivalent from a diagonalizing transform.
//!
//! With `H = T⁻¹·H_d·T` and the polar factorization `T = U·ρ`, the metric
//! is `η₊ = ρ² = T†T` and `h = ρ·H·ρ⁻¹ = U†·H_d·U` is Hermitian.
//! `ρ⁻¹` is never formed; it is applied through linear solves.

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_norm, hermitian_eig_unchecked, hermiticity_residual, polar_decompose, relative,
    relative_distance, solve_right, sqrt_pd_with_min_eigenvalue, ComplexMatrix,
};
use crate::spectral::{eig_decompose, SpectralData};
use crate::tolerances::Tolerances;

/// Positive-definite metric `η₊` together with `ρ = √η₊`.
#[derive(Debug, Clone)]
pub struct MetricOperator {
    pub eta: ComplexMatrix,
    pub rho: ComplexMatrix,
    pub min_eigenvalue: f64,
    /// `‖η − η†‖ / ‖η‖` before symmetrization.
    pub hermiticity_residual: f64,
    /// `‖ρ² − η‖ / ‖η‖`.
    pub root_residual: f64,
    /// `‖H†η − ηH‖ / (‖η‖·‖H‖)` for the Hamiltonian this metric was certified against.
    pub pseudo_hermiticity_residual: Option<f64>,
}

impl MetricOperator {
    /// Wraps a Hermitian positive-definite `eta`, computing its square root.
    pub fn from_eta(eta: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let hermiticity_residual = hermiticity_residual(eta);
        let (rho, min_eigenvalue) = sqrt_pd_with_min_eigenvalue(eta, tol)?;
        let eta = eta.hermitian_part();
        let root_residual = relative_distance(&(&rho * &rho), &eta, frobenius_norm(&eta));
        Ok(Self {
            eta,
            rho,
            min_eigenvalue,
            hermiticity_residual,
            root_residual,
            pseudo_hermiticity_residual: None,
        })
    }

    /// Records the pseudo-Hermiticity residual for `h_matrix` and fails if
    /// it exceeds `residual_tol`.
    pub fn certify_for(mut self, h_matrix: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = verify_pseudo_hermitian(h_matrix, &self.eta);
        self.pseudo_hermiticity_residual = Some(residual);
        if residual > tol.residual_tol {
            return Err(Error::ResidualExceeded {
                identity: "ph".into(),
                residual,
                tolerance: tol.residual_tol,
            });
        }
        Ok(self)
    }
}

/// `η₊ = T†T`, `ρ = √η₊`.
pub fn metric_from_t(t: &ComplexMatrix, tol: &Tolerances) -> Result<MetricOperator> {
    // reject singular T up front so the error names the transform
    polar_decompose(t, tol)?;
    let eta = (&t.adjoint() * t).hermitian_part();
    MetricOperator::from_eta(&eta, tol)
}

/// `‖H†η − ηH‖ / (‖η‖·‖H‖)`.
pub fn verify_pseudo_hermitian(h_matrix: &ComplexMatrix, eta: &ComplexMatrix) -> f64 {
    let lhs = &h_matrix.adjoint() * eta;
    let rhs = eta * h_matrix;
    relative_distance(&lhs, &rhs, frobenius_norm(eta) * frobenius_norm(h_matrix))
}

/// `H` together with its Hermitian equivalent `h` under a given metric.
#[derive(Debug, Clone)]
pub struct EquivalencePair {
    pub hamiltonian: ComplexMatrix,
    pub h: ComplexMatrix,
    pub metric: MetricOperator,
    /// Polar unitary of `T`, when the pair came from a diagonalization.
    pub unitary: Option<ComplexMatrix>,
    pub spectral: Option<SpectralData>,
    /// Ascending eigenvalues of `h`.
    pub h_eigenvalues: Vec<f64>,
    /// `‖h − h†‖ / ‖h‖` before symmetrization.
    pub hermiticity_residual: f64,
    /// `‖ρH − hρ‖ / (‖ρ‖·‖H‖)`.
    pub similarity_residual: f64,
    /// `max |λ_k(h) − λ_k(H)| / max(‖H‖, 1)` against the certified spectrum.
    pub spectrum_residual: Option<f64>,
    /// `‖U†H_dU − h‖ / ‖H‖`.
    pub polar_consistency_residual: Option<f64>,
}

impl EquivalencePair {
    /// Named residuals of the identities this pair satisfies.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("H=H", self.similarity_residual)];
        if let Some(ph) = self.metric.pseudo_hermiticity_residual {
            out.insert(0, ("ph", ph));
        }
        if let Some(r) = self.polar_consistency_residual {
            out.push(("h=", r));
        }
        out
    }
}

pub fn hermitian_equivalent(
    h_matrix: &ComplexMatrix,
    metric: &MetricOperator,
    tol: &Tolerances,
) -> Result<EquivalencePair> {
    let rho = &metric.rho;
    let raw = solve_right(&(rho * h_matrix), rho, tol)?;
    let hermiticity_residual = hermiticity_residual(&raw);
    if hermiticity_residual > tol.residual_tol {
        return Err(Error::NotHermitianEquivalent {
            residual: hermiticity_residual,
        });
    }
    let h = raw.hermitian_part();
    let similarity_residual = relative_distance(
        &(rho * h_matrix),
        &(&h * rho),
        frobenius_norm(rho) * frobenius_norm(h_matrix),
    );
    let h_eigenvalues = hermitian_eig_unchecked(&h).eigenvalues;
    Ok(EquivalencePair {
        hamiltonian: h_matrix.clone(),
        h,
        metric: metric.clone(),
        unitary: None,
        spectral: None,
        h_eigenvalues,
        hermiticity_residual,
        similarity_residual,
        spectrum_residual: None,
        polar_consistency_residual: None,
    })
}

/// Diagonalize, build `η₊ = T†T`, and form the Hermitian equivalent.
pub fn full_pipeline(h_matrix: &ComplexMatrix, tol: &Tolerances) -> Result<EquivalencePair> {
    let spectral = eig_decompose(h_matrix, tol)?;
    let metric = metric_from_t(&spectral.t, tol)?.certify_for(h_matrix, tol)?;
    let mut pair = hermitian_equivalent(h_matrix, &metric, tol)?;

    let polar = polar_decompose(&spectral.t, tol)?;
    let via_polar = &(&polar.unitary.adjoint() * &spectral.h_d) * &polar.unitary;
    let h_norm = frobenius_norm(h_matrix);
    pair.polar_consistency_residual = Some(relative_distance(&via_polar, &pair.h, h_norm));
    pair.unitary = Some(polar.unitary);

    let gap = pair
        .h_eigenvalues
        .iter()
        .zip(&spectral.real_eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    pair.spectrum_residual = Some(relative(gap, h_norm.max(1.0)));
    pair.spectral = Some(spectral);

    for (name, residual) in pair.residuals() {
        if residual > tol.residual_tol {
            return Err(Error::ResidualExceeded {
                identity: name.into(),
                residual,
                tolerance: tol.residual_tol,
            });
        }
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sqrt_pd;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn upper() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 2.0]]).unwrap()
    }

    fn upper_eta() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.5, -0.5], [-0.5, 1.5]]).unwrap()
    }

    #[test]
    fn metric_of_identity_and_unitary() {
        let m = metric_from_t(&ComplexMatrix::identity(3), &tol()).unwrap();
        assert!(relative_distance(&m.eta, &ComplexMatrix::identity(3), 1.0) < 1e-15);

        let r = 0.5f64.sqrt();
        let u = ComplexMatrix::from_real_rows(&[[r, r], [-r, r]]).unwrap();
        let m = metric_from_t(&u, &tol()).unwrap();
        assert!(relative_distance(&m.eta, &ComplexMatrix::identity(2), 1.0) < 1e-15);
    }

    #[test]
    fn metric_of_upper_triangular_transform() {
        let r = 0.5f64.sqrt();
        let t = ComplexMatrix::from_real_rows(&[[r, -r], [0.0, 1.0]]).unwrap();
        let m = metric_from_t(&t, &tol()).unwrap();
        assert!(relative_distance(&m.eta, &upper_eta(), 1.0) < 1e-15);
        assert!(m.root_residual < 1e-14);
    }

    #[test]
    fn metric_rejects_singular() {
        let t = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            metric_from_t(&t, &tol()),
            Err(Error::SingularTransform { .. })
        ));
    }

    #[test]
    fn pseudo_hermiticity_examples() {
        let herm = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, -1.0]]).unwrap();
        assert_eq!(
            verify_pseudo_hermitian(&herm, &ComplexMatrix::identity(2)),
            0.0
        );

        assert!(verify_pseudo_hermitian(&upper(), &upper_eta()) < 1e-14);

        // ‖H† − H‖ = √2, ‖I‖·‖H‖ = √2·√6
        let r = verify_pseudo_hermitian(&upper(), &ComplexMatrix::identity(2));
        let expected = 2f64.sqrt() / (2f64.sqrt() * 6f64.sqrt());
        assert!((r - expected).abs() < 1e-15, "{r} vs {expected}");
    }

    #[test]
    fn hermitian_equivalent_examples() {
        let herm = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, -1.0]]).unwrap();
        let id = MetricOperator::from_eta(&ComplexMatrix::identity(2), &tol()).unwrap();
        let pair = hermitian_equivalent(&herm, &id, &tol()).unwrap();
        assert!(relative_distance(&pair.h, &herm, 1.0) < 1e-15);

        let metric = MetricOperator::from_eta(&upper_eta(), &tol()).unwrap();
        let pair = hermitian_equivalent(&upper(), &metric, &tol()).unwrap();
        assert!(pair.hermiticity_residual < 1e-14);
        assert!((pair.h_eigenvalues[0] - 1.0).abs() < 1e-13);
        assert!((pair.h_eigenvalues[1] - 2.0).abs() < 1e-13);

        let swap = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [4.0, 0.0]]).unwrap();
        let eta = ComplexMatrix::from_real_diagonal(&[1.6, 0.4]);
        let metric = MetricOperator::from_eta(&eta, &tol()).unwrap();
        let pair = hermitian_equivalent(&swap, &metric, &tol()).unwrap();
        assert!(pair.hermiticity_residual < 1e-14);
        assert!((pair.h_eigenvalues[0] + 2.0).abs() < 1e-13);
        assert!((pair.h_eigenvalues[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn wrong_metric_is_rejected() {
        let id = MetricOperator::from_eta(&ComplexMatrix::identity(2), &tol()).unwrap();
        assert!(matches!(
            hermitian_equivalent(&upper(), &id, &tol()),
            Err(Error::NotHermitianEquivalent { .. })
        ));
        assert!(matches!(
            id.certify_for(&upper(), &tol()),
            Err(Error::ResidualExceeded { .. })
        ));
    }

    #[test]
    fn pipeline_examples() {
        let pair = full_pipeline(&ComplexMatrix::identity(3), &tol()).unwrap();
        assert!(relative_distance(&pair.metric.eta, &ComplexMatrix::identity(3), 1.0) < 1e-14);
        assert!(relative_distance(&pair.h, &ComplexMatrix::identity(3), 1.0) < 1e-14);

        let pair = full_pipeline(&upper(), &tol()).unwrap();
        assert!(relative_distance(&pair.metric.eta, &upper_eta(), 1.0) < 1e-14);
        assert!(pair.polar_consistency_residual.unwrap() < 1e-14);
        assert!(pair.spectrum_residual.unwrap() < 1e-14);

        let rot = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert!(matches!(
            full_pipeline(&rot, &tol()),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn rho_is_the_square_root_of_eta() {
        let pair = full_pipeline(&upper(), &tol()).unwrap();
        let root = sqrt_pd(&pair.metric.eta, &tol()).unwrap();
        assert!(relative_distance(&root, &pair.metric.rho, 1.0) < 1e-14);
    }
}
