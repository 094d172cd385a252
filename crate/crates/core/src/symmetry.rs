//! The family of all metrics of `H`, indexed by positive symmetry generators
//! of its Hermitian equivalent `h`.
//!
//! Any positive-definite `S` with `[S, h] = 0` gives a metric
//! `η′₊ = ρ·S·ρ`. Conversely a second metric `η′₊ = ρ′²` defines the
//! intertwiner `A = ρ′·ρ⁻¹` with `S = A†A`. Writing `A = U·σ` (`σ = √S`)
//! and `B = ρ·U` yields `B† = σ·B·σ⁻¹` and `B·B† = η₊`. Every one of these
//! relations is evaluated as a named residual.
//!
//! Positive symmetry generators are parametrized in the eigenbasis of `h`:
//! per degeneracy cluster, a unitary mixer and positive weights. This
//! covers the whole positive commutant.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_norm, hermitian_eig_unchecked, relative, relative_distance, solve, solve_right,
    symmetrize_checked, unitarity_residual, ComplexMatrix,
};
use crate::metric::{hermitian_equivalent, verify_pseudo_hermitian, MetricOperator};
use crate::random::{haar_unitary, log_uniform, seeded};
use crate::spectral::cluster_degeneracies;
use crate::tolerances::Tolerances;

/// Identities checked for every family member, labelled by equation.
pub const FAMILY_IDENTITIES: [&str; 9] = [
    "sim",
    "sym",
    "eta-prime",
    "A-ph",
    "A=US",
    "B-ph",
    "eta=BB",
    "eta-form",
    "eta-prime-3",
];

/// Default log-uniform spread of sampled generator weights.
pub const DEFAULT_SPREAD: f64 = 10.0;

pub type Residuals = BTreeMap<String, f64>;

/// Basis of the real vector space of Hermitian matrices commuting with `h`.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    pub h: ComplexMatrix,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors of `h`, ascending.
    pub eigenvectors: ComplexMatrix,
    pub clusters: Vec<Vec<usize>>,
    pub basis: Vec<ComplexMatrix>,
    pub real_dimension: usize,
    /// Orthogonal projector onto each cluster's eigenspace.
    pub projectors: Vec<ComplexMatrix>,
    /// Largest `‖[X, h]‖ / (‖X‖·‖h‖)` over the basis.
    pub commutation_residual: f64,
    /// Largest deviation from `P² = P`, `P† = P`, `ΣP = I`.
    pub projector_residual: f64,
}

fn check_partition(clusters: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for cluster in clusters {
        if cluster.is_empty() {
            return Err(Error::InvalidPartition("empty cluster".into()));
        }
        for &i in cluster {
            if i >= n {
                return Err(Error::InvalidPartition(format!(
                    "index {i} out of range 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("index {i} repeated")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("index {missing} missing")));
    }
    Ok(())
}

/// `v_a·v_b†` for columns `a`, `b` of `v`.
fn outer(v: &ComplexMatrix, a: usize, b: usize) -> DMatrix<Complex64> {
    let m = v.as_matrix();
    m.column(a) * m.column(b).adjoint()
}

/// Columns `indices` of `v` as an `n × d` block.
fn columns(v: &ComplexMatrix, indices: &[usize]) -> DMatrix<Complex64> {
    let m = v.as_matrix();
    DMatrix::from_fn(m.nrows(), indices.len(), |r, c| m[(r, indices[c])])
}

/// Hermitian commutant of `h`, with clusters indexing its ascending eigenvalues.
pub fn commutant_basis(
    h: &ComplexMatrix,
    clusters: &[Vec<usize>],
    tol: &Tolerances,
) -> Result<CommutantBasis> {
    let h = symmetrize_checked(h, tol)?;
    let n = h.dim();
    check_partition(clusters, n)?;
    let eig = hermitian_eig_unchecked(&h);
    let v = &eig.vectors;
    let i = Complex64::new(0.0, 1.0);

    let mut basis = Vec::new();
    let mut projectors = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        for (p, &a) in cluster.iter().enumerate() {
            basis.push(ComplexMatrix::from_inner(outer(v, a, a)));
            for &b in &cluster[p + 1..] {
                let ab = outer(v, a, b);
                let ba = outer(v, b, a);
                basis.push(ComplexMatrix::from_inner(&ab + &ba));
                basis.push(ComplexMatrix::from_inner((ab - ba) * i));
            }
        }
        let block = columns(v, cluster);
        projectors.push(ComplexMatrix::from_inner(&block * block.adjoint()));
    }

    let h_norm = frobenius_norm(&h);
    let commutation_residual = basis
        .iter()
        .map(|x| {
            relative(
                frobenius_norm(&x.commutator(&h)),
                frobenius_norm(x) * h_norm,
            )
        })
        .fold(0.0, f64::max);
    if commutation_residual > tol.residual_tol {
        return Err(Error::ResidualExceeded {
            identity: "sym".into(),
            residual: commutation_residual,
            tolerance: tol.residual_tol,
        });
    }

    let mut projector_residual: f64 = 0.0;
    let mut total = ComplexMatrix::zeros(n);
    for p in &projectors {
        let scale = frobenius_norm(p);
        projector_residual = projector_residual
            .max(relative_distance(&(p * p), p, scale))
            .max(relative_distance(&p.adjoint(), p, scale));
        total = &total + p;
    }
    projector_residual =
        projector_residual.max(frobenius_norm(&(&total - &ComplexMatrix::identity(n))));

    let real_dimension = basis.len();
    Ok(CommutantBasis {
        h,
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.vectors,
        clusters: clusters.to_vec(),
        basis,
        real_dimension,
        projectors,
        commutation_residual,
        projector_residual,
    })
}

/// Commutant of `h` clustered by its own spectrum.
pub fn commutant_of(h: &ComplexMatrix, tol: &Tolerances) -> Result<CommutantBasis> {
    let h = symmetrize_checked(h, tol)?;
    let eigenvalues = hermitian_eig_unchecked(&h).eigenvalues;
    commutant_basis(&h, &cluster_degeneracies(&eigenvalues, tol), tol)
}

/// Positive-definite `S` commuting with `h`, with `σ = √S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGenerator {
    pub s: ComplexMatrix,
    pub sigma: ComplexMatrix,
    /// Positive weights per cluster.
    pub coefficients: Vec<Vec<f64>>,
    /// Unitary `d_k × d_k` mixer per cluster.
    pub mixers: Vec<ComplexMatrix>,
    /// `‖[S, h]‖ / (‖S‖·‖h‖)`.
    pub commutation_residual: f64,
    /// `‖σ² − S‖ / ‖S‖`.
    pub root_residual: f64,
}

impl SymmetryGenerator {
    pub fn min_coefficient(&self) -> f64 {
        self.coefficients
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `S = Σ_k V_k·M_k·diag(s_k)·M_k†·V_k†` where `V_k` spans cluster `k`.
pub fn symmetry_from_parameters(
    cb: &CommutantBasis,
    coefficients: Vec<Vec<f64>>,
    mixers: Vec<ComplexMatrix>,
    tol: &Tolerances,
) -> Result<SymmetryGenerator> {
    let k = cb.clusters.len();
    if coefficients.len() != k || mixers.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: coefficients.len().min(mixers.len()),
        });
    }
    let n = cb.h.dim();
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    let mut sigma = DMatrix::<Complex64>::zeros(n, n);
    for ((cluster, weights), mixer) in cb.clusters.iter().zip(&coefficients).zip(&mixers) {
        let d = cluster.len();
        if weights.len() != d || mixer.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if weights.len() != d {
                    weights.len()
                } else {
                    mixer.dim()
                },
            });
        }
        if let Some(&bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: bad,
            });
        }
        let drift = unitarity_residual(mixer);
        if drift > tol.residual_tol {
            return Err(Error::ResidualExceeded {
                identity: "mixer unitarity".into(),
                residual: drift,
                tolerance: tol.residual_tol,
            });
        }
        let block = columns(&cb.eigenvectors, cluster) * mixer.as_matrix();
        let weighted = |f: fn(f64) -> f64| {
            let scaled = DMatrix::from_fn(n, d, |r, c| block[(r, c)] * f(weights[c]));
            &scaled * block.adjoint()
        };
        s += weighted(|w| w);
        sigma += weighted(f64::sqrt);
    }
    let s = ComplexMatrix::from_inner(s).hermitian_part();
    let sigma = ComplexMatrix::from_inner(sigma).hermitian_part();
    let s_norm = frobenius_norm(&s);
    let commutation_residual = relative(
        frobenius_norm(&s.commutator(&cb.h)),
        s_norm * frobenius_norm(&cb.h),
    );
    let root_residual = relative_distance(&(&sigma * &sigma), &s, s_norm);
    Ok(SymmetryGenerator {
        s,
        sigma,
        coefficients,
        mixers,
        commutation_residual,
        root_residual,
    })
}

/// Random positive symmetry generator: weights log-uniform in
/// `[1/spread, spread]`, Haar mixers inside each cluster. Deterministic
/// in `(seed, spread)`.
pub fn sample_positive_symmetry(
    cb: &CommutantBasis,
    seed: u64,
    spread: f64,
    tol: &Tolerances,
) -> Result<SymmetryGenerator> {
    if !(spread.is_finite() && spread > 0.0) {
        return Err(Error::InvalidModelParameters(format!(
            "spread must be positive, got {spread}"
        )));
    }
    let mut rng = seeded(seed);
    let mut coefficients = Vec::with_capacity(cb.clusters.len());
    let mut mixers = Vec::with_capacity(cb.clusters.len());
    for cluster in &cb.clusters {
        let d = cluster.len();
        coefficients.push(
            (0..d)
                .map(|_| log_uniform(1.0 / spread, spread, &mut rng))
                .collect(),
        );
        mixers.push(if d == 1 {
            ComplexMatrix::identity(1)
        } else {
            haar_unitary(d, &mut rng)
        });
    }
    symmetry_from_parameters(cb, coefficients, mixers, tol)
}

/// A metric of `H` generated from a symmetry of `h`, with every operator of
/// the construction and the residual of every identity.
#[derive(Debug, Clone)]
pub struct MetricFamilyMember {
    pub generator: SymmetryGenerator,
    /// `η′₊ = ρ·S·ρ` and its root `ρ′`.
    pub eta_prime: MetricOperator,
    pub h_prime: ComplexMatrix,
    /// `A = ρ′·ρ⁻¹`.
    pub a: ComplexMatrix,
    /// `U = A·σ⁻¹`.
    pub u: ComplexMatrix,
    /// `B = ρ·U`.
    pub b: ComplexMatrix,
    pub residuals: Residuals,
}

impl MetricFamilyMember {
    pub fn rho_prime(&self) -> &ComplexMatrix {
        &self.eta_prime.rho
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    /// First identity whose residual exceeds `limit`, if any.
    pub fn first_failure(&self, limit: f64) -> Option<(&str, f64)> {
        self.residuals
            .iter()
            .find(|(_, &r)| r.is_nan() || r > limit)
            .map(|(k, &r)| (k.as_str(), r))
    }
}

pub fn metric_from_symmetry(
    metric: &MetricOperator,
    generator: &SymmetryGenerator,
    h_matrix: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<MetricFamilyMember> {
    let rho = &metric.rho;
    let s = &generator.s;
    let sigma = &generator.sigma;
    let h = hermitian_equivalent(h_matrix, metric, tol)?.h;

    let rho_s_rho = &(rho * s) * rho;
    let mut eta_prime = MetricOperator::from_eta(&rho_s_rho, tol)?;
    let ph = verify_pseudo_hermitian(h_matrix, &eta_prime.eta);
    eta_prime.pseudo_hermiticity_residual = Some(ph);
    let rho_prime = eta_prime.rho.clone();
    let eta_p = &eta_prime.eta;
    let eta_p_norm = frobenius_norm(eta_p);

    let h_prime_raw = solve_right(&(&rho_prime * h_matrix), &rho_prime, tol)?;
    let hh = crate::linalg::hermiticity_residual(&h_prime_raw);
    let h_prime = h_prime_raw.hermitian_part();

    let a = solve_right(&rho_prime, rho, tol)?;
    let u = solve_right(&a, sigma, tol)?;
    let b = rho * &u;
    let a_dag = a.adjoint();
    let a_norm = frobenius_norm(&a);

    let mut residuals = Residuals::new();
    residuals.insert("ph".into(), ph);
    residuals.insert("hh".into(), hh);

    let a_h_a_inv = solve_right(&(&a * &h), &a, tol)?;
    residuals.insert(
        "sim".into(),
        relative_distance(&h_prime, &a_h_a_inv, frobenius_norm(&h_prime)),
    );

    let ata = &a_dag * &a;
    residuals.insert(
        "sym".into(),
        relative(
            frobenius_norm(&ata.commutator(&h)),
            frobenius_norm(&ata) * frobenius_norm(&h),
        ),
    );

    residuals.insert(
        "eta-prime".into(),
        relative_distance(eta_p, &(&(rho * &ata) * rho), eta_p_norm),
    );

    let rho_inv_a_rho = solve(rho, &(&a * rho), tol)?;
    residuals.insert(
        "A-ph".into(),
        relative_distance(&a_dag, &rho_inv_a_rho, a_norm),
    );

    residuals.insert(
        "A=US".into(),
        relative_distance(&a, &(&u * sigma), a_norm).max(unitarity_residual(&u)),
    );

    residuals.extend(verify_b_relations(&b, sigma, &metric.eta, tol));

    residuals.insert(
        "eta-form".into(),
        relative_distance(
            &(&rho_prime * &rho_prime),
            &rho_s_rho,
            frobenius_norm(&rho_s_rho),
        ),
    );

    let sigma_rho = sigma * rho;
    residuals.insert(
        "eta-prime-3".into(),
        relative_distance(eta_p, &(&sigma_rho.adjoint() * &sigma_rho), eta_p_norm),
    );

    Ok(MetricFamilyMember {
        generator: generator.clone(),
        eta_prime,
        h_prime,
        a,
        u,
        b,
        residuals,
    })
}

/// `A = ρ′·ρ⁻¹` and `S = A†A` relating two metrics of the same `H`.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    pub a: ComplexMatrix,
    pub s: ComplexMatrix,
    pub residuals: Residuals,
}

/// Recovers the intertwiner between two metrics and checks, in order,
/// `sim`, `sym`, `A-ph` and `eta-prime`.
pub fn intertwiner_from_metrics(
    rho: &ComplexMatrix,
    rho_prime: &ComplexMatrix,
    h: &ComplexMatrix,
    h_prime: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Intertwiner> {
    let a = solve_right(rho_prime, rho, tol)?;
    let a_dag = a.adjoint();
    let s = (&a_dag * &a).hermitian_part();
    let a_norm = frobenius_norm(&a);

    let a_h_a_inv = solve_right(&(&a * h), &a, tol)?;
    let eta_p = rho_prime * rho_prime;
    let checks = [
        (
            "sim",
            relative_distance(h_prime, &a_h_a_inv, frobenius_norm(h_prime)),
        ),
        (
            "sym",
            relative(
                frobenius_norm(&s.commutator(h)),
                frobenius_norm(&s) * frobenius_norm(h),
            ),
        ),
        (
            "A-ph",
            relative_distance(&a_dag, &solve(rho, &(&a * rho), tol)?, a_norm),
        ),
        (
            "eta-prime",
            relative_distance(&eta_p, &(&(rho * &s) * rho), frobenius_norm(&eta_p)),
        ),
    ];
    let mut residuals = Residuals::new();
    for (name, residual) in checks {
        if residual.is_nan() || residual > tol.residual_tol {
            return Err(Error::ResidualExceeded {
                identity: name.into(),
                residual,
                tolerance: tol.residual_tol,
            });
        }
        residuals.insert(name.into(), residual);
    }
    Ok(Intertwiner { a, s, residuals })
}

/// `B-ph`: `‖B† − σ·B·σ⁻¹‖ / ‖B‖`; `eta=BB`: `‖B·B† − η‖ / ‖η‖`.
/// Diagnostic only: a failed solve reports an infinite residual.
pub fn verify_b_relations(
    b: &ComplexMatrix,
    sigma: &ComplexMatrix,
    eta: &ComplexMatrix,
    tol: &Tolerances,
) -> Residuals {
    let b_ph = match solve_right(&(sigma * b), sigma, tol) {
        Ok(conj) => relative_distance(&b.adjoint(), &conj, frobenius_norm(b)),
        Err(_) => f64::INFINITY,
    };
    let eta_bb = relative_distance(&(b * &b.adjoint()), eta, frobenius_norm(eta));
    Residuals::from([("B-ph".to_string(), b_ph), ("eta=BB".to_string(), eta_bb)])
}
