//! Model Hamiltonians with real spectra by construction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, solve, ComplexMatrix};
use crate::random::{haar_unitary, log_uniform, seeded};
use crate::tolerances::Tolerances;

/// Relative slack allowed on `Im(bc)` for the two-level reality condition.
const TWO_LEVEL_REALITY_TOL: f64 = 1e-12;

/// `d·I + [[0, b], [c, 0]]` with eigenvalues `d ± √(bc)`.
///
/// Requires `bc` real and positive, or `b = c̄` (Hermitian).
pub fn two_level(b: Complex64, c: Complex64, d: f64) -> Result<ComplexMatrix> {
    if ![b.re, b.im, c.re, c.im, d].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidModelParameters(
            "non-finite two-level parameter".into(),
        ));
    }
    let hermitian = b == c.conj();
    let bc = b * c;
    let real_positive = bc.re > 0.0 && bc.im.abs() <= TWO_LEVEL_REALITY_TOL * bc.norm().max(1.0);
    if !(hermitian || real_positive) {
        return Err(Error::InvalidModelParameters(format!(
            "two-level model needs b·c real and positive or b = conj(c); b·c = {}{:+}i",
            bc.re, bc.im
        )));
    }
    let dz = Complex64::new(d, 0.0);
    ComplexMatrix::from_rows(&[vec![dz, b], vec![c, dz]])
}

/// Truncation to `dim` number states of `ω(a†a + ½) + α·a² + β·a†²`.
pub fn swanson(dim: usize, omega: f64, alpha: f64, beta: f64) -> Result<ComplexMatrix> {
    if dim < 4 {
        return Err(Error::InvalidModelParameters(format!(
            "swanson truncation needs dim >= 4, got {dim}"
        )));
    }
    if !(omega.is_finite() && omega > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidModelParameters(format!(
            "swanson needs finite omega > 0 and finite alpha, beta; got omega={omega}, alpha={alpha}, beta={beta}"
        )));
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = Complex64::new(omega * (n as f64 + 0.5), 0.0);
    }
    for n in 0..dim - 2 {
        let ladder = (((n + 1) * (n + 2)) as f64).sqrt();
        m[(n, n + 2)] = Complex64::new(alpha * ladder, 0.0);
        m[(n + 2, n)] = Complex64::new(beta * ladder, 0.0);
    }
    ComplexMatrix::new(m)
}

/// `√(ω² − 4αβ)`, the frequency of the untruncated model; `None` outside
/// the real-spectrum window.
pub fn swanson_frequency(omega: f64, alpha: f64, beta: f64) -> Option<f64> {
    let sq = omega * omega - 4.0 * alpha * beta;
    (sq > 0.0).then(|| sq.sqrt())
}

/// `H = T₀⁻¹·D·T₀` with the generating data.
#[derive(Debug, Clone)]
pub struct RandomModel {
    pub h: ComplexMatrix,
    /// Ascending diagonal of `D`.
    pub eigenvalues: Vec<f64>,
    pub t0: ComplexMatrix,
    pub cond_t0: f64,
}

/// Random diagonalizable matrix with real spectrum.
///
/// `T₀ = V₁·diag(s)·V₂` with Haar `V₁`, `V₂` and `s` log-uniform in
/// `[1, cond_bound]`, so `cond(T₀) ≤ cond_bound`. Eigenvalues are spaced
/// by at least 1/2 and centred near zero.
pub fn random_diagonalizable(n: usize, seed: u64, cond_bound: f64) -> Result<RandomModel> {
    if n == 0 {
        return Err(Error::InvalidModelParameters(
            "dimension must be at least 1".into(),
        ));
    }
    if !(cond_bound.is_finite() && cond_bound >= 1.0) {
        return Err(Error::InvalidModelParameters(format!(
            "cond_bound must be >= 1, got {cond_bound}"
        )));
    }
    let mut rng = seeded(seed);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        eigenvalues.push(acc);
        acc += rng.random_range(0.5..1.5);
    }
    let shift = rng.random_range(-1.0..1.0) - eigenvalues[n - 1] / 2.0;
    eigenvalues.iter_mut().for_each(|x| *x += shift);

    let v1 = haar_unitary(n, &mut rng);
    let v2 = haar_unitary(n, &mut rng);
    let mut s: Vec<f64> = (0..n)
        .map(|_| log_uniform(1.0, cond_bound, &mut rng))
        .collect();
    if n > 1 {
        // pin the extremes so the bound is attained
        s[0] = 1.0;
        s[n - 1] = cond_bound;
    }
    let t0 = &(&v1 * &ComplexMatrix::from_real_diagonal(&s)) * &v2;
    let d = ComplexMatrix::from_real_diagonal(&eigenvalues);
    let loose = Tolerances {
        condition_cap: cond_bound.max(2.0) * 10.0,
        ..Tolerances::default()
    };
    let h = solve(&t0, &(&d * &t0), &loose)?;
    let cond_t0 = condition_number(&t0);
    Ok(RandomModel {
        h,
        eigenvalues,
        t0,
        cond_t0,
    })
}

/// A named model together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    TwoLevel {
        b: [f64; 2],
        c: [f64; 2],
        d: f64,
    },
    Swanson {
        dim: usize,
        omega: f64,
        alpha: f64,
        beta: f64,
    },
    #[serde(rename = "random_diagonalizable")]
    Random {
        dim: usize,
        seed: u64,
        cond_bound: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ComplexMatrix> {
        match *self {
            ModelSpec::TwoLevel { b, c, d } => {
                two_level(Complex64::new(b[0], b[1]), Complex64::new(c[0], c[1]), d)
            }
            ModelSpec::Swanson {
                dim,
                omega,
                alpha,
                beta,
            } => swanson(dim, omega, alpha, beta),
            ModelSpec::Random {
                dim,
                seed,
                cond_bound,
            } => {
                if cond_bound > 100.0 {
                    return Err(Error::InvalidModelParameters(format!(
                        "random model cond_bound must be <= 100, got {cond_bound}"
                    )));
                }
                random_diagonalizable(dim, seed, cond_bound).map(|m| m.h)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::TwoLevel { .. } => 2,
            ModelSpec::Swanson { dim, .. } | ModelSpec::Random { dim, .. } => dim,
        }
    }
}
