//! Metric operators for quasi-Hermitian matrix Hamiltonians.
//!
//! Given a diagonalizable `H` with real spectrum, the crate builds a
//! positive-definite metric `η₊` with `H†·η₊ = η₊·H`, the Hermitian
//! equivalent `h = ρ·H·ρ⁻¹` (`ρ = √η₊`), and the family of all other
//! metrics `η′₊ = ρ·S·ρ` indexed by positive-definite `S` commuting with
//! `h`. Every operator identity along the way is reported as a named
//! relative residual.
//!
//! ```
//! use quasiherm::{full_pipeline, ComplexMatrix, Tolerances};
//!
//! let h = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [4.0, 0.0]])?;
//! let pair = full_pipeline(&h, &Tolerances::default())?;
//! assert!(pair.metric.pseudo_hermiticity_residual.unwrap() < 1e-12);
//! assert!((pair.h_eigenvalues[1] - 2.0).abs() < 1e-12);
//! # Ok::<(), quasiherm::Error>(())
//! ```

pub mod error;
pub mod linalg;
pub mod metric;
pub mod models;
pub mod random;
pub mod report;
pub mod spectral;
pub mod symmetry;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use metric::{full_pipeline, EquivalencePair, MetricOperator};
pub use num_complex::Complex64;
pub use report::{run_analyze, VerificationReport};
pub use spectral::{eig_decompose, SpectralData};
pub use tolerances::Tolerances;
