//! Numerical gates shared by every stage of the pipeline.
//!
//! All thresholds except `condition_cap` are relative: they are multiplied
//! by the norm of the operand they guard.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding tolerance overrides, e.g.
/// `QUASIHERM_TOLERANCES="residual_tol=1e-9,condition_cap=1e10"`.
pub const TOLERANCES_ENV: &str = "QUASIHERM_TOLERANCES";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed `|Im λ| / max(|λ|, 1)` for an eigenvalue to count as real.
    pub spectral_reality_tol: f64,
    /// Relative bound on every identity residual.
    pub residual_tol: f64,
    /// Relative gap below which neighbouring eigenvalues are merged.
    pub degeneracy_cluster_tol: f64,
    /// Smallest admissible eigenvalue (or singular value) relative to the norm.
    pub positivity_floor: f64,
    /// Largest admissible condition number of a transform.
    pub condition_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectral_reality_tol: 1e-9,
            residual_tol: 1e-8,
            degeneracy_cluster_tol: 1e-7,
            positivity_floor: 1e-10,
            condition_cap: 1e8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("spectral_reality_tol", self.spectral_reality_tol),
            ("residual_tol", self.residual_tol),
            ("degeneracy_cluster_tol", self.degeneracy_cluster_tol),
            ("positivity_floor", self.positivity_floor),
            ("condition_cap", self.condition_cap),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerances(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        if self.condition_cap <= 1.0 {
            return Err(Error::InvalidTolerances(format!(
                "condition_cap must exceed 1, got {}",
                self.condition_cap
            )));
        }
        Ok(())
    }

    pub fn with_residual_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }

    /// Applies `key=value` overrides separated by commas or whitespace.
    pub fn apply_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
        {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidTolerances(format!("expected key=value, got `{item}`"))
            })?;
            let value = f64::from_str(value.trim())
                .map_err(|e| Error::InvalidTolerances(format!("bad value for `{key}`: {e}")))?;
            match key.trim() {
                "spectral_reality_tol" => self.spectral_reality_tol = value,
                "residual_tol" => self.residual_tol = value,
                "degeneracy_cluster_tol" => self.degeneracy_cluster_tol = value,
                "positivity_floor" => self.positivity_floor = value,
                "condition_cap" => self.condition_cap = value,
                other => {
                    return Err(Error::InvalidTolerances(format!(
                        "unknown tolerance `{other}`"
                    )))
                }
            }
        }
        self.validate()?;
        Ok(self)
    }

    /// Defaults, overridden by [`TOLERANCES_ENV`] when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCES_ENV) {
            Ok(spec) => Self::default().apply_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}
