use serde::{Deserialize, Serialize};

use super::two_stage::check_pair;
use crate::error::{Error, Result};

/// Relaxation parameters: one `(alpha, beta)` pair for every splitting, or
/// one pair per splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TorParameters {
    Uniform { alpha: f64, beta: f64 },
    PerSplitting { alphas: Vec<f64>, betas: Vec<f64> },
}

impl TorParameters {
    pub fn uniform(alpha: f64, beta: f64) -> Result<Self> {
        check_pair(alpha, beta)?;
        Ok(TorParameters::Uniform { alpha, beta })
    }

    pub fn per_splitting(alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if alphas.len() != betas.len() || alphas.is_empty() {
            return Err(Error::Parameter(format!(
                "need equally many alphas and betas, got {} and {}",
                alphas.len(),
                betas.len()
            )));
        }
        for (&a, &b) in alphas.iter().zip(&betas) {
            check_pair(a, b)?;
        }
        Ok(TorParameters::PerSplitting { alphas, betas })
    }

    /// `(alpha_l, beta_l)` for splitting `l` (0-based).
    pub fn pair(&self, l: usize) -> (f64, f64) {
        match self {
            TorParameters::Uniform { alpha, beta } => (*alpha, *beta),
            TorParameters::PerSplitting { alphas, betas } => (alphas[l], betas[l]),
        }
    }

    /// Checks admissibility and, for per-splitting mode, that there are
    /// exactly `p` pairs.
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            TorParameters::Uniform { alpha, beta } => check_pair(*alpha, *beta),
            TorParameters::PerSplitting { alphas, betas } => {
                if alphas.len() != p || betas.len() != p {
                    return Err(Error::Parameter(format!(
                        "{} alphas and {} betas given for {p} splittings",
                        alphas.len(),
                        betas.len()
                    )));
                }
                alphas
                    .iter()
                    .zip(betas)
                    .try_for_each(|(&a, &b)| check_pair(a, b))
            }
        }
    }

    /// Largest `alpha_l + beta_l`.
    pub fn max_sum(&self) -> f64 {
        match self {
            TorParameters::Uniform { alpha, beta } => alpha + beta,
            TorParameters::PerSplitting { alphas, betas } => alphas
                .iter()
                .zip(betas)
                .map(|(a, b)| a + b)
                .fold(0.0, f64::max),
        }
    }

    /// The same parameters written out once per splitting.
    pub fn expand(&self, p: usize) -> Self {
        let (alphas, betas) = (0..p).map(|l| self.pair(l)).unzip();
        TorParameters::PerSplitting { alphas, betas }
    }
}
