//! Spectral radius of nonnegative operators by shifted power iteration.
//!
//! For a nonnegative matrix `M` and a positive vector `x`, the
//! Collatz-Wielandt quotients bracket the Perron root:
//! `min_i (Mx)_i / x_i <= rho(M) <= max_i (Mx)_i / x_i`. The iteration stops
//! as soon as that bracket is narrower than `2 * tol`. On reducible
//! matrices the lower quotient can stall, so the upper quotient is also
//! tracked with a geometric tail estimate.
//!
//! The iteration runs on `M + sigma I` with `sigma = shift_factor * ||M||_inf`.
//! The shift keeps every iterate strictly positive and removes the
//! oscillation caused by eigenvalues of modulus `rho` other than `rho`
//! itself (bipartite patterns such as the Jacobi matrix of a Laplacian).

use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Absolute tolerance on the returned radius.
    pub tol: f64,
    pub max_iters: usize,
    /// Shift as a fraction of `||M||_inf`.
    pub shift_factor: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 100_000,
            shift_factor: 0.5,
        }
    }
}

/// A square linear map that can be applied to a vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Any upper bound on `||A||_inf`; only used to size the shift.
    fn norm_bound(&self) -> f64;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y)
    }

    fn norm_bound(&self) -> f64 {
        self.norm_inf()
    }
}

/// Spectral radius of an elementwise nonnegative sparse matrix.
pub fn spectral_radius_nonneg(m: &SparseMatrix, config: &SpectralConfig) -> Result<f64> {
    m.require_square("spectral radius input")?;
    if let Some((i, j, v)) = m.first_negative() {
        return Err(Error::Domain(format!(
            "spectral radius needs a nonnegative matrix, entry ({i}, {j}) = {v}"
        )));
    }
    spectral_radius_of(m, config)
}

/// Spectral radius of an operator known to map nonnegative vectors to
/// nonnegative vectors. Tiny negative outputs from rounding are clamped.
pub fn spectral_radius_of<A: LinearOperator + ?Sized>(
    op: &A,
    config: &SpectralConfig,
) -> Result<f64> {
    let n = op.dim();
    let norm = op.norm_bound();
    if n == 0 || norm == 0.0 {
        return Ok(0.0);
    }
    let sigma = config.shift_factor.max(1e-14) * norm;
    let tol = config.tol;

    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut prev_est = f64::NAN;
    let mut prev_delta = f64::NAN;
    for k in 0..config.max_iters {
        op.apply(&x, &mut y);
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        let mut ymax = 0.0f64;
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi = yi.max(0.0) + sigma * xi;
            ymax = ymax.max(*yi);
            if xi > f64::MIN_POSITIVE {
                let q = *yi / xi;
                lower = lower.min(q);
                upper = upper.max(q);
            }
        }
        if !upper.is_finite() {
            return Err(Error::Domain(
                "power iteration produced a non-finite value".into(),
            ));
        }
        if upper - lower <= 2.0 * tol {
            return Ok((0.5 * (upper + lower) - sigma).max(0.0));
        }

        // The upper quotient can sit still while information crosses the
        // graph, so the tail test waits for n steps.
        let est = upper - sigma;
        let delta = (est - prev_est).abs();
        if k > n && delta <= tol && prev_delta.is_finite() {
            if delta == 0.0 && prev_delta == 0.0 {
                return Ok(est.max(0.0));
            }
            let ratio = delta / prev_delta;
            if ratio < 1.0 && delta * ratio / (1.0 - ratio) <= tol {
                return Ok(est.max(0.0));
            }
        }
        prev_delta = delta;
        prev_est = est;

        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / ymax;
        }
    }
    Err(Error::IterationLimit {
        previous: prev_est - prev_delta,
        last: prev_est,
    })
}
