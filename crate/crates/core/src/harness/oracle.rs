//! Reference solutions by Picard iteration with a direct solve,
//! `x_{k+1} = A^{-1} G(x_k)`, sharing no code with the splitting solver.

use crate::error::{Error, Result};
use crate::nonlinear::WeaklyNonlinearProblem;
use crate::sparse::{
    max_abs_diff, spectral_radius_nonneg, DenseLu, SparseMatrix, SpectralConfig, DENSE_LIMIT,
};

/// `rho(|A^-1| P)`. Below 1 the Picard map is a contraction in a weighted
/// max-norm.
pub fn picard_contraction(lu: &DenseLu, p: &SparseMatrix) -> Result<f64> {
    let inv = lu.inverse();
    let n = inv.len();
    let mut t = vec![vec![0.0; n]; n];
    for (k, j, v) in p.iter() {
        for (row, inv_row) in t.iter_mut().zip(&inv) {
            row[j] += inv_row[k].abs() * v;
        }
    }
    spectral_radius_nonneg(&SparseMatrix::from_dense(&t)?, &SpectralConfig::default())
}

/// Iterates from `x_0 = 0` until `||x_{k+1} - x_k||_inf <= tol`.
pub fn picard_oracle(
    problem: &WeaklyNonlinearProblem,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    let n = problem.dim();
    if n > DENSE_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let lu = DenseLu::factor(problem.a())?;
    match picard_contraction(&lu, problem.p()) {
        Ok(rho) if rho >= 1.0 => {
            log::warn!("rho(|A^-1| P) = {rho:.6} >= 1; the Picard oracle may not converge")
        }
        Ok(_) => {}
        Err(e) => log::warn!("could not estimate rho(|A^-1| P): {e}"),
    }
    let mut x = vec![0.0; n];
    let mut last = f64::INFINITY;
    for _ in 0..max_iters {
        let mut next = problem
            .g()
            .evaluate(&x)
            .map_err(|e| Error::Oracle(format!("G failed during Picard iteration: {e}")))?;
        lu.solve_in_place(&mut next)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Oracle("Picard iterate is not finite".into()));
        }
        last = max_abs_diff(&next, &x);
        x = next;
        if last <= tol {
            return Ok(x);
        }
    }
    Err(Error::Oracle(format!(
        "Picard iteration did not reach {tol:e} in {max_iters} steps (last change {last:e})"
    )))
}
