//! M-matrix, H-matrix and monotonicity tests.
//!
//! A Z-matrix `A` (nonpositive off-diagonal) is a nonsingular M-matrix iff
//! some `u > 0` gives `Au > 0`. The test tries, in order:
//!
//! 1. strict diagonal dominance, witness `u = 1`;
//! 2. the Jacobi accumulation `u_{k+1} = D^{-1}(1 + N u_k)` with
//!    `A = D - N`, whose residual `A u_k = 1 - N (u_k - u_{k-1})` becomes
//!    positive after finitely many steps exactly when `rho(D^{-1} N) < 1`;
//! 3. for `n <= dense_limit`, the explicit inverse `A^{-1} >= 0`.

use serde::Serialize;

use super::dense::{DenseLu, DENSE_LIMIT};
use super::{comparison_matrix, norm_inf, SparseMatrix};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassConfig {
    /// Largest dimension for the dense inverse tier.
    pub dense_limit: usize,
    /// Entries of `A^{-1}` above `-inverse_tol * max|A^{-1}|` count as nonnegative.
    pub inverse_tol: f64,
    /// A witness needs `min(Au) > witness_tol * ||A||_inf * ||u||_inf`.
    pub witness_tol: f64,
    /// The scaling tier runs at most `scaling_steps_per_row * n` steps.
    pub scaling_steps_per_row: usize,
}

impl Default for ClassConfig {
    fn default() -> Self {
        Self {
            dense_limit: DENSE_LIMIT,
            inverse_tol: 1e-12,
            witness_tol: 1e-12,
            scaling_steps_per_row: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassMethod {
    DiagonalDominance,
    ScalingIteration,
    DenseInverse,
    /// Decided from the sign pattern alone.
    Structure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixClassReport {
    pub is_m_matrix: bool,
    pub is_h_matrix: bool,
    pub is_monotone: bool,
    /// Positive `u` with `<A> u > 0`, when one was found.
    pub witness: Option<Vec<f64>>,
    pub method: ClassMethod,
    pub reason: Option<String>,
}

impl MatrixClassReport {
    fn negative(method: ClassMethod, reason: String) -> Self {
        Self {
            is_m_matrix: false,
            is_h_matrix: false,
            is_monotone: false,
            witness: None,
            method,
            reason: Some(reason),
        }
    }
}

/// Checks whether `A` is a nonsingular M-matrix.
pub fn is_m_matrix(a: &SparseMatrix, config: &ClassConfig) -> Result<MatrixClassReport> {
    let n = a.require_square("M-matrix candidate")?;
    if let Some((i, j, v)) = a.iter().find(|&(i, j, v)| i != j && v > 0.0) {
        return Ok(MatrixClassReport::negative(
            ClassMethod::Structure,
            format!("positive off-diagonal entry ({i}, {j}) = {v}"),
        ));
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Ok(MatrixClassReport::negative(
            ClassMethod::Structure,
            format!("nonpositive diagonal entry at row {i}"),
        ));
    }
    let found = |u: Vec<f64>, method| MatrixClassReport {
        is_m_matrix: true,
        is_h_matrix: true,
        is_monotone: true,
        witness: Some(u),
        method,
        reason: None,
    };

    let scale = a.norm_inf();
    let ones = vec![1.0; n];
    if is_witness(a, &ones, scale, config) {
        return Ok(found(ones, ClassMethod::DiagonalDominance));
    }

    if let Some(u) = scaling_witness(a, &diag, scale, config) {
        return Ok(found(u, ClassMethod::ScalingIteration));
    }

    if n > config.dense_limit {
        return Ok(MatrixClassReport::negative(
            ClassMethod::ScalingIteration,
            format!(
                "no positive scaling found in {} steps and n = {n} exceeds the dense limit",
                config.scaling_steps_per_row * n
            ),
        ));
    }
    match nonnegative_inverse(a, config) {
        Ok(true) => {
            let lu = DenseLu::factor_with_limit(a, config.dense_limit)?;
            let u = lu.solve(&ones)?;
            if u.iter().all(|&v| v > 0.0) {
                Ok(found(u, ClassMethod::DenseInverse))
            } else {
                Ok(MatrixClassReport::negative(
                    ClassMethod::DenseInverse,
                    "A^{-1} 1 is not strictly positive".into(),
                ))
            }
        }
        Ok(false) => Ok(MatrixClassReport::negative(
            ClassMethod::DenseInverse,
            "inverse has a negative entry".into(),
        )),
        Err(e) => Ok(MatrixClassReport::negative(
            ClassMethod::DenseInverse,
            format!("dense factorization failed: {e}"),
        )),
    }
}

/// `A` is an H-matrix iff its comparison matrix is an M-matrix. The witness
/// refers to `<A>`.
pub fn is_h_matrix(a: &SparseMatrix, config: &ClassConfig) -> Result<MatrixClassReport> {
    let cmp = comparison_matrix(a)?;
    let mut report = is_m_matrix(&cmp, config)?;
    let z_pattern = a
        .iter()
        .all(|(i, j, v)| if i == j { v > 0.0 } else { v <= 0.0 });
    report.is_m_matrix = report.is_h_matrix && z_pattern;
    report.is_monotone = report.is_m_matrix;
    Ok(report)
}

/// Checks `A^{-1} >= 0`: by the dense inverse when `n <= dense_limit`,
/// otherwise by the M-matrix sufficient test.
pub fn is_monotone(a: &SparseMatrix, config: &ClassConfig) -> Result<MatrixClassReport> {
    let n = a.require_square("monotonicity candidate")?;
    if n > config.dense_limit {
        let mut report = is_m_matrix(a, config)?;
        if !report.is_m_matrix {
            report.reason = Some(format!(
                "n = {n} exceeds the dense limit and the M-matrix sufficient test failed"
            ));
        }
        return Ok(report);
    }
    let monotone = match nonnegative_inverse(a, config) {
        Ok(v) => v,
        Err(e) => {
            return Ok(MatrixClassReport::negative(
                ClassMethod::DenseInverse,
                format!("dense factorization failed: {e}"),
            ))
        }
    };
    let class = is_h_matrix(a, config)?;
    Ok(MatrixClassReport {
        is_m_matrix: class.is_m_matrix,
        is_h_matrix: class.is_h_matrix,
        is_monotone: monotone,
        witness: None,
        method: ClassMethod::DenseInverse,
        reason: (!monotone).then(|| "inverse has a negative entry".to_string()),
    })
}

fn is_witness(a: &SparseMatrix, u: &[f64], scale: f64, config: &ClassConfig) -> bool {
    let threshold = config.witness_tol * scale * norm_inf(u);
    u.iter().all(|&v| v > 0.0) && a.mul_vec(u).iter().all(|&v| v > threshold)
}

fn scaling_witness(
    a: &SparseMatrix,
    diag: &[f64],
    scale: f64,
    config: &ClassConfig,
) -> Option<Vec<f64>> {
    let n = a.n_rows();
    let mut u = vec![0.0; n];
    let mut nu = vec![0.0; n];
    for _ in 0..config.scaling_steps_per_row * n {
        // N u = D u - A u
        a.mul_vec_into(&u, &mut nu);
        for i in 0..n {
            nu[i] = diag[i] * u[i] - nu[i];
        }
        for i in 0..n {
            u[i] = (1.0 + nu[i]) / diag[i];
        }
        let size = norm_inf(&u);
        if !size.is_finite() || size > 1e150 {
            return None;
        }
        if is_witness(a, &u, scale, config) {
            return Some(u.iter().map(|v| v / size).collect());
        }
    }
    None
}

fn nonnegative_inverse(a: &SparseMatrix, config: &ClassConfig) -> Result<bool> {
    let inv = DenseLu::factor_with_limit(a, config.dense_limit)?.inverse();
    let largest = inv.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = -config.inverse_tol * largest;
    Ok(inv.iter().flatten().all(|&v| v >= floor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn cfg() -> ClassConfig {
        ClassConfig::default()
    }

    #[test]
    fn dominant_two_by_two() {
        let r = is_m_matrix(&m(&[&[2.0, -1.0], &[-1.0, 2.0]]), &cfg()).unwrap();
        assert!(r.is_m_matrix && r.is_monotone);
        assert_eq!(r.witness, Some(vec![1.0, 1.0]));
        assert_eq!(r.method, ClassMethod::DiagonalDominance);
    }

    #[test]
    fn singular_is_not_m_matrix() {
        let r = is_m_matrix(&m(&[&[1.0, -1.0], &[-1.0, 1.0]]), &cfg()).unwrap();
        assert!(!r.is_m_matrix);
        assert!(r.witness.is_none());
    }

    #[test]
    fn tridiagonal_three() {
        let a = m(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        let r = is_m_matrix(&a, &cfg()).unwrap();
        assert!(r.is_m_matrix);
        // independent route: dense inverse computed by LU is nonnegative
        let inv = super::super::dense_inverse(&a).unwrap();
        assert!(inv.iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn positive_off_diagonal_is_a_reason_not_an_error() {
        let r = is_m_matrix(&m(&[&[2.0, 1.0], &[1.0, 2.0]]), &cfg()).unwrap();
        assert!(!r.is_m_matrix);
        assert!(r.reason.unwrap().contains("positive off-diagonal"));
    }

    #[test]
    fn h_matrix_examples() {
        let r = is_h_matrix(&m(&[&[2.0, 1.0], &[1.0, 2.0]]), &cfg()).unwrap();
        assert!(r.is_h_matrix);
        assert!(!r.is_m_matrix);
        let r = is_h_matrix(&m(&[&[1.0, 2.0], &[2.0, 1.0]]), &cfg()).unwrap();
        assert!(!r.is_h_matrix);
    }

    #[test]
    fn laplacian_25_uses_scaling_iteration() {
        // 5x5 interior grid, h = 1/6
        let side = 5;
        let n = side * side;
        let h2 = 1.0 / 36.0;
        let mut t = Vec::new();
        for r in 0..side {
            for c in 0..side {
                let i = r * side + c;
                t.push((i, i, 4.0 / h2));
                if c > 0 {
                    t.push((i, i - 1, -1.0 / h2));
                }
                if c + 1 < side {
                    t.push((i, i + 1, -1.0 / h2));
                }
                if r > 0 {
                    t.push((i, i - side, -1.0 / h2));
                }
                if r + 1 < side {
                    t.push((i, i + side, -1.0 / h2));
                }
            }
        }
        let a = SparseMatrix::from_triplets(n, n, t).unwrap();
        let r = is_h_matrix(&a, &cfg()).unwrap();
        assert!(r.is_h_matrix && r.is_m_matrix);
        assert_eq!(r.method, ClassMethod::ScalingIteration);
        let u = r.witness.unwrap();
        assert!(a.mul_vec(&u).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn monotone_but_not_m_matrix() {
        // inverse [[1,-2],[0,1]] has a negative entry
        let r = is_monotone(&m(&[&[1.0, 2.0], &[0.0, 1.0]]), &cfg()).unwrap();
        assert!(!r.is_monotone);
        // inverse [[1,1],[0,1]]
        let r = is_monotone(&m(&[&[1.0, -1.0], &[0.0, 1.0]]), &cfg()).unwrap();
        assert!(r.is_monotone);
    }
}
