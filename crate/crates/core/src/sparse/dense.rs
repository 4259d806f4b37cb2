//! Dense LU with partial pivoting.
//!
//! Used as a reference solver and for the small-matrix class checks
//! (monotonicity via the explicit inverse). Densification is refused above
//! [`DENSE_LIMIT`] rows.

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Largest dimension that will be densified.
pub const DENSE_LIMIT: usize = 2000;

/// Relative pivot threshold: pivots below `PIVOT_TOL * ||A||_inf` are singular.
const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    /// Row-major, L below the diagonal (unit diagonal implied), U on and above.
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        Self::factor_with_limit(a, DENSE_LIMIT)
    }

    pub fn factor_with_limit(a: &SparseMatrix, limit: usize) -> Result<Self> {
        let n = a.require_square("LU input")?;
        if n > limit {
            return Err(Error::Capacity { n, limit });
        }
        let mut lu = vec![0.0; n * n];
        for (i, j, v) in a.iter() {
            lu[i * n + j] = v;
        }
        Self::factor_dense(n, lu, a.norm_inf())
    }

    fn factor_dense(n: usize, mut lu: Vec<f64>, scale: f64) -> Result<Self> {
        let threshold = PIVOT_TOL * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(pmax > threshold) {
                return Err(Error::Singular { row: perm[k] });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    let (upper, lower) = lu.split_at_mut(i * n);
                    let row_k = &upper[k * n + k + 1..k * n + n];
                    for (dst, &src) in lower[k + 1..n].iter_mut().zip(row_k) {
                        *dst -= factor * src;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.n;
        if x.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {n}",
                x.len()
            )));
        }
        let b: Vec<f64> = self.perm.iter().map(|&p| x[p]).collect();
        x.copy_from_slice(&b);
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(())
    }

    /// Dense inverse, row-major.
    pub fn inverse(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut inv = vec![vec![0.0; n]; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col)
                .expect("column has the factor dimension");
            for i in 0..n {
                inv[i][j] = col[i];
            }
        }
        inv
    }
}

/// Solves `Ax = b` by dense LU with partial pivoting.
pub fn dense_lu_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n_rows() {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.n_rows()
        )));
    }
    DenseLu::factor(a)?.solve(b)
}

pub fn dense_inverse(a: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
    Ok(DenseLu::factor(a)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let b = [3.0, -7.5, 1e-3];
        assert_eq!(
            dense_lu_solve(&SparseMatrix::identity(3), &b).unwrap(),
            b.to_vec()
        );
    }

    #[test]
    fn two_by_two_examples() {
        let a = m(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let x = dense_lu_solve(&a, &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        // closed-form inverse of [[2,-1],[-1,2]] is [[2,1],[1,2]]/3
        let x = dense_lu_solve(&a, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn needs_pivoting() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(dense_lu_solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn singular_and_capacity_errors() {
        let a = m(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert!(matches!(
            dense_lu_solve(&a, &[1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
        let big = SparseMatrix::identity(DENSE_LIMIT + 1);
        assert!(matches!(
            DenseLu::factor(&big),
            Err(Error::Capacity { n, .. }) if n == DENSE_LIMIT + 1
        ));
    }

    #[test]
    fn inverse_of_tridiagonal_is_nonnegative() {
        let a = m(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        let inv = dense_inverse(&a).unwrap();
        // exact inverse: [[3,2,1],[2,4,2],[1,2,3]]/4
        let exact = [[0.75, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 0.75]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv[i][j] - exact[i][j]).abs() < 1e-15);
            }
        }
    }
}
