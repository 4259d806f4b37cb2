use super::SparseMatrix;
use crate::error::{Error, Result};

/// Forward substitution for a sparse lower-triangular `L`.
pub fn lower_triangular_solve(l: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = b.to_vec();
    lower_triangular_solve_into(l, &mut x)?;
    Ok(x)
}

/// In-place forward substitution: on entry `x` holds the right-hand side.
///
/// The diagonal entry must be the last stored entry of each row, which is
/// the case for any lower-triangular CSR matrix.
pub fn lower_triangular_solve_into(l: &SparseMatrix, x: &mut [f64]) -> Result<()> {
    let n = l.require_square("triangular factor")?;
    if x.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, expected {n}",
            x.len()
        )));
    }
    for i in 0..n {
        let (cols, vals) = l.row(i);
        let Some((&last, off_cols)) = cols.split_last() else {
            return Err(Error::Singular { row: i });
        };
        if last > i {
            return Err(Error::NotLowerTriangular { row: i });
        }
        let diag = vals[vals.len() - 1];
        if last != i || diag == 0.0 {
            return Err(Error::Singular { row: i });
        }
        let s: f64 = off_cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        x[i] = (x[i] - s) / diag;
    }
    Ok(())
}
