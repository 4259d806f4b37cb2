use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// How the strictly lower part of `-B` is divided between `V` and `V*`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LowerPartition {
    /// Everything goes to `V`; `V* = 0`.
    #[default]
    AllToV,
    /// Odd rows (0-based) to `V`, even rows to `V*`.
    AlternateRows,
    /// Columns `< n/2` to `V`, the rest to `V*`.
    ColumnHalves,
    /// Listed `(row, col)` positions (0-based) go to `V*`, all others to `V`.
    Mask(Arc<HashSet<(usize, usize)>>),
}

impl LowerPartition {
    pub fn mask<I: IntoIterator<Item = (usize, usize)>>(positions: I) -> Self {
        LowerPartition::Mask(Arc::new(positions.into_iter().collect()))
    }

    fn to_v_star(&self, i: usize, j: usize, n: usize) -> bool {
        match self {
            LowerPartition::AllToV => false,
            LowerPartition::AlternateRows => i % 2 == 0,
            LowerPartition::ColumnHalves => j >= n / 2,
            LowerPartition::Mask(set) => set.contains(&(i, j)),
        }
    }
}

impl fmt::Display for LowerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerPartition::AllToV => f.write_str("all"),
            LowerPartition::AlternateRows => f.write_str("alt-rows"),
            LowerPartition::ColumnHalves => f.write_str("col-halves"),
            LowerPartition::Mask(set) => write!(f, "mask({} entries)", set.len()),
        }
    }
}

/// Parses `all`, `alt-rows` and `col-halves`. Masks come from a file and
/// are handled by the harness.
impl FromStr for LowerPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(LowerPartition::AllToV),
            "alt-rows" => Ok(LowerPartition::AlternateRows),
            "col-halves" => Ok(LowerPartition::ColumnHalves),
            other => Err(Error::Parameter(format!(
                "unknown lower partition '{other}' (expected all, alt-rows, col-halves or mask:<file>)"
            ))),
        }
    }
}

/// `B = D - (V + V*) - U` with `D` diagonal, `V`, `V*` strictly lower with
/// disjoint patterns and `U` strictly upper.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageSplit {
    d: SparseMatrix,
    v: SparseMatrix,
    v_star: SparseMatrix,
    u: SparseMatrix,
    b: SparseMatrix,
}

impl TwoStageSplit {
    pub fn d(&self) -> &SparseMatrix {
        &self.d
    }

    pub fn v(&self) -> &SparseMatrix {
        &self.v
    }

    pub fn v_star(&self) -> &SparseMatrix {
        &self.v_star
    }

    pub fn u(&self) -> &SparseMatrix {
        &self.u
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.n_rows()
    }

    /// `D - V - V* - U`, entry by entry.
    pub fn reconstruct(&self) -> SparseMatrix {
        self.d
            .sub(&self.v)
            .and_then(|m| m.sub(&self.v_star))
            .and_then(|m| m.sub(&self.u))
            .expect("split pieces share the dimension of B")
    }
}

/// Splits `B` into its diagonal, the two strictly lower pieces chosen by
/// `partition`, and the strictly upper remainder.
pub fn two_stage_decompose(b: &SparseMatrix, partition: &LowerPartition) -> Result<TwoStageSplit> {
    let n = b.require_square("two-stage split input")?;
    let diag = b.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::Singular { row });
    }
    let mut v = Vec::new();
    let mut v_star = Vec::new();
    let mut u = Vec::new();
    for (i, j, x) in b.iter() {
        if j < i {
            if partition.to_v_star(i, j, n) {
                v_star.push((i, j, -x));
            } else {
                v.push((i, j, -x));
            }
        } else if j > i {
            u.push((i, j, -x));
        }
    }
    Ok(TwoStageSplit {
        d: SparseMatrix::from_diagonal(&diag),
        v: SparseMatrix::from_triplets(n, n, v)?,
        v_star: SparseMatrix::from_triplets(n, n, v_star)?,
        u: SparseMatrix::from_triplets(n, n, u)?,
        b: b.clone(),
    })
}

pub(crate) fn check_pair(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Parameter(format!(
            "alpha = {alpha} and beta = {beta} must be finite"
        )));
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::Parameter(format!(
            "alpha = {alpha} and beta = {beta} must both be nonnegative"
        )));
    }
    if alpha + beta <= 0.0 {
        return Err(Error::Parameter("alpha + beta must be positive".into()));
    }
    Ok(())
}

/// The TOR pair `M = (2D - alpha V - beta V*) / (alpha + beta)` and
/// `N = M - B`.
///
/// Each entry of `M` is moved by at most a few ulps onto a value for which
/// `m - b` is representable, so that `M - N` reproduces `B` bit for bit.
/// When no such value exists nearby (large `m/b`, full-width `b`), the
/// rounded formula value is kept.
pub fn tor_matrices(
    split: &TwoStageSplit,
    alpha: f64,
    beta: f64,
) -> Result<(SparseMatrix, SparseMatrix)> {
    check_pair(alpha, beta)?;
    let n = split.dim();
    let sum = alpha + beta;
    let mut entries = Vec::with_capacity(n + split.v.nnz() + split.v_star.nnz());
    // -alpha * V = alpha * B on the pattern of V (same for V*)
    for (piece, weight) in [(&split.v, alpha), (&split.v_star, beta)] {
        for (i, j, _) in piece.iter() {
            let b = split.b.get(i, j);
            entries.push((i, j, snap(weight * b / sum, b)));
        }
    }
    for (i, &d) in split.d.diagonal().iter().enumerate() {
        let m = snap(2.0 * d / sum, d);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Parameter(format!(
                "alpha + beta = {sum} gives a degenerate diagonal at row {i}"
            )));
        }
        entries.push((i, i, m));
    }
    let m = SparseMatrix::from_triplets(n, n, entries)?;
    let nmat = m.sub(&split.b)?;
    Ok((m, nmat))
}

fn round_trips(m: f64, b: f64) -> bool {
    let n = m - b;
    m - n == b
}

/// Nearest value to `m` (within a few ulps) such that `m - (m - b) == b`.
fn snap(m: f64, b: f64) -> f64 {
    if m == 0.0 || round_trips(m, b) {
        return m;
    }
    let mut up = m;
    let mut down = m;
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        if round_trips(down, b) {
            return down;
        }
        if round_trips(up, b) {
            return up;
        }
    }
    m
}
