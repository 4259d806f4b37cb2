use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::two_stage::{two_stage_decompose, LowerPartition, TwoStageSplit};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Per-index tolerance on `sum_l E_l = I`.
pub const WEIGHT_SUM_TOL: f64 = 1e-15;

/// How the `p` splittings `A = B_l - C_l` are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingStrategy {
    /// Contiguous non-overlapping blocks, binary weights.
    BlockJacobi,
    /// Blocks widened by `k` indices on each side, weights `1/coverage`.
    BlockOverlap(usize),
    /// `B_l = A`, `C_l = 0`, `E_l = I/p`.
    GlobalCopies,
}

impl fmt::Display for SplittingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplittingStrategy::BlockJacobi => f.write_str("block0"),
            SplittingStrategy::BlockOverlap(k) => write!(f, "overlap:{k}"),
            SplittingStrategy::GlobalCopies => f.write_str("global"),
        }
    }
}

impl FromStr for SplittingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block0" => Ok(SplittingStrategy::BlockJacobi),
            "global" => Ok(SplittingStrategy::GlobalCopies),
            _ => match s.strip_prefix("overlap:") {
                Some(k) => k.parse().map(SplittingStrategy::BlockOverlap).map_err(|_| {
                    Error::Parameter(format!("overlap width '{k}' is not a nonnegative integer"))
                }),
                None => Err(Error::Parameter(format!(
                    "unknown splitting '{s}' (expected block0, overlap:<k> or global)"
                ))),
            },
        }
    }
}

/// The collection `(B_l : D_l, V_l, V_l*, U_l; C_l; E_l)`, `l = 1..p`.
#[derive(Debug, Clone)]
pub struct MultiSplitting {
    n: usize,
    splits: Vec<TwoStageSplit>,
    c: Vec<SparseMatrix>,
    weights: Vec<Vec<f64>>,
}

impl MultiSplitting {
    /// Assembles a multi-splitting from explicit `B_l` and diagonal weights.
    /// `C_l = B_l - A` is computed here and `B_l - C_l = A` is checked
    /// entry by entry.
    pub fn from_parts(
        a: &SparseMatrix,
        b: Vec<SparseMatrix>,
        weights: Vec<Vec<f64>>,
        partition: &LowerPartition,
    ) -> Result<Self> {
        let n = a.require_square("system matrix")?;
        if b.is_empty() || b.len() != weights.len() {
            return Err(Error::Splitting(format!(
                "need p >= 1 matrices with matching weights, got {} and {}",
                b.len(),
                weights.len()
            )));
        }
        check_weights(n, &weights)?;
        let mut splits = Vec::with_capacity(b.len());
        let mut c = Vec::with_capacity(b.len());
        for (l, bl) in b.into_iter().enumerate() {
            if bl.n_rows() != n || bl.n_cols() != n {
                return Err(Error::Dimension(format!(
                    "B_{} is {}x{}, A is {n}x{n}",
                    l + 1,
                    bl.n_rows(),
                    bl.n_cols()
                )));
            }
            let cl = bl.sub(a)?;
            if bl.sub(&cl)? != *a {
                return Err(Error::Splitting(format!(
                    "B_{} - C_{} does not reproduce A exactly in floating point",
                    l + 1,
                    l + 1
                )));
            }
            splits.push(two_stage_decompose(&bl, partition)?);
            c.push(cl);
        }
        Ok(Self {
            n,
            splits,
            c,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of splittings `p`.
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    pub fn splits(&self) -> &[TwoStageSplit] {
        &self.splits
    }

    pub fn split(&self, l: usize) -> &TwoStageSplit {
        &self.splits[l]
    }

    pub fn b(&self, l: usize) -> &SparseMatrix {
        self.splits[l].b()
    }

    pub fn c(&self, l: usize) -> &SparseMatrix {
        &self.c[l]
    }

    /// Diagonal of `E_l`.
    pub fn weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    /// `sum_l (E_l)_ii`, accumulated in index order.
    pub fn weight_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for w in &self.weights {
            for (s, &x) in sums.iter_mut().zip(w) {
                *s += x;
            }
        }
        sums
    }
}

fn check_weights(n: usize, weights: &[Vec<f64>]) -> Result<()> {
    for (l, w) in weights.iter().enumerate() {
        if w.len() != n {
            return Err(Error::Dimension(format!(
                "E_{} has {} entries, expected {n}",
                l + 1,
                w.len()
            )));
        }
        if let Some(i) = w.iter().position(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Splitting(format!(
                "weight (E_{})_{i}{i} = {} is outside [0, 1]",
                l + 1,
                w[i]
            )));
        }
    }
    for i in 0..n {
        let s: f64 = weights.iter().map(|w| w[i]).sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Splitting(format!(
                "weights at index {i} sum to {s}, not 1"
            )));
        }
    }
    Ok(())
}

/// Contiguous block ranges; the first `n % p` blocks get one extra index.
pub fn block_ranges(n: usize, p: usize) -> Vec<std::ops::Range<usize>> {
    let base = n / p;
    let extra = n % p;
    let mut start = 0;
    (0..p)
        .map(|l| {
            let len = base + usize::from(l < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Builds `p` splittings of `A` with the given strategy, then splits each
/// `B_l` with `partition`.
pub fn build_multisplitting(
    a: &SparseMatrix,
    p: usize,
    strategy: SplittingStrategy,
    partition: &LowerPartition,
) -> Result<MultiSplitting> {
    let n = a.require_square("system matrix")?;
    if p == 0 || p > n {
        return Err(Error::Splitting(format!(
            "cannot build {p} splittings of a matrix with n = {n}"
        )));
    }
    let (b, weights) = match strategy {
        SplittingStrategy::GlobalCopies => {
            let w = 1.0 / p as f64;
            (vec![a.clone(); p], vec![vec![w; n]; p])
        }
        SplittingStrategy::BlockJacobi => blocks(a, p, 0),
        SplittingStrategy::BlockOverlap(k) => blocks(a, p, k),
    };
    MultiSplitting::from_parts(a, b, weights, partition)
}

fn blocks(a: &SparseMatrix, p: usize, overlap: usize) -> (Vec<SparseMatrix>, Vec<Vec<f64>>) {
    let n = a.n_rows();
    let ranges: Vec<_> = block_ranges(n, p)
        .into_iter()
        .map(|r| r.start.saturating_sub(overlap)..(r.end + overlap).min(n))
        .collect();
    let mut coverage = vec![0usize; n];
    for r in &ranges {
        for i in r.clone() {
            coverage[i] += 1;
        }
    }
    let b = ranges
        .iter()
        .map(|r| a.filter(|i, j, _| i == j || (r.contains(&i) && r.contains(&j))))
        .collect();
    let weights = ranges
        .iter()
        .map(|r| {
            (0..n)
                .map(|i| {
                    if r.contains(&i) {
                        1.0 / coverage[i] as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    (b, weights)
}
