//! Checks for the convergence hypotheses of the two-stage TOR iteration and
//! the resulting bound on `alpha + beta`.
//!
//! Two settings are covered. For an H-matrix `A = D - B` with a P-bounded
//! map, convergence holds for `0 < alpha + beta < 4 / (1 + rho(|D|^{-1}(|B| + P)))`
//! when the splittings keep `<A> = <B_l> - |C_l|`, share the diagonal of `A`,
//! and split `B_l` without cancellation. For a monotone `A` with regular
//! splittings and nonnegative pieces the bound is `2`.

use serde::{Deserialize, Serialize};

use super::multi::MultiSplitting;
use crate::error::{Error, Result};
use crate::sparse::{
    abs_matrix, comparison_matrix, is_h_matrix, is_monotone, norm_inf, spectral_radius_nonneg,
    spectral_radius_of, ClassConfig, DenseLu, LinearOperator, SparseMatrix, SpectralConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisKind {
    /// `A` is an H-matrix; bound `4 / (1 + rho)`.
    HMatrix,
    /// `A` is monotone with regular splittings; bound `2`.
    Monotone,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub theorem: HypothesisKind,
    pub checks: Vec<HypothesisCheck>,
    pub rho_value: f64,
    pub parameter_upper_bound: f64,
    pub warnings: Vec<String>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(HypothesisCheck {
            name,
            passed,
            detail: detail.into(),
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidationConfig {
    pub class: ClassConfig,
    pub spectral: SpectralConfig,
}

/// `|D|^{-1}(|B| + P)` for `A = D - B`, `D = diag(A)`.
pub fn jacobi_bound_matrix(a: &SparseMatrix, p: &SparseMatrix) -> Result<SparseMatrix> {
    let n = a.require_square("system matrix")?;
    check_bound_matrix(n, p)?;
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::Singular { row });
    }
    let off = a
        .iter()
        .filter(|&(i, j, _)| i != j)
        .map(|(i, j, v)| (i, j, v.abs()));
    let entries = off
        .chain(p.iter())
        .map(|(i, j, v)| (i, j, v / diag[i].abs()));
    SparseMatrix::from_triplets(n, n, entries)
}

/// Upper end of the admissible range for `alpha + beta`.
pub fn tor_parameter_bound(
    a: &SparseMatrix,
    p: &SparseMatrix,
    kind: HypothesisKind,
    config: &ValidationConfig,
) -> Result<f64> {
    match kind {
        HypothesisKind::Monotone => {
            a.require_square("system matrix")?;
            check_bound_matrix(a.n_rows(), p)?;
            Ok(2.0)
        }
        HypothesisKind::HMatrix => {
            let rho = spectral_radius_nonneg(&jacobi_bound_matrix(a, p)?, &config.spectral)?;
            Ok(4.0 / (1.0 + rho))
        }
    }
}

fn check_bound_matrix(n: usize, p: &SparseMatrix) -> Result<()> {
    if p.n_rows() != n || p.n_cols() != n {
        return Err(Error::Dimension(format!(
            "P is {}x{}, expected {n}x{n}",
            p.n_rows(),
            p.n_cols()
        )));
    }
    if let Some((i, j, v)) = p.first_negative() {
        return Err(Error::Domain(format!(
            "P has negative entry ({i}, {j}) = {v}"
        )));
    }
    Ok(())
}

fn check_inputs(a: &SparseMatrix, ms: &MultiSplitting, p: &SparseMatrix) -> Result<usize> {
    let n = a.require_square("system matrix")?;
    if ms.dim() != n {
        return Err(Error::Dimension(format!(
            "multi-splitting has dimension {}, A has {n}",
            ms.dim()
        )));
    }
    check_bound_matrix(n, p)?;
    Ok(n)
}

/// `x -> F^{-1} P x` for a dense factorization `F`.
struct InverseTimes<'a> {
    lu: DenseLu,
    p: &'a SparseMatrix,
    norm: f64,
}

impl<'a> InverseTimes<'a> {
    fn new(f: &SparseMatrix, p: &'a SparseMatrix, config: &ClassConfig) -> Result<Self> {
        let lu = DenseLu::factor_with_limit(f, config.dense_limit)?;
        let inv_norm = norm_inf(&lu.solve(&vec![1.0; f.n_rows()])?);
        Ok(Self {
            lu,
            p,
            norm: inv_norm * p.norm_inf(),
        })
    }
}

impl LinearOperator for InverseTimes<'_> {
    fn dim(&self) -> usize {
        self.lu.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.p.mul_vec_into(x, y);
        self.lu
            .solve_in_place(y)
            .expect("operator dimension matches the factor");
    }

    fn norm_bound(&self) -> f64 {
        self.norm
    }
}

fn dense_rho(f: &SparseMatrix, p: &SparseMatrix, config: &ValidationConfig) -> Option<Result<f64>> {
    (f.n_rows() <= config.class.dense_limit).then(|| {
        let op = InverseTimes::new(f, p, &config.class)?;
        spectral_radius_of(&op, &config.spectral)
    })
}

fn first_mismatch(x: &SparseMatrix, y: &SparseMatrix) -> Option<(usize, usize, f64)> {
    x.sub(y).ok().and_then(|d| d.iter().next())
}

/// Validates the H-matrix hypotheses for `A`, the multi-splitting `ms` and
/// the bound matrix `P` of the nonlinear map.
pub fn validate_h_hypotheses(
    a: &SparseMatrix,
    ms: &MultiSplitting,
    p: &SparseMatrix,
    config: &ValidationConfig,
) -> Result<HypothesisReport> {
    let n = check_inputs(a, ms, p)?;
    let mut report = HypothesisReport {
        theorem: HypothesisKind::HMatrix,
        checks: Vec::new(),
        rho_value: f64::NAN,
        parameter_upper_bound: f64::NAN,
        warnings: Vec::new(),
    };

    let class = is_h_matrix(a, &config.class)?;
    report.push(
        "a_is_h_matrix",
        class.is_h_matrix,
        match &class.reason {
            Some(r) => format!("{:?}: {r}", class.method),
            None => format!("witness found by {:?}", class.method),
        },
    );

    let cmp_a = comparison_matrix(a)?;
    let rho = spectral_radius_nonneg(&jacobi_bound_matrix(a, p)?, &config.spectral)?;
    report.rho_value = rho;
    report.parameter_upper_bound = 4.0 / (1.0 + rho);
    let mut passed = rho < 1.0;
    let mut detail = format!("rho(|D|^-1(|B|+P)) = {rho:.12}");
    match dense_rho(&cmp_a, p, config) {
        Some(Ok(exact)) => {
            passed &= exact < 1.0;
            detail.push_str(&format!(", rho(<A>^-1 P) = {exact:.12}"));
        }
        Some(Err(e)) => {
            passed = false;
            detail.push_str(&format!(", dense check failed: {e}"));
        }
        None => detail.push_str(&format!(", dense check skipped (n = {n})")),
    }
    report.push("rho_lt_one", passed, detail);

    let mut comparison_ok = Ok(());
    let mut diagonal_ok = Ok(());
    let mut pieces_ok = Ok(());
    let diag_a = a.diagonal();
    for (l, split) in ms.splits().iter().enumerate() {
        let cmp_b = comparison_matrix(split.b())?;
        let rhs = cmp_b.sub(&abs_matrix(ms.c(l)))?;
        if comparison_ok.is_ok() {
            if let Some((i, j, d)) = first_mismatch(&cmp_a, &rhs) {
                comparison_ok = Err(format!(
                    "l = {}: <A> - (<B_l> - |C_l|) = {d:e} at ({i}, {j})",
                    l + 1
                ));
            }
        }
        if diagonal_ok.is_ok() {
            let d_l = split.d().diagonal();
            if let Some(row) = (0..n).find(|&i| d_l[i] != diag_a[i]) {
                diagonal_ok = Err(format!(
                    "l = {}, row {row}: D_l = {} but diag(A) = {}",
                    l + 1,
                    d_l[row],
                    diag_a[row]
                ));
            }
        }
        if pieces_ok.is_ok() {
            let pieces = abs_matrix(split.d())
                .sub(&abs_matrix(split.v()))?
                .sub(&abs_matrix(split.v_star()))?
                .sub(&abs_matrix(split.u()))?;
            if let Some((i, j, d)) = first_mismatch(&cmp_b, &pieces) {
                pieces_ok = Err(format!(
                    "l = {}: <B_l> - (|D_l| - |V_l| - |V_l*| - |U_l|) = {d:e} at ({i}, {j})",
                    l + 1
                ));
            }
        }
    }
    let mut push_result = |name, r: std::result::Result<(), String>| {
        let passed = r.is_ok();
        report.push(
            name,
            passed,
            r.err().unwrap_or_else(|| "holds for every l".into()),
        );
    };
    push_result("comparison_identity", comparison_ok);
    push_result("shared_diagonal", diagonal_ok);
    push_result("split_without_cancellation", pieces_ok);
    Ok(report)
}

/// Validates the monotone-matrix hypotheses.
pub fn validate_monotone_hypotheses(
    a: &SparseMatrix,
    ms: &MultiSplitting,
    p: &SparseMatrix,
    config: &ValidationConfig,
) -> Result<HypothesisReport> {
    let n = check_inputs(a, ms, p)?;
    let mut report = HypothesisReport {
        theorem: HypothesisKind::Monotone,
        checks: Vec::new(),
        rho_value: f64::NAN,
        parameter_upper_bound: 2.0,
        warnings: Vec::new(),
    };

    let class = is_monotone(a, &config.class)?;
    report.push(
        "a_is_monotone",
        class.is_monotone,
        class
            .reason
            .clone()
            .unwrap_or_else(|| format!("A^-1 >= 0 ({:?})", class.method)),
    );

    let (passed, detail) = match dense_rho(a, p, config) {
        Some(Ok(rho)) => {
            report.rho_value = rho;
            (rho < 1.0, format!("rho(A^-1 P) = {rho:.12}"))
        }
        Some(Err(e)) => (false, format!("dense check failed: {e}")),
        None if class.is_m_matrix => {
            // A - P = D - (|B| + P) is a regular splitting when A is an M-matrix
            let rho = spectral_radius_nonneg(&jacobi_bound_matrix(a, p)?, &config.spectral)?;
            report.rho_value = rho;
            (
                rho < 1.0,
                format!("n = {n} above the dense limit; rho(D^-1(|B|+P)) = {rho:.12}"),
            )
        }
        None => (
            false,
            format!("n = {n} above the dense limit and A is not an M-matrix"),
        ),
    };
    report.push("rho_lt_one", passed, detail);

    let mut regular_ok = Ok(());
    let mut signs_ok = Ok(());
    for (l, split) in ms.splits().iter().enumerate() {
        if regular_ok.is_ok() {
            if let Some((i, j, v)) = ms.c(l).first_negative() {
                regular_ok = Err(format!(
                    "l = {}: C_l has negative entry ({i}, {j}) = {v}",
                    l + 1
                ));
            } else {
                let b_class = is_monotone(split.b(), &config.class)?;
                if !b_class.is_monotone {
                    regular_ok = Err(format!(
                        "l = {}: B_l^-1 is not nonnegative ({})",
                        l + 1,
                        b_class.reason.unwrap_or_default()
                    ));
                }
            }
        }
        if signs_ok.is_ok() {
            let named = [
                ("D_l", split.d()),
                ("V_l", split.v()),
                ("V_l*", split.v_star()),
                ("U_l", split.u()),
            ];
            if let Some((name, (i, j, v))) = named
                .iter()
                .find_map(|(name, m)| m.first_negative().map(|e| (name, e)))
            {
                signs_ok = Err(format!(
                    "l = {}: {name} has negative entry ({i}, {j}) = {v}",
                    l + 1
                ));
            }
        }
    }
    for (name, r) in [
        ("regular_splittings", regular_ok),
        ("nonnegative_pieces", signs_ok),
    ] {
        let passed = r.is_ok();
        report.push(
            name,
            passed,
            r.err().unwrap_or_else(|| "holds for every l".into()),
        );
    }
    Ok(report)
}
