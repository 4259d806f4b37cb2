//! Checks the H-matrix and monotone hypotheses on a few matrices and prints
//! each individual check.

use mstor::nonlinear::{laplacian_2d, tridiagonal};
use mstor::splitting::{
    build_multisplitting, validate_h_hypotheses, validate_monotone_hypotheses, HypothesisReport,
    LowerPartition, SplittingStrategy, ValidationConfig,
};
use mstor::SparseMatrix;

fn show(title: &str, r: &HypothesisReport) {
    println!("{title}: {:?}, all passed = {}", r.theorem, r.all_passed());
    for c in &r.checks {
        println!(
            "  [{}] {}: {}",
            if c.passed { "ok" } else { "no" },
            c.name,
            c.detail
        );
    }
    println!(
        "  rho = {:.6}, alpha + beta < {:.6}",
        r.rho_value, r.parameter_upper_bound
    );
}

fn main() -> mstor::Result<()> {
    let cfg = ValidationConfig::default();

    let a = laplacian_2d(5);
    let p = SparseMatrix::identity(25).scale(2.0);
    let ms = build_multisplitting(
        &a,
        3,
        SplittingStrategy::BlockOverlap(2),
        &LowerPartition::ColumnHalves,
    )?;
    show(
        "grid m=5, P = 2I",
        &validate_h_hypotheses(&a, &ms, &p, &cfg)?,
    );

    let a = tridiagonal(8);
    let p = SparseMatrix::identity(8).scale(0.05);
    let ms = build_multisplitting(
        &a,
        2,
        SplittingStrategy::BlockJacobi,
        &LowerPartition::AllToV,
    )?;
    show(
        "tridiag n=8, P = 0.05I",
        &validate_monotone_hypotheses(&a, &ms, &p, &cfg)?,
    );

    // symmetric with a large positive off-diagonal: neither class applies
    let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]])?;
    let p = SparseMatrix::zeros(2, 2);
    let ms = build_multisplitting(
        &a,
        1,
        SplittingStrategy::BlockJacobi,
        &LowerPartition::AllToV,
    )?;
    show(
        "[[1, 2], [2, 1]]",
        &validate_h_hypotheses(&a, &ms, &p, &cfg)?,
    );
    Ok(())
}
