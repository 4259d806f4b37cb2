//! Compares the splitting solver with a direct Picard reference solution on
//! a problem with an affine map `G(x) = K x + f`.

use mstor::harness::{picard_contraction, picard_oracle};
use mstor::nonlinear::{tridiagonal, Provenance};
use mstor::solver::{solve, SolverConfig};
use mstor::sparse::{max_abs_diff, DenseLu};
use mstor::splitting::{build_multisplitting, LowerPartition, SplittingStrategy, TorParameters};
use mstor::{BoundedMap, SparseMatrix, WeaklyNonlinearProblem};

fn main() -> mstor::Result<()> {
    let n = 30;
    let a = tridiagonal(n).add(&SparseMatrix::identity(n).scale(2.0))?;
    let k = SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, (i * 7) % n, 0.05)))?;
    let g = BoundedMap::affine(k, (0..n).map(|i| (i as f64 / 5.0).sin()).collect())?;
    let problem = WeaklyNonlinearProblem::new(a, g, "affine", None, Provenance::Generated)?;

    let rho = picard_contraction(&DenseLu::factor(problem.a())?, problem.p())?;
    println!("rho(|A^-1| P) = {rho:.4}");
    let reference = picard_oracle(&problem, 1e-14, 10_000)?;

    let ms = build_multisplitting(
        problem.a(),
        5,
        SplittingStrategy::BlockOverlap(2),
        &LowerPartition::AllToV,
    )?;
    let mut config = SolverConfig::new(TorParameters::uniform(0.9, 0.9)?);
    config.tol_residual = 1e-13;
    let report = solve(&problem, &ms, &config, vec![0.0; n])?;
    println!(
        "solver: {} steps, |x - x_ref| = {:.2e}",
        report.outer_iterations,
        max_abs_diff(&report.solution, &reference)
    );
    Ok(())
}
