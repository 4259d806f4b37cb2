//! Compares the classical special cases of the two-stage TOR step on one
//! problem.

use mstor::nonlinear::{generate_grid_problem, Nonlinearity};
use mstor::solver::{preset_parameters, solve, MethodFamily, SolverConfig};
use mstor::splitting::{build_multisplitting, LowerPartition, SplittingStrategy};

fn main() -> mstor::Result<()> {
    let problem =
        generate_grid_problem(10, Nonlinearity::ExpDecay, 5.0)?.with_source(vec![2.0; 100])?;
    let ms = build_multisplitting(
        problem.a(),
        1,
        SplittingStrategy::BlockJacobi,
        &LowerPartition::AllToV,
    )?;
    let cases = [
        ("Jacobi", MethodFamily::Jacobi, None, None),
        ("JOR w=0.9", MethodFamily::Jor, None, Some(0.9)),
        ("Gauss-Seidel", MethodFamily::Gs, None, None),
        ("SOR w=0.95", MethodFamily::Sor, None, Some(0.95)),
        ("AOR r=0.9 w=0.95", MethodFamily::Aor, Some(0.9), Some(0.95)),
    ];
    for (name, family, r, w) in cases {
        let params = preset_parameters(family, r, w)?;
        let (alpha, beta) = params.pair(0);
        let report = solve(&problem, &ms, &SolverConfig::new(params), vec![0.0; 100])?;
        println!(
            "{name:<18} alpha={alpha:<5.3} beta={beta:<5.3} steps={:>5} residual={:.2e}",
            report.outer_iterations, report.final_residual
        );
    }
    Ok(())
}
