//! Solves a sine-coupled grid problem with two block splittings and prints
//! the residual history.

use mstor::nonlinear::{generate_grid_problem, Nonlinearity};
use mstor::solver::{solve, InnerSchedule, SolverConfig};
use mstor::splitting::{
    build_multisplitting, validate_h_hypotheses, LowerPartition, SplittingStrategy, TorParameters,
    ValidationConfig,
};

fn main() -> mstor::Result<()> {
    let m = 12;
    let problem =
        generate_grid_problem(m, Nonlinearity::Sine, 1.0)?.with_source(vec![1.0; m * m])?;
    let ms = build_multisplitting(
        problem.a(),
        4,
        SplittingStrategy::BlockOverlap(m),
        &LowerPartition::AlternateRows,
    )?;

    let hyp = validate_h_hypotheses(problem.a(), &ms, problem.p(), &ValidationConfig::default())?;
    println!("{}", problem.name());
    println!(
        "hypotheses hold: {}, alpha + beta < {:.6}",
        hyp.all_passed(),
        hyp.parameter_upper_bound
    );

    let sum = 0.8 * hyp.parameter_upper_bound;
    let mut config = SolverConfig::new(TorParameters::uniform(0.6 * sum, 0.4 * sum)?)
        .with_schedule(InnerSchedule::Constant(3));
    config.parameter_bound = Some(hyp.parameter_upper_bound);
    let report = solve(&problem, &ms, &config, vec![0.0; problem.dim()])?;

    for (i, r) in report.residual_history.iter().enumerate().step_by(10) {
        println!("{i:>5} {r:.3e}");
    }
    println!(
        "converged = {} after {} outer steps, residual {:.3e}, {:.1} ms",
        report.converged, report.outer_iterations, report.final_residual, report.wall_ms
    );
    Ok(())
}
