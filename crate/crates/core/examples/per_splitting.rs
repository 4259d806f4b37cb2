//! Different relaxation parameters and inner step counts on each splitting.

use mstor::nonlinear::{generate_grid_problem, Nonlinearity};
use mstor::solver::{solve, InnerSchedule, SolverConfig};
use mstor::splitting::{build_multisplitting, LowerPartition, SplittingStrategy, TorParameters};

fn main() -> mstor::Result<()> {
    let problem = generate_grid_problem(9, Nonlinearity::Sine, 1.0)?.with_source(vec![1.0; 81])?;
    let ms = build_multisplitting(
        problem.a(),
        3,
        SplittingStrategy::BlockJacobi,
        &LowerPartition::AlternateRows,
    )?;
    let runs = [
        (
            "uniform (1.0, 0.5), s = 2",
            TorParameters::uniform(1.0, 0.5)?,
            InnerSchedule::Constant(2),
        ),
        (
            "per splitting, s = 1, 2, 4",
            TorParameters::per_splitting(vec![1.2, 1.0, 0.6], vec![0.3, 0.5, 0.9])?,
            InnerSchedule::PerSplitting(vec![1, 2, 4]),
        ),
        (
            "uniform, s grows with i",
            TorParameters::uniform(1.0, 0.5)?,
            InnerSchedule::function(|_, i| 1 + i.min(20) / 5),
        ),
    ];
    for (name, params, schedule) in runs {
        let config = SolverConfig::new(params).with_schedule(schedule);
        let r = solve(&problem, &ms, &config, vec![0.0; 81])?;
        println!(
            "{name:<28} steps={:>4} residual={:.2e}",
            r.outer_iterations, r.final_residual
        );
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
