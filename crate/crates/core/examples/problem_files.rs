//! Writes a problem directory, reads it back and solves the loaded copy.

use mstor::harness::{load_problem, read_problem_file, save_problem};
use mstor::nonlinear::{generate_grid_problem, Nonlinearity};
use mstor::solver::{solve, SolverConfig};
use mstor::splitting::{build_multisplitting, LowerPartition, SplittingStrategy, TorParameters};

fn main() -> mstor::Result<()> {
    let dir = std::env::temp_dir().join("mstor_problem");
    let problem = generate_grid_problem(6, Nonlinearity::Constant(1.0), 1.0)?;
    save_problem(&problem, &dir)?;
    println!("wrote {}", dir.display());
    for name in ["A.mtx", "problem.json", "solution.vec"] {
        println!("  {name}: {}", dir.join(name).exists());
    }
    println!("{:#?}", read_problem_file(&dir)?.map);

    let loaded = load_problem(&dir)?;
    let ms = build_multisplitting(
        loaded.a(),
        2,
        SplittingStrategy::BlockJacobi,
        &LowerPartition::AllToV,
    )?;
    let report = solve(
        &loaded,
        &ms,
        &SolverConfig::new(TorParameters::uniform(1.0, 0.5)?),
        vec![0.0; 36],
    )?;
    let known = loaded
        .known_solution()
        .expect("constant maps store their solution");
    println!(
        "steps={} distance to stored solution {:.2e}",
        report.outer_iterations,
        mstor::sparse::max_abs_diff(&report.solution, known)
    );
    Ok(())
}
