//! Sweeps alpha + beta and alpha / (alpha + beta) inside the admissible range
//! and writes the runs as CSV.

use mstor::harness::{
    run_experiment, write_csv, ExperimentSpec, ParameterChoice, ProblemSource, SweepGrid,
};
use mstor::{Nonlinearity, SplittingStrategy};

fn main() -> mstor::Result<()> {
    let problem = ProblemSource::Grid {
        m: 10,
        nonlinearity: Nonlinearity::Arctan,
        coupling: 2.0,
        source: Some(1.0),
    };
    let mut spec = ExperimentSpec::new(
        problem,
        ParameterChoice::Explicit {
            alpha: 1.0,
            beta: 0.0,
        },
    );
    spec.strategy = SplittingStrategy::BlockJacobi;
    spec.splittings = 3;
    spec.schedule = "2".into();
    spec.sweep = Some(SweepGrid::inside_bound(6, vec![0.0, 0.25, 0.5, 0.75, 1.0]));

    let doc = run_experiment(&spec)?;
    println!(
        "bound on alpha + beta: {:.6}",
        doc.records[0].parameter_bound
    );
    println!("{:>10} {:>10} {:>8}", "alpha", "beta", "steps");
    for r in &doc.records {
        println!(
            "{:>10} {:>10} {:>8}",
            short(&r.alpha.csv()),
            short(&r.beta.csv()),
            r.report.outer_iterations
        );
    }

    let path = std::env::temp_dir().join("mstor_sweep.csv");
    write_csv(&path, &doc.records)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn short(v: &str) -> String {
    v.parse::<f64>()
        .map(|x| format!("{x:.4}"))
        .unwrap_or_else(|_| v.to_string())
}
