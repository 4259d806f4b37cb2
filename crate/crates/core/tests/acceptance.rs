//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mstor::harness::{load_problem, picard_oracle};
use mstor::nonlinear::{
    generate_grid_problem, verify_p_bound, BoundedMap, Nonlinearity, Provenance,
    WeaklyNonlinearProblem,
};
use mstor::solver::{
    outer_step, preset_parameters, solve, InnerSchedule, MethodFamily, SolverConfig, SolverState,
};
use mstor::sparse::{max_abs_diff, norm_inf, SparseMatrix};
use mstor::splitting::{
    build_multisplitting, tor_matrices, tor_parameter_bound, validate_h_hypotheses,
    validate_monotone_hypotheses, HypothesisKind, LowerPartition, MultiSplitting,
    SplittingStrategy, TorParameters, ValidationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: [&str; 4] = [
    "two_by_two",
    "tridiag3_arctan",
    "grid8_sine",
    "grid20_expdecay",
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self::new(false, detail)
    }
}

type Check = fn() -> Result<Outcome, mstor::Error>;

/// Random strictly diagonally dominant matrix with a sparse off-diagonal part.
fn random_h_matrix(rng: &mut ChaCha8Rng, n: usize) -> SparseMatrix {
    let density = (3.0 / n as f64).min(1.0);
    let mut t = Vec::new();
    let mut row_sums = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                let v = rng.random_range(-1.0..1.0);
                row_sums[i] += f64::abs(v);
                t.push((i, j, v));
            }
        }
    }
    for (i, s) in row_sums.iter().enumerate() {
        let d = (s + 0.5) * rng.random_range(1.5..3.0);
        let d = if rng.random_bool(0.1) { -d } else { d };
        t.push((i, i, d));
    }
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

fn random_partition(rng: &mut ChaCha8Rng, a: &SparseMatrix) -> LowerPartition {
    match rng.random_range(0..4) {
        0 => LowerPartition::AllToV,
        1 => LowerPartition::AlternateRows,
        2 => LowerPartition::ColumnHalves,
        _ => {
            let positions: Vec<_> = a
                .iter()
                .filter(|&(i, j, _)| j < i)
                .filter(|_| rng.random_bool(0.5))
                .map(|(i, j, _)| (i, j))
                .collect();
            LowerPartition::mask(positions)
        }
    }
}

fn random_nonlinearity(rng: &mut ChaCha8Rng) -> Nonlinearity {
    match rng.random_range(0..5) {
        0 => Nonlinearity::Sine,
        1 => Nonlinearity::Arctan,
        2 => Nonlinearity::ExpDecay,
        3 => Nonlinearity::Linear(rng.random_range(-1.0..1.0)),
        _ => Nonlinearity::Constant(rng.random_range(-2.0..2.0)),
    }
}

/// Desk problem with `|D|^-1 P <= 0.2 I`, so the Jacobi bound matrix stays
/// below one.
fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> WeaklyNonlinearProblem {
    let a = random_h_matrix(rng, n);
    let g = random_nonlinearity(rng);
    let d_min = a
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let coupling = 0.2 * d_min / g.lipschitz().max(1.0);
    let offset: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let map = BoundedMap::componentwise(n, g, coupling, Some(offset)).unwrap();
    WeaklyNonlinearProblem::new(
        a,
        map,
        format!("random n={n} {g}"),
        None,
        Provenance::Generated,
    )
    .unwrap()
}

const STRATEGIES: [SplittingStrategy; 3] = [
    SplittingStrategy::BlockJacobi,
    SplittingStrategy::BlockOverlap(1),
    SplittingStrategy::GlobalCopies,
];

fn fixed_point_consistency() -> Result<Outcome, mstor::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..20 {
        let n = rng.random_range(4..=100);
        let problem = random_problem(&mut rng, n);
        let x_star = picard_oracle(&problem, 1e-15, 100_000)
            .or_else(|_| picard_oracle(&problem, 1e-14, 100_000))?;
        let scale = 1.0 + norm_inf(&x_star);
        let bound = tor_parameter_bound(
            problem.a(),
            problem.p(),
            HypothesisKind::HMatrix,
            &ValidationConfig::default(),
        )?;
        let partition = random_partition(&mut rng, problem.a());
        let pairs: Vec<(f64, f64)> = (0..5)
            .map(|_| {
                let sum = rng.random_range(0.05..0.95) * bound;
                let alpha = rng.random_range(0.0..=1.0) * sum;
                (alpha, sum - alpha)
            })
            .collect();
        for strategy in STRATEGIES {
            for p in [1, 2, 4] {
                let ms = build_multisplitting(problem.a(), p, strategy, &partition)?;
                for s in [1, 2, 5] {
                    for &(alpha, beta) in &pairs {
                        let config = SolverConfig::new(TorParameters::uniform(alpha, beta)?)
                            .with_schedule(InnerSchedule::Constant(s));
                        let mut state = SolverState::new(&problem, &ms, x_star.clone())?;
                        let next = outer_step(&mut state, &config)?;
                        let e = max_abs_diff(&next, &x_star) / scale;
                        worst = worst.max(e);
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(Outcome::new(
        worst <= 1e-12,
        format!("{cases} steps, worst |step(x*) - x*| / (1 + |x*|) = {worst:.2e} (tol 1e-12)"),
    ))
}

fn grid_convergence() -> Result<Outcome, mstor::Error> {
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut max_iters = 0;
    for m in [4, 8, 16] {
        let n = m * m;
        let problem =
            generate_grid_problem(m, Nonlinearity::Sine, 1.0)?.with_source(vec![1.0; n])?;
        let ms = build_multisplitting(
            problem.a(),
            2,
            SplittingStrategy::BlockJacobi,
            &LowerPartition::AlternateRows,
        )?;
        let report =
            validate_h_hypotheses(problem.a(), &ms, problem.p(), &ValidationConfig::default())?;
        if !report.all_passed() {
            failures.push(format!("m={m}: hypotheses fail"));
            continue;
        }
        let bound = report.parameter_upper_bound;
        for j in 1..=5 {
            let sum = (0.1 + 0.8 * j as f64 / 6.0) * bound;
            for ratio in [0.0, 0.5, 1.0] {
                let alpha = ratio * sum;
                let mut config = SolverConfig::new(TorParameters::uniform(alpha, sum - alpha)?)
                    .with_schedule(InnerSchedule::Constant(2));
                config.tol_residual = 1e-10;
                config.max_outer = 10_000;
                config.record_history = false;
                config.parameter_bound = Some(bound);
                let r = solve(&problem, &ms, &config, vec![0.0; n])?;
                runs += 1;
                max_iters = max_iters.max(r.outer_iterations);
                if !r.converged || r.final_residual > 1e-10 {
                    failures.push(format!("m={m} alpha={alpha:.4} beta={:.4}", sum - alpha));
                }
            }
        }
    }
    Ok(Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{runs} solves reached 1e-10, at most {max_iters} outer iterations")
        } else {
            format!("not converged: {}", failures.join(", "))
        },
    ))
}

fn monotone_convergence() -> Result<Outcome, mstor::Error> {
    let problem = load_problem(&fixture("tridiag3_arctan"))?;
    let mut failures = Vec::new();
    let mut runs = 0;
    for p in [1, 2, 3] {
        let ms = build_multisplitting(
            problem.a(),
            p,
            SplittingStrategy::BlockJacobi,
            &LowerPartition::AllToV,
        )?;
        let report = validate_monotone_hypotheses(
            problem.a(),
            &ms,
            problem.p(),
            &ValidationConfig::default(),
        )?;
        if !report.all_passed() {
            failures.push(format!("p={p}: hypotheses fail"));
            continue;
        }
        for sum in [0.5, 1.0, 1.5, 1.9] {
            for ratio in [0.0, 0.5, 1.0] {
                let alpha = ratio * sum;
                let config = SolverConfig::new(TorParameters::uniform(alpha, sum - alpha)?)
                    .with_schedule(InnerSchedule::Constant(2));
                let r = solve(&problem, &ms, &config, vec![0.0; 3])?;
                runs += 1;
                if !r.converged || r.final_residual > 1e-10 {
                    failures.push(format!("p={p} alpha={alpha} beta={}", sum - alpha));
                }
            }
        }
    }
    Ok(Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{runs} solves reached 1e-10")
        } else {
            format!("not converged: {}", failures.join(", "))
        },
    ))
}

fn tridiagonal(n: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        n,
        n,
        (0..n).flat_map(|i| {
            let mut t = vec![(i, i, 2.0)];
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
            t
        }),
    )
    .unwrap()
}

fn bound_formulas() -> Result<Outcome, mstor::Error> {
    let cfg = ValidationConfig::default();
    let a = tridiagonal(2);
    let small = tor_parameter_bound(
        &a,
        &SparseMatrix::zeros(2, 2),
        HypothesisKind::HMatrix,
        &cfg,
    )?;
    let e1 = (small - 8.0 / 3.0).abs();
    let p = SparseMatrix::identity(10).scale(0.1);
    let big = tor_parameter_bound(&tridiagonal(10), &p, HypothesisKind::HMatrix, &cfg)?;
    // |D|^-1 |B| = tridiag(1/2, 0, 1/2) has eigenvalues cos(k pi / 11)
    let expected = 4.0 / (1.0 + (PI / 11.0).cos() + 0.05);
    let e2 = (big - expected).abs();
    Ok(Outcome::new(
        e1 <= 1e-10 && e2 <= 1e-8,
        format!(
            "2x2: {small:.12} (err {e1:.1e}); n=10: {big:.12} vs {expected:.12} (err {e2:.1e})"
        ),
    ))
}

/// Textbook Gauss-Seidel sweep for `A x = K x + f`, dense and in place.
fn textbook_gauss_seidel(a: &[Vec<f64>], k: &[Vec<f64>], f: &[f64], x: &mut [f64]) {
    let g: Vec<f64> = (0..x.len())
        .map(|i| f[i] + (0..x.len()).map(|j| k[i][j] * x[j]).sum::<f64>())
        .collect();
    for i in 0..x.len() {
        let mut s = g[i];
        for j in 0..x.len() {
            if j != i {
                s -= a[i][j] * x[j];
            }
        }
        x[i] = s / a[i][i];
    }
}

fn textbook_jacobi(a: &[Vec<f64>], k: &[Vec<f64>], f: &[f64], x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut s = f[i];
            for j in 0..x.len() {
                s += k[i][j] * x[j];
                if j != i {
                    s -= a[i][j] * x[j];
                }
            }
            s / a[i][i]
        })
        .collect()
}

fn preset_reduction() -> Result<Outcome, mstor::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 10;
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let a = random_h_matrix(&mut rng, n);
        let k: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            rng.random_range(-0.1..0.1)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = BoundedMap::affine(SparseMatrix::from_dense(&k)?, f.clone())?;
        let problem = WeaklyNonlinearProblem::new(
            a.clone(),
            g,
            format!("linear {trial}"),
            None,
            Provenance::Generated,
        )?;
        let ms = build_multisplitting(
            &a,
            1,
            SplittingStrategy::BlockJacobi,
            &LowerPartition::AllToV,
        )?;
        let ad = a.to_dense();
        for family in [MethodFamily::Gs, MethodFamily::Jacobi] {
            let config = SolverConfig::new(preset_parameters(family, None, None)?);
            let mut state = SolverState::new(&problem, &ms, x0.clone())?;
            let mut reference = x0.clone();
            for _ in 0..50 {
                let x = outer_step(&mut state, &config)?;
                match family {
                    MethodFamily::Gs => textbook_gauss_seidel(&ad, &k, &f, &mut reference),
                    _ => reference = textbook_jacobi(&ad, &k, &f, &reference),
                }
                worst = worst.max(max_abs_diff(&x, &reference));
            }
        }
    }
    Ok(Outcome::new(
        worst <= 1e-14,
        format!("5 systems, 50 steps each, worst per-step deviation {worst:.2e} (tol 1e-14)"),
    ))
}

fn iterates(
    problem: &WeaklyNonlinearProblem,
    ms: &MultiSplitting,
    config: &SolverConfig,
    steps: usize,
) -> Result<Vec<Vec<f64>>, mstor::Error> {
    let mut state = SolverState::new(problem, ms, vec![0.0; problem.dim()])?;
    (0..steps).map(|_| outer_step(&mut state, config)).collect()
}

fn per_splitting_equivalence() -> Result<Outcome, mstor::Error> {
    let mut failures = Vec::new();
    for name in FIXTURES {
        let problem = load_problem(&fixture(name))?;
        let p = 2;
        let ms = build_multisplitting(
            problem.a(),
            p,
            SplittingStrategy::BlockOverlap(1),
            &LowerPartition::AlternateRows,
        )?;
        let schedule = InnerSchedule::Constant(2);
        let uniform =
            SolverConfig::new(TorParameters::uniform(0.7, 0.5)?).with_schedule(schedule.clone());
        let per = SolverConfig::new(TorParameters::per_splitting(vec![0.7; p], vec![0.5; p])?)
            .with_schedule(schedule);
        let xs = iterates(&problem, &ms, &uniform, 40)?;
        let ys = iterates(&problem, &ms, &per, 40)?;
        let same = xs
            .iter()
            .zip(&ys)
            .all(|(x, y)| x.iter().zip(y).all(|(a, b)| a.to_bits() == b.to_bits()));
        if !same {
            failures.push(name);
        }
    }
    Ok(Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} fixtures, 40 steps, bit-identical", FIXTURES.len())
        } else {
            format!("differs on {}", failures.join(", "))
        },
    ))
}

fn worker_determinism() -> Result<Outcome, mstor::Error> {
    let problem = load_problem(&fixture("grid8_sine"))?;
    let ms = build_multisplitting(
        problem.a(),
        4,
        SplittingStrategy::BlockOverlap(2),
        &LowerPartition::AllToV,
    )?;
    let mut histories = Vec::new();
    for workers in [1, 2, 4] {
        let config = SolverConfig::new(TorParameters::uniform(0.9, 0.6)?)
            .with_schedule(InnerSchedule::Constant(3))
            .with_workers(workers);
        let r = solve(&problem, &ms, &config, vec![0.0; problem.dim()])?;
        let bits: Vec<u64> = r.residual_history.iter().map(|v| v.to_bits()).collect();
        histories.push((
            bits,
            r.solution.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        ));
    }
    let same = histories.windows(2).all(|w| w[0] == w[1]);
    Ok(Outcome::new(
        same && !histories[0].0.is_empty(),
        format!(
            "{} residuals per run, identical = {same}",
            histories[0].0.len()
        ),
    ))
}

fn oracle_agreement() -> Result<Outcome, mstor::Error> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for name in FIXTURES {
        let problem = load_problem(&fixture(name))?;
        let ms = build_multisplitting(
            problem.a(),
            2,
            SplittingStrategy::BlockJacobi,
            &LowerPartition::AllToV,
        )?;
        let config = SolverConfig::new(TorParameters::uniform(0.8, 0.6)?)
            .with_schedule(InnerSchedule::Constant(2));
        let r = solve(&problem, &ms, &config, vec![0.0; problem.dim()])?;
        let oracle = picard_oracle(&problem, 1e-13, 100_000)?;
        if !r.converged {
            return Ok(Outcome::fail(format!("{name}: solver did not converge")));
        }
        let d = max_abs_diff(&r.solution, &oracle);
        worst = worst.max(d);
        parts.push(format!("{name} {d:.1e}"));
    }
    Ok(Outcome::new(
        worst <= 1e-6,
        format!("{} (tol 1e-6)", parts.join(", ")),
    ))
}

fn splitting_identities() -> Result<Outcome, mstor::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    let mut worst_weight = 0.0f64;
    let mut tor_checks = 0;
    let mut smallest_bad_sum = f64::INFINITY;
    let mut largest_bad_sum = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(2..=40);
        let a = random_h_matrix(&mut rng, n);
        let strategy = match rng.random_range(0..3) {
            0 => SplittingStrategy::BlockJacobi,
            1 => SplittingStrategy::BlockOverlap(rng.random_range(1..=3)),
            _ => SplittingStrategy::GlobalCopies,
        };
        let p = rng.random_range(1..=n.min(6));
        let partition = random_partition(&mut rng, &a);
        let ms = build_multisplitting(&a, p, strategy, &partition)?;
        for w in ms.weight_sums() {
            worst_weight = worst_weight.max((w - 1.0).abs());
        }
        for l in 0..p {
            let split = ms.split(l);
            if !ms.b(l).sub(ms.c(l))?.equals_entrywise(&a) {
                bad.push(format!("case {case} l={l}: B - C != A"));
            }
            if !split.reconstruct().equals_entrywise(split.b()) {
                bad.push(format!("case {case} l={l}: D - V - V* - U != B"));
            }
            let sum = rng.random_range(0.05..2.0);
            let alpha = rng.random_range(0.0..=1.0) * sum;
            let (m, nm) = tor_matrices(split, alpha, sum - alpha)?;
            tor_checks += 1;
            if !m.sub(&nm)?.equals_entrywise(split.b()) {
                smallest_bad_sum = smallest_bad_sum.min(sum);
                largest_bad_sum = largest_bad_sum.max(sum);
                bad.push(format!(
                    "case {case} l={l}: M - N != B (alpha={alpha}, beta={})",
                    sum - alpha
                ));
            }
        }
    }
    let passed = bad.is_empty() && worst_weight <= 1e-15;
    let detail = if passed {
        format!("100 constructions exact, worst |sum E_l - 1| = {worst_weight:.1e}")
    } else {
        let shown: Vec<_> = bad.iter().take(3).cloned().collect();
        format!(
            "{} violations in {tor_checks} pairs (e.g. {}), failing alpha + beta in [{smallest_bad_sum:.3}, {largest_bad_sum:.3}], worst |sum E_l - 1| = {worst_weight:.1e}",
            bad.len(),
            shown.join("; ")
        )
    };
    Ok(Outcome::new(passed, detail))
}

fn p_bound_verification() -> Result<Outcome, mstor::Error> {
    let n = 6;
    let offset: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
    let mut failures = Vec::new();
    for g in [
        Nonlinearity::Sine,
        Nonlinearity::Arctan,
        Nonlinearity::ExpDecay,
        Nonlinearity::Constant(3.0),
        Nonlinearity::Linear(-0.75),
    ] {
        for (coupling, offset) in [(1.0, None), (0.3, Some(offset.clone()))] {
            let map = BoundedMap::componentwise(n, g, coupling, offset)?;
            for seed in [1, 2, 3] {
                let r = verify_p_bound(&map, 1000, 100.0, seed)?;
                if !r.passed() {
                    failures.push(format!("{g} seed {seed}: {} violations", r.violations));
                }
            }
        }
    }
    Ok(Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            "5 nonlinearities x 2 maps x 3 seeds, zero violations".to_string()
        } else {
            failures.join(", ")
        },
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 10] = [
        (
            "fixed-point consistency",
            Duration::from_secs(10),
            fixed_point_consistency,
        ),
        (
            "H-matrix convergence on grids",
            Duration::from_secs(60),
            grid_convergence,
        ),
        (
            "monotone convergence on tridiagonal",
            Duration::from_secs(10),
            monotone_convergence,
        ),
        ("parameter bound formulas", Duration::MAX, bound_formulas),
        (
            "Gauss-Seidel and Jacobi reduction",
            Duration::MAX,
            preset_reduction,
        ),
        (
            "per-splitting parameters match uniform",
            Duration::MAX,
            per_splitting_equivalence,
        ),
        (
            "determinism across worker counts",
            Duration::MAX,
            worker_determinism,
        ),
        (
            "oracle agreement on fixtures",
            Duration::MAX,
            oracle_agreement,
        ),
        ("splitting identities", Duration::MAX, splitting_identities),
        ("P-bound verification", Duration::MAX, p_bound_verification),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::fail(format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed < *budget;
        let passed = outcome.passed && in_time;
        if !passed {
            failed += 1;
        }
        let timing = if *budget == Duration::MAX {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!(
            "{} criterion {:>2} {name}: {} [{timing}]",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
