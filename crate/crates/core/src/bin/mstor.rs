use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mstor::harness::{
    picard_oracle, run_experiment, save_problem, validate_for, write_json, write_vector,
    ExperimentSpec, ParameterChoice, ProblemSource, RunDocument, SweepGrid,
};
use mstor::nonlinear::generate_grid_problem;
use mstor::solver::InnerSchedule;
use mstor::splitting::{build_multisplitting, HypothesisKind, SplittingStrategy};
use mstor::{Error, MethodFamily, Nonlinearity};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_VALIDATION_FAILED: u8 = 3;
const EXIT_INPUT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mstor",
    version,
    about = "Multi-splitting two-stage TOR solver for A x = G(x)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve over a grid of alpha + beta and alpha / (alpha + beta).
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Absolute alpha + beta values; default is 5 points inside (0.1, 0.9) x bound.
        #[arg(long, value_delimiter = ',')]
        sums: Option<Vec<f64>>,
        /// Values of alpha / (alpha + beta).
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
        ratios: Vec<f64>,
    },
    /// Write a generated grid problem to a directory.
    Generate {
        /// Grid size m (n = m^2).
        #[arg(long)]
        grid: usize,
        #[arg(long, default_value = "sin")]
        nonlinearity: Nonlinearity,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        /// Constant added to every component of G.
        #[arg(long)]
        source: Option<f64>,
        /// Output directory.
        #[arg(long)]
        problem: PathBuf,
    },
    /// Check the convergence hypotheses and print the parameter bound.
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        split: SplitArgs,
        /// h-matrix or monotone; default picks h-matrix when A is one.
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, default_value = "2")]
        inner: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Reference solution by Picard iteration with a direct solve.
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
        /// Write the solution vector here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Matrix Market file for A; G comes from --nonlinearity and --coupling.
    #[arg(long, conflicts_with_all = ["problem", "grid"])]
    matrix: Option<PathBuf>,
    /// Problem directory (A.mtx, problem.json).
    #[arg(long, conflicts_with = "grid")]
    problem: Option<PathBuf>,
    /// Generated grid problem of size m.
    #[arg(long)]
    grid: Option<usize>,
    /// sin, arctan, expdecay, const:<c> or linear:<k>.
    #[arg(long, default_value = "sin")]
    nonlinearity: Nonlinearity,
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    /// Constant added to every component of G (with --matrix or --grid).
    #[arg(long, conflicts_with = "problem")]
    source: Option<f64>,
}

impl ProblemArgs {
    fn source(&self) -> Result<ProblemSource, Error> {
        match (&self.matrix, &self.problem, self.grid) {
            (Some(path), None, None) => Ok(ProblemSource::Matrix {
                path: path.clone(),
                nonlinearity: self.nonlinearity,
                coupling: self.coupling,
                source: self.source,
            }),
            (None, Some(path), None) => Ok(ProblemSource::Directory { path: path.clone() }),
            (None, None, Some(m)) => Ok(ProblemSource::Grid {
                m,
                nonlinearity: self.nonlinearity,
                coupling: self.coupling,
                source: self.source,
            }),
            _ => Err(Error::Parameter(
                "give exactly one of --matrix, --problem or --grid".into(),
            )),
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Number of splittings p.
    #[arg(long, default_value_t = 1)]
    splittings: usize,
    /// block0, overlap:<k> or global.
    #[arg(long, default_value = "block0")]
    splitting: SplittingStrategy,
    /// all, alt-rows, col-halves or mask:<file>.
    #[arg(long, default_value = "all")]
    lower_partition: String,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value = "tor")]
    family: MethodFamily,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    /// Per-splitting alphas.
    #[arg(long, value_delimiter = ',', requires = "betas")]
    alphas: Option<Vec<f64>>,
    /// Per-splitting betas.
    #[arg(long, value_delimiter = ',', requires = "alphas")]
    betas: Option<Vec<f64>>,
    /// Inner sweeps: a count, or one count per splitting separated by commas.
    #[arg(long, default_value = "2")]
    inner: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_outer: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MethodArgs {
    fn parameters(&self) -> Result<ParameterChoice, Error> {
        if let (Some(alphas), Some(betas)) = (&self.alphas, &self.betas) {
            return Ok(ParameterChoice::PerSplitting {
                alphas: alphas.clone(),
                betas: betas.clone(),
            });
        }
        match (self.family, self.alpha, self.beta) {
            (MethodFamily::Tor, Some(alpha), Some(beta)) => {
                Ok(ParameterChoice::Explicit { alpha, beta })
            }
            (MethodFamily::Tor, _, _) => Err(Error::Parameter(
                "tor needs --alpha and --beta (or --alphas and --betas)".into(),
            )),
            (family, None, None) => Ok(ParameterChoice::Preset {
                family,
                r: self.r,
                w: self.w,
            }),
            (family, _, _) => Err(Error::Parameter(format!(
                "--alpha/--beta only apply to tor; {family} derives them from --r and --w"
            ))),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV summary path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also run the Picard oracle and record the distance to it.
    #[arg(long)]
    with_oracle: bool,
}

fn spec(
    problem: &ProblemArgs,
    split: &SplitArgs,
    method: &MethodArgs,
    output: &OutputArgs,
    sweep: Option<SweepGrid>,
) -> Result<ExperimentSpec, Error> {
    let parameters = match (&sweep, method.parameters()) {
        // a sweep overrides the parameters, so none are required
        (Some(_), Err(_)) => ParameterChoice::Explicit {
            alpha: 1.0,
            beta: 0.0,
        },
        (_, p) => p?,
    };
    let mut spec = ExperimentSpec::new(problem.source()?, parameters);
    spec.strategy = split.splitting;
    spec.splittings = split.splittings;
    spec.lower_partition = split.lower_partition.clone();
    spec.schedule = method.inner.clone();
    spec.tol = method.tol;
    spec.max_outer = method.max_outer;
    spec.workers = method.workers;
    spec.seed = method.seed;
    spec.sweep = sweep;
    spec.with_oracle = output.with_oracle;
    spec.output_path = output.report.clone();
    spec.csv_path = output.csv.clone();
    Ok(spec)
}

fn print_runs(doc: &RunDocument) {
    let first = &doc.records[0];
    println!(
        "problem: {} (n = {}, p = {})",
        first.problem, first.n, first.p
    );
    let h = &first.hypotheses;
    println!(
        "hypotheses ({:?}): {}, bound on alpha + beta: {:.6}",
        h.theorem,
        if h.all_passed {
            "all hold"
        } else {
            "not all hold"
        },
        first.parameter_bound
    );
    for f in &h.failed_checks {
        println!("  failed {f}");
    }
    for w in &h.warnings {
        println!("  warning: {w}");
    }
    for r in &doc.records {
        let delta = r
            .oracle_delta
            .map(|d| format!(" oracle_delta={d:.3e}"))
            .unwrap_or_default();
        println!(
            "alpha={} beta={} s={} converged={} iterations={} residual={:.3e}{delta}",
            r.alpha.csv(),
            r.beta.csv(),
            r.s,
            r.report.converged,
            r.report.outer_iterations,
            r.report.final_residual
        );
        if let Some(d) = &r.report.divergence {
            println!("  diverged: {d}");
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve {
            problem,
            split,
            method,
            output,
        } => {
            let doc = run_experiment(&spec(&problem, &split, &method, &output, None)?)?;
            print_runs(&doc);
            Ok(if doc.all_converged() {
                0
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Sweep {
            problem,
            split,
            method,
            output,
            sums,
            ratios,
        } => {
            let grid = match sums {
                Some(sums) => SweepGrid {
                    sums,
                    relative: false,
                    ratios,
                },
                None => SweepGrid::inside_bound(5, ratios),
            };
            let doc = run_experiment(&spec(&problem, &split, &method, &output, Some(grid))?)?;
            print_runs(&doc);
            Ok(if doc.all_converged() {
                0
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Generate {
            grid,
            nonlinearity,
            coupling,
            source,
            problem,
        } => {
            let mut p = generate_grid_problem(grid, nonlinearity, coupling)?;
            if let Some(f) = source {
                let n = p.dim();
                p = p.with_source(vec![f; n])?;
            }
            save_problem(&p, &problem)?;
            println!(
                "wrote {} (n = {}) to {}",
                p.name(),
                p.dim(),
                problem.display()
            );
            Ok(0)
        }
        Command::Validate {
            problem,
            split,
            theorem,
            inner,
            report,
        } => {
            let kind = match theorem.as_deref() {
                None => None,
                Some("h-matrix" | "h_matrix" | "h") => Some(HypothesisKind::HMatrix),
                Some("monotone") => Some(HypothesisKind::Monotone),
                Some(other) => {
                    return Err(Error::Parameter(format!(
                        "unknown theorem '{other}' (expected h-matrix or monotone)"
                    )))
                }
            };
            let p = problem.source()?.load()?;
            let partition = mstor::harness::parse_lower_partition(&split.lower_partition)?;
            let ms = build_multisplitting(p.a(), split.splittings, split.splitting, &partition)?;
            let schedule: InnerSchedule = inner.parse()?;
            let r = validate_for(&p, &ms, kind, &schedule)?;
            for c in &r.checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            for w in &r.warnings {
                println!("warning: {w}");
            }
            println!("rho = {:.12}", r.rho_value);
            println!("alpha + beta < {:.12}", r.parameter_upper_bound);
            if let Some(path) = report {
                write_json(&path, &r)?;
            }
            Ok(if r.all_passed() {
                0
            } else {
                EXIT_VALIDATION_FAILED
            })
        }
        Command::Oracle {
            problem,
            tol,
            max_iters,
            report,
        } => {
            let p = problem.source()?.load()?;
            let x = match picard_oracle(&p, tol, max_iters) {
                Ok(x) => x,
                Err(e @ Error::Oracle(_)) => {
                    eprintln!("{e}");
                    return Ok(EXIT_NOT_CONVERGED);
                }
                Err(e) => return Err(e),
            };
            let residual = mstor::solver::residual(&p, &x)?;
            println!("n = {}, residual = {residual:.3e}", p.dim());
            if let Some(known) = p.known_solution() {
                println!(
                    "distance to stored solution: {:.3e}",
                    mstor::sparse::max_abs_diff(&x, known)
                );
            }
            match report {
                Some(path) => write_vector(&path, &x)?,
                None if p.dim() <= 20 => println!("x = {x:?}"),
                None => {}
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT_ERROR);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
