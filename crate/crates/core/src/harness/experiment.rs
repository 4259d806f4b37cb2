use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mm::{read_matrix_market, write_text};
use super::oracle::picard_oracle;
use super::problem_io::load_problem;
use crate::error::{Error, Result};
use crate::nonlinear::{
    generate_grid_problem, verify_p_bound, BoundedMap, Nonlinearity, Provenance,
    WeaklyNonlinearProblem,
};
use crate::solver::{
    preset_parameters, solve, InnerSchedule, IterationReport, MethodFamily, SolverConfig,
};
use crate::sparse::max_abs_diff;
use crate::splitting::{
    build_multisplitting, validate_h_hypotheses, validate_monotone_hypotheses, HypothesisKind,
    HypothesisReport, LowerPartition, MultiSplitting, SplittingStrategy, TorParameters,
    ValidationConfig,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Samples and radius of the `P` check run alongside every experiment.
const P_CHECK_SAMPLES: usize = 200;
const P_CHECK_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSource {
    /// A saved problem directory.
    Directory { path: PathBuf },
    /// `A` from a Matrix Market file with a built-in map.
    Matrix {
        path: PathBuf,
        nonlinearity: Nonlinearity,
        coupling: f64,
        /// Constant added to every component of `G`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<f64>,
    },
    /// A generated grid problem.
    Grid {
        m: usize,
        nonlinearity: Nonlinearity,
        coupling: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<f64>,
    },
}

impl ProblemSource {
    pub fn grid(m: usize, nonlinearity: Nonlinearity, coupling: f64) -> Self {
        ProblemSource::Grid {
            m,
            nonlinearity,
            coupling,
            source: None,
        }
    }

    pub fn load(&self) -> Result<WeaklyNonlinearProblem> {
        let problem = match self {
            ProblemSource::Directory { path } => load_problem(path)?,
            ProblemSource::Matrix {
                path,
                nonlinearity,
                coupling,
                ..
            } => {
                let a = read_matrix_market(path)?;
                let n = a.require_square("A")?;
                let g = BoundedMap::componentwise(n, *nonlinearity, *coupling, None)?;
                WeaklyNonlinearProblem::new(
                    a,
                    g,
                    path.display().to_string(),
                    None,
                    Provenance::Loaded,
                )?
            }
            ProblemSource::Grid {
                m,
                nonlinearity,
                coupling,
                ..
            } => generate_grid_problem(*m, *nonlinearity, *coupling)?,
        };
        match self {
            ProblemSource::Matrix {
                source: Some(f), ..
            }
            | ProblemSource::Grid {
                source: Some(f), ..
            } => {
                let n = problem.dim();
                problem.with_source(vec![*f; n])
            }
            _ => Ok(problem),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ParameterChoice {
    Preset {
        family: MethodFamily,
        r: Option<f64>,
        w: Option<f64>,
    },
    Explicit {
        alpha: f64,
        beta: f64,
    },
    PerSplitting {
        alphas: Vec<f64>,
        betas: Vec<f64>,
    },
}

impl ParameterChoice {
    pub fn resolve(&self) -> Result<TorParameters> {
        match self {
            ParameterChoice::Preset { family, r, w } => preset_parameters(*family, *r, *w),
            ParameterChoice::Explicit { alpha, beta } => TorParameters::uniform(*alpha, *beta),
            ParameterChoice::PerSplitting { alphas, betas } => {
                TorParameters::per_splitting(alphas.clone(), betas.clone())
            }
        }
    }
}

/// Grid over `alpha + beta` and `alpha / (alpha + beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub sums: Vec<f64>,
    /// Whether `sums` are fractions of the parameter bound.
    pub relative: bool,
    pub ratios: Vec<f64>,
}

impl SweepGrid {
    /// `k` evenly spaced sums strictly inside `(0.1, 0.9)` times the bound.
    pub fn inside_bound(k: usize, ratios: Vec<f64>) -> Self {
        let sums = (1..=k)
            .map(|j| 0.1 + 0.8 * j as f64 / (k + 1) as f64)
            .collect();
        Self {
            sums,
            relative: true,
            ratios,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sums.is_empty() || self.ratios.is_empty() {
            return Err(Error::Parameter("sweep grids must be nonempty".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Parameter(format!("ratio {r} is outside [0, 1]")));
        }
        Ok(())
    }

    fn points(&self, bound: f64) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.sums.len() * self.ratios.len());
        for &s in &self.sums {
            let sum = if self.relative { s * bound } else { s };
            for &r in &self.ratios {
                let alpha = r * sum;
                out.push((alpha, (sum - alpha).max(0.0)));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSource,
    pub strategy: SplittingStrategy,
    pub splittings: usize,
    /// `all`, `alt-rows`, `col-halves` or `mask:<file>`.
    pub lower_partition: String,
    pub parameters: ParameterChoice,
    /// `"s"` or a comma-separated list with one count per splitting.
    pub schedule: String,
    pub tol: f64,
    pub max_outer: usize,
    pub workers: Option<usize>,
    pub sweep: Option<SweepGrid>,
    pub seed: u64,
    pub with_oracle: bool,
    /// Which hypotheses to check; `None` picks H-matrix when `A` is one.
    pub validation: Option<HypothesisKind>,
    pub output_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(problem: ProblemSource, parameters: ParameterChoice) -> Self {
        Self {
            problem,
            strategy: SplittingStrategy::BlockJacobi,
            splittings: 1,
            lower_partition: "all".into(),
            parameters,
            schedule: "1".into(),
            tol: 1e-10,
            max_outer: 10_000,
            workers: None,
            sweep: None,
            seed: 0,
            with_oracle: false,
            validation: None,
            output_path: None,
            csv_path: None,
        }
    }
}

/// Parses `all`, `alt-rows`, `col-halves` or `mask:<file>`.
///
/// A mask file lists strictly lower positions, one `row col` pair per line
/// (1-based); those entries go to `V*`. Lines starting with `#` or `%` are
/// comments.
pub fn parse_lower_partition(s: &str) -> Result<LowerPartition> {
    match s.strip_prefix("mask:") {
        Some(file) => read_mask(Path::new(file)),
        None => s.parse(),
    }
}

pub fn read_mask(path: &Path) -> Result<LowerPartition> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut positions = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let pair: Vec<usize> = t
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, k + 1, format!("bad mask line '{t}'")))?;
        match pair[..] {
            [i, j] if i > j && j >= 1 => positions.push((i - 1, j - 1)),
            _ => {
                return Err(Error::parse(
                    path,
                    k + 1,
                    "expected 'row col' with 1 <= col < row",
                ))
            }
        }
    }
    Ok(LowerPartition::mask(positions))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisSummary {
    pub theorem: HypothesisKind,
    pub all_passed: bool,
    pub failed_checks: Vec<String>,
    pub rho_value: f64,
    pub warnings: Vec<String>,
}

impl From<&HypothesisReport> for HypothesisSummary {
    fn from(r: &HypothesisReport) -> Self {
        Self {
            theorem: r.theorem,
            all_passed: r.all_passed(),
            failed_checks: r
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect(),
            rho_value: r.rho_value,
            warnings: r.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PBoundSummary {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    pub violations: usize,
    pub worst_margin: f64,
}

/// A relaxation parameter: one value, or one per splitting.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Single(f64),
    PerSplitting(Vec<f64>),
}

impl ParamValue {
    pub fn csv(&self) -> String {
        match self {
            ParamValue::Single(v) => format!("{v:?}"),
            ParamValue::PerSplitting(v) => v
                .iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub p: usize,
    pub alpha: ParamValue,
    pub beta: ParamValue,
    pub s: String,
    pub hypotheses: HypothesisSummary,
    pub parameter_bound: f64,
    pub p_bound_check: PBoundSummary,
    pub report: IterationReport,
    pub oracle_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunDocument {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub records: Vec<RunRecord>,
}

impl RunDocument {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.report.converged)
    }
}

/// Validates the hypotheses selected by `kind`, or the H-matrix ones when
/// `A` is an H-matrix and the monotone ones otherwise.
pub fn validate_for(
    problem: &WeaklyNonlinearProblem,
    ms: &MultiSplitting,
    kind: Option<HypothesisKind>,
    schedule: &InnerSchedule,
) -> Result<HypothesisReport> {
    let cfg = ValidationConfig::default();
    let h = || -> Result<HypothesisReport> {
        let mut r = validate_h_hypotheses(problem.a(), ms, problem.p(), &cfg)?;
        r.warnings.extend(schedule.warnings(ms.len()));
        Ok(r)
    };
    match kind {
        Some(HypothesisKind::HMatrix) => h(),
        Some(HypothesisKind::Monotone) => {
            validate_monotone_hypotheses(problem.a(), ms, problem.p(), &cfg)
        }
        None => {
            let r = h()?;
            let is_h = r.check("a_is_h_matrix").is_some_and(|c| c.passed);
            if is_h {
                Ok(r)
            } else {
                validate_monotone_hypotheses(problem.a(), ms, problem.p(), &cfg)
            }
        }
    }
}

fn param_values(t: &TorParameters, p: usize) -> (ParamValue, ParamValue) {
    match t {
        TorParameters::Uniform { alpha, beta } => {
            (ParamValue::Single(*alpha), ParamValue::Single(*beta))
        }
        TorParameters::PerSplitting { .. } => {
            let (a, b) = (0..p).map(|l| t.pair(l)).unzip();
            (ParamValue::PerSplitting(a), ParamValue::PerSplitting(b))
        }
    }
}

/// Runs one solve, or one per sweep point, and writes the requested
/// outputs.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunDocument> {
    let problem = spec.problem.load()?;
    let partition = parse_lower_partition(&spec.lower_partition)?;
    let ms = build_multisplitting(problem.a(), spec.splittings, spec.strategy, &partition)?;
    let p = ms.len();
    let schedule: InnerSchedule = spec.schedule.parse()?;
    schedule.validate(p)?;

    let hypotheses = validate_for(&problem, &ms, spec.validation, &schedule)?;
    let bound = hypotheses.parameter_upper_bound;
    let summary = HypothesisSummary::from(&hypotheses);

    let check = verify_p_bound(problem.g(), P_CHECK_SAMPLES, P_CHECK_RADIUS, spec.seed)?;
    let p_bound_check = PBoundSummary {
        samples: check.samples,
        radius: check.radius,
        seed: check.seed,
        violations: check.violations,
        worst_margin: check.worst_margin,
    };

    let oracle = if spec.with_oracle {
        Some(picard_oracle(&problem, 1e-13, 100_000)?)
    } else {
        None
    };

    let grid: Vec<TorParameters> = match &spec.sweep {
        Some(sweep) => sweep
            .points(bound)?
            .into_iter()
            .map(|(a, b)| TorParameters::uniform(a, b))
            .collect::<Result<_>>()?,
        None => vec![spec.parameters.resolve()?],
    };

    let mut records = Vec::with_capacity(grid.len());
    for params in grid {
        params.validate(p)?;
        let mut config = SolverConfig::new(params.clone()).with_schedule(schedule.clone());
        config.tol_residual = spec.tol;
        config.max_outer = spec.max_outer;
        config.worker_count = spec.workers;
        config.parameter_bound = bound.is_finite().then_some(bound);
        let report = solve(&problem, &ms, &config, vec![0.0; problem.dim()])?;
        let oracle_delta = oracle.as_ref().map(|x| max_abs_diff(&report.solution, x));
        let (alpha, beta) = param_values(&params, p);
        records.push(RunRecord {
            problem: problem.name().to_string(),
            n: problem.dim(),
            p,
            alpha,
            beta,
            s: schedule.to_string(),
            hypotheses: summary.clone(),
            parameter_bound: bound,
            p_bound_check: p_bound_check.clone(),
            report,
            oracle_delta,
        });
    }

    let doc = RunDocument {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        records,
    };
    if let Some(path) = &spec.output_path {
        write_json(path, &doc)?;
    }
    if let Some(path) = &spec.csv_path {
        write_csv(path, &doc.records)?;
    }
    Ok(doc)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_text(path, &(json + "\n"))
}

pub const CSV_COLUMNS: [&str; 9] = [
    "alpha",
    "beta",
    "s",
    "p",
    "outer_iterations",
    "final_residual",
    "converged",
    "wall_ms",
    "oracle_delta",
];

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.alpha.csv(),
            r.beta.csv(),
            r.s.clone(),
            r.p.to_string(),
            r.report.outer_iterations.to_string(),
            format!("{:?}", r.report.final_residual),
            r.report.converged.to_string(),
            format!("{:?}", r.report.wall_ms),
            r.oracle_delta.map(|d| format!("{d:?}")).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
