//! The synchronous multi-splitting two-stage TOR iteration.
//!
//! One outer step from `x^i`:
//!
//! ```text
//! g       = G(x^i)
//! rhs_l   = C_l x^i + g                                  l = 1..p, in parallel
//! z_0     = x^i
//! z_{k+1} = M_l^{-1} (N_l z_k + rhs_l)                   k < s_l(i)
//! x^{i+1} = sum_l E_l z_{s_l(i)}                         fixed order l = 1..p
//! ```
//!
//! with `M_l = (2 D_l - alpha_l V_l - beta_l V_l*) / (alpha_l + beta_l)` and
//! `N_l = M_l - B_l`.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinear::WeaklyNonlinearProblem;
use crate::sparse::{lower_triangular_solve_into, max_abs_diff, norm_inf, SparseMatrix};
use crate::splitting::{tor_matrices, MultiSplitting, TorParameters};

use super::schedule::InnerSchedule;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub params: TorParameters,
    pub schedule: InnerSchedule,
    /// Stop once [`residual`] is at most this.
    pub tol_residual: f64,
    pub max_outer: usize,
    /// Threads for the local iterations; `None` uses one per splitting.
    pub worker_count: Option<usize>,
    pub record_history: bool,
    /// Upper bound on `alpha + beta` from a prior hypothesis check.
    pub parameter_bound: Option<f64>,
}

impl SolverConfig {
    pub fn new(params: TorParameters) -> Self {
        Self {
            params,
            schedule: InnerSchedule::default(),
            tol_residual: 1e-10,
            max_outer: 10_000,
            worker_count: None,
            record_history: true,
            parameter_bound: None,
        }
    }

    pub fn with_schedule(mut self, schedule: InnerSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.worker_count = Some(workers);
        self
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        self.params.validate(p)?;
        self.schedule.validate(p)?;
        if !(self.tol_residual > 0.0) {
            return Err(Error::Parameter(format!(
                "residual tolerance must be positive, got {}",
                self.tol_residual
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::Parameter("max_outer must be at least 1".into()));
        }
        if self.worker_count == Some(0) {
            return Err(Error::Parameter("worker count must be at least 1".into()));
        }
        Ok(())
    }

    fn workers(&self, p: usize) -> usize {
        self.worker_count.unwrap_or(p).max(1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    pub converged: bool,
    pub outer_iterations: usize,
    pub final_residual: f64,
    /// Residuals of `x^0, x^1, ...`; empty unless recorded.
    pub residual_history: Vec<f64>,
    /// `||x^i - x*||_inf` when the problem carries its solution.
    pub error_history: Option<Vec<f64>>,
    pub wall_ms: f64,
    pub parameter_bound_used: Option<f64>,
    /// Set when the iteration stopped on a non-finite value.
    pub divergence: Option<String>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub solution: Vec<f64>,
}

#[derive(Debug)]
struct TorPair {
    alpha: f64,
    beta: f64,
    m: SparseMatrix,
    n: SparseMatrix,
}

/// Current iterate plus the per-splitting `(M_l, N_l)` cache.
#[derive(Debug)]
pub struct SolverState<'a> {
    problem: &'a WeaklyNonlinearProblem,
    ms: &'a MultiSplitting,
    cache: Vec<Option<TorPair>>,
    x: Vec<f64>,
    g: Option<Vec<f64>>,
    iteration: usize,
    pool: Option<(usize, rayon::ThreadPool)>,
}

impl<'a> SolverState<'a> {
    pub fn new(
        problem: &'a WeaklyNonlinearProblem,
        ms: &'a MultiSplitting,
        x0: Vec<f64>,
    ) -> Result<Self> {
        let n = problem.dim();
        if ms.dim() != n || x0.len() != n {
            return Err(Error::Dimension(format!(
                "problem has n = {n}, multi-splitting {}, start vector {}",
                ms.dim(),
                x0.len()
            )));
        }
        if let Some(index) = x0.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "start vector is not finite at index {index}"
            )));
        }
        Ok(Self {
            problem,
            ms,
            cache: (0..ms.len()).map(|_| None).collect(),
            x: x0,
            g: None,
            iteration: 0,
            pool: None,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn multisplitting(&self) -> &MultiSplitting {
        self.ms
    }

    /// Cached `(M_l, N_l)`, if [`prepare`](Self::prepare) has run.
    pub fn tor_pair(&self, l: usize) -> Option<(&SparseMatrix, &SparseMatrix)> {
        self.cache
            .get(l)
            .and_then(Option::as_ref)
            .map(|c| (&c.m, &c.n))
    }

    /// Builds `(M_l, N_l)` for every `l` whose parameters changed.
    pub fn prepare(&mut self, params: &TorParameters) -> Result<()> {
        params.validate(self.ms.len())?;
        for (l, slot) in self.cache.iter_mut().enumerate() {
            let (alpha, beta) = params.pair(l);
            let fresh = matches!(slot, Some(c) if c.alpha.to_bits() == alpha.to_bits()
                && c.beta.to_bits() == beta.to_bits());
            if !fresh {
                let (m, n) = tor_matrices(self.ms.split(l), alpha, beta)?;
                *slot = Some(TorPair { alpha, beta, m, n });
            }
        }
        Ok(())
    }

    fn g(&mut self) -> Result<&[f64]> {
        if self.g.is_none() {
            self.g = Some(self.problem.g().evaluate(&self.x)?);
        }
        Ok(self.g.as_deref().expect("just evaluated"))
    }

    /// [`residual`] of the current iterate, reusing `G(x^i)`.
    pub fn residual(&mut self) -> Result<f64> {
        let a = self.problem.a();
        let x = self.x.clone();
        let g = self.g()?;
        Ok(relative_residual(a, &x, g))
    }

    fn pool(&mut self, workers: usize) -> Result<&rayon::ThreadPool> {
        if !matches!(&self.pool, Some((w, _)) if *w == workers) {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot start {workers} workers: {e}")))?;
            self.pool = Some((workers, pool));
        }
        Ok(&self.pool.as_ref().expect("just built").1)
    }
}

fn sweep_into(
    m: &SparseMatrix,
    n: &SparseMatrix,
    z: &[f64],
    c: &[f64],
    out: &mut [f64],
) -> Result<()> {
    out.copy_from_slice(c);
    n.mul_vec_add(z, out);
    lower_triangular_solve_into(m, out)
}

/// `M^{-1}(N z + c)` by one product and one forward substitution.
pub fn inner_sweep(m: &SparseMatrix, n: &SparseMatrix, z: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let dim = m.require_square("M")?;
    if n.n_rows() != dim || n.n_cols() != dim || z.len() != dim || c.len() != dim {
        return Err(Error::Dimension(format!(
            "M is {dim}x{dim}, N is {}x{}, z has {} and c has {} entries",
            n.n_rows(),
            n.n_cols(),
            z.len(),
            c.len()
        )));
    }
    let mut out = vec![0.0; dim];
    sweep_into(m, n, z, c, &mut out)?;
    Ok(out)
}

/// `s` inner sweeps for splitting `l` from `x_i` with constant `rhs`.
pub fn local_iterate(
    l: usize,
    x_i: &[f64],
    rhs: &[f64],
    s: usize,
    state: &SolverState<'_>,
) -> Result<Vec<f64>> {
    let (m, n) = state.tor_pair(l).ok_or_else(|| {
        Error::Parameter(format!(
            "no relaxation pair prepared for splitting {}",
            l + 1
        ))
    })?;
    if s == 0 {
        return Err(Error::Parameter(
            "inner step count must be at least 1".into(),
        ));
    }
    let dim = state.ms.dim();
    if x_i.len() != dim || rhs.len() != dim {
        return Err(Error::Dimension(format!(
            "expected vectors of length {dim}, got {} and {}",
            x_i.len(),
            rhs.len()
        )));
    }
    let mut z = x_i.to_vec();
    let mut next = vec![0.0; dim];
    for _ in 0..s {
        sweep_into(m, n, &z, rhs, &mut next)?;
        std::mem::swap(&mut z, &mut next);
    }
    Ok(z)
}

/// One outer step; advances `state` and returns `x^{i+1}`.
pub fn outer_step(state: &mut SolverState<'_>, config: &SolverConfig) -> Result<Vec<f64>> {
    let p = state.ms.len();
    config.validate(p)?;
    state.prepare(&config.params)?;
    let i = state.iteration;
    let g = state.g()?.to_vec();
    let steps = (0..p)
        .map(|l| config.schedule.steps(l, i))
        .collect::<Result<Vec<_>>>()?;

    let workers = config.workers(p);
    let parallel = workers > 1 && p > 1;
    if parallel {
        state.pool(workers)?;
    }

    let st: &SolverState<'_> = state;
    let local = |l: usize| -> Result<Vec<f64>> {
        let mut rhs = g.clone();
        st.ms.c(l).mul_vec_add(&st.x, &mut rhs);
        local_iterate(l, &st.x, &rhs, steps[l], st)
    };
    let ys: Vec<Vec<f64>> = match &st.pool {
        Some((_, pool)) if parallel => {
            pool.install(|| (0..p).into_par_iter().map(local).collect::<Result<_>>())?
        }
        _ => (0..p).map(local).collect::<Result<_>>()?,
    };

    let n = state.ms.dim();
    let mut next = vec![0.0; n];
    for (l, y) in ys.iter().enumerate() {
        for ((xi, &w), &yi) in next.iter_mut().zip(state.ms.weights(l)).zip(y) {
            if w != 0.0 {
                *xi += w * yi;
            }
        }
    }
    if let Some(index) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            iteration: i,
            index,
        });
    }
    state.x.copy_from_slice(&next);
    state.g = None;
    state.iteration += 1;
    Ok(next)
}

fn relative_residual(a: &SparseMatrix, x: &[f64], g: &[f64]) -> f64 {
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    a.mul_vec_add(x, &mut r);
    norm_inf(&r) / (1.0 + norm_inf(g))
}

/// `||A x - G(x)||_inf / (1 + ||G(x)||_inf)`.
pub fn residual(problem: &WeaklyNonlinearProblem, x: &[f64]) -> Result<f64> {
    if x.len() != problem.dim() {
        return Err(Error::Dimension(format!(
            "x has length {}, expected {}",
            x.len(),
            problem.dim()
        )));
    }
    let g = problem.g().evaluate(x)?;
    Ok(relative_residual(problem.a(), x, &g))
}

/// Runs outer steps from `x0` until the residual drops to
/// `config.tol_residual` or `config.max_outer` steps are taken.
///
/// Non-convergence and non-finite iterates are reported, not raised.
pub fn solve(
    problem: &WeaklyNonlinearProblem,
    ms: &MultiSplitting,
    config: &SolverConfig,
    x0: Vec<f64>,
) -> Result<IterationReport> {
    let start = Instant::now();
    let p = ms.len();
    config.validate(p)?;
    let mut warnings = config.schedule.warnings(p);
    if let Some(bound) = config.parameter_bound {
        let sum = config.params.max_sum();
        if sum >= bound {
            warnings.push(format!(
                "alpha + beta = {sum} is outside the guaranteed range (0, {bound})"
            ));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut state = SolverState::new(problem, ms, x0)?;
    state.prepare(&config.params)?;
    let known = problem.known_solution();
    let mut residuals = Vec::new();
    let mut errors = Vec::new();
    let mut r = state.residual()?;
    let mut record = |state: &SolverState<'_>, r: f64| {
        if config.record_history {
            residuals.push(r);
            if let Some(xs) = known {
                errors.push(max_abs_diff(state.x(), xs));
            }
        }
    };
    record(&state, r);

    let mut divergence = None;
    while r > config.tol_residual && state.iteration() < config.max_outer {
        let step = outer_step(&mut state, config).and_then(|_| state.residual());
        match step {
            Ok(v) if v.is_finite() => r = v,
            Ok(_) => {
                divergence = Some(format!(
                    "residual overflowed after outer step {}",
                    state.iteration()
                ));
                break;
            }
            Err(e @ (Error::Divergence { .. } | Error::Evaluation { .. })) => {
                divergence = Some(format!("{e} (outer step {})", state.iteration()));
                break;
            }
            Err(e) => return Err(e),
        }
        record(&state, r);
    }
    if let Some(d) = &divergence {
        log::warn!("{d}");
    }

    Ok(IterationReport {
        converged: divergence.is_none() && r <= config.tol_residual,
        outer_iterations: state.iteration(),
        final_residual: r,
        residual_history: residuals,
        error_history: (config.record_history && known.is_some()).then_some(errors),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        parameter_bound_used: config.parameter_bound,
        divergence,
        warnings,
        solution: state.x,
    })
}
