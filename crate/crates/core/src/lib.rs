//! Synchronous multi-splitting two-stage TOR iteration for weakly nonlinear
//! systems `A x = G(x)`.
//!
//! The system matrix is split `p` ways, `A = B_l - C_l`, and each `B_l` is
//! split again into diagonal, two strictly lower pieces and an upper part.
//! Every outer step runs a few inner TOR sweeps per splitting, in parallel,
//! and combines the results with diagonal weights `E_l`.
//!
//! ```
//! use mstor::nonlinear::{generate_grid_problem, Nonlinearity};
//! use mstor::solver::{solve, SolverConfig};
//! use mstor::splitting::{build_multisplitting, LowerPartition, SplittingStrategy, TorParameters};
//!
//! let problem = generate_grid_problem(6, Nonlinearity::Sine, 1.0)?.with_source(vec![1.0; 36])?;
//! let ms = build_multisplitting(problem.a(), 2, SplittingStrategy::BlockJacobi, &LowerPartition::AllToV)?;
//! let config = SolverConfig::new(TorParameters::uniform(1.2, 0.4)?);
//! let report = solve(&problem, &ms, &config, vec![0.0; problem.dim()])?;
//! assert!(report.converged);
//! # Ok::<(), mstor::Error>(())
//! ```

pub mod error;
pub mod harness;
pub mod nonlinear;
pub mod solver;
pub mod sparse;
pub mod splitting;

pub use error::{Error, Result};
pub use nonlinear::{BoundedMap, Nonlinearity, WeaklyNonlinearProblem};
pub use solver::{solve, IterationReport, MethodFamily, SolverConfig};
pub use sparse::SparseMatrix;
pub use splitting::{MultiSplitting, SplittingStrategy, TorParameters};
