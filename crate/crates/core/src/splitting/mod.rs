//! Multi-splittings of the system matrix, the two-stage decomposition of
//! each `B_l`, relaxation parameters and the convergence hypotheses.

mod hypotheses;
mod multi;
mod params;
mod two_stage;

pub use hypotheses::{
    jacobi_bound_matrix, tor_parameter_bound, validate_h_hypotheses, validate_monotone_hypotheses,
    HypothesisCheck, HypothesisKind, HypothesisReport, ValidationConfig,
};
pub use multi::{
    block_ranges, build_multisplitting, MultiSplitting, SplittingStrategy, WEIGHT_SUM_TOL,
};
pub use params::TorParameters;
pub use two_stage::{tor_matrices, two_stage_decompose, LowerPartition, TwoStageSplit};
