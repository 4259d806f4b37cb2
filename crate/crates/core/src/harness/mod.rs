//! File formats, reference solutions and experiment runs.

mod experiment;
mod mm;
mod oracle;
mod problem_io;

pub use experiment::{
    parse_lower_partition, read_mask, run_experiment, validate_for, write_csv, write_json,
    ExperimentSpec, HypothesisSummary, PBoundSummary, ParamValue, ParameterChoice, ProblemSource,
    RunDocument, RunRecord, SweepGrid, CSV_COLUMNS, REPORT_SCHEMA_VERSION,
};
pub use mm::{
    parse_matrix_market, read_matrix_market, read_vector, write_matrix_market, write_vector,
};
pub use oracle::{picard_contraction, picard_oracle};
pub use problem_io::{
    load_external_problem, load_problem, read_problem_file, save_problem, MapFile, ProblemFile,
    SCHEMA_VERSION,
};
