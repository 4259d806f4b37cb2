//! Outer and inner iterations, method presets and inner-step schedules.

mod iteration;
mod presets;
mod schedule;

pub use iteration::{
    inner_sweep, local_iterate, outer_step, residual, solve, IterationReport, SolverConfig,
    SolverState,
};
pub use presets::{preset_parameters, MethodFamily};
pub use schedule::InnerSchedule;
