//! Nonlinear right-hand sides `G` with their bound matrices `P`, and
//! generators for test problems `A x = G(x)`.

mod map;
mod problem;

pub use map::{
    evaluate_map, verify_p_bound, BoundedMap, MapSpec, Nonlinearity, PBoundReport, P_BOUND_SLACK,
};
pub use problem::{
    generate_grid_problem, generate_tridiagonal_problem, laplacian_2d, laplacian_2d_min_eigenvalue,
    tridiagonal, tridiagonal_min_eigenvalue, Provenance, WeaklyNonlinearProblem,
    KNOWN_SOLUTION_TOL,
};
