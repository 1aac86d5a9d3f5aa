//! Closed-form mass-splitting optimizers: the fully discrete plan on
//! `{-1, 0, 1}` with its one-parameter family, and the continuous-space plan
//! on `[-1, 1]` built from solutions of the discrete Euler–Lagrange equation.

mod continuum;
mod discrete;
mod qsqrt3;

pub use continuum::{
    branch_tuple, branch_velocity, cell_midpoints, continuous_optimal_cost, el_residual, map_s1,
    map_s2, map_t1, map_t2, pushforward_partition, solve_discrete_el, theorem1_branch_tuples,
    theorem1_cost_tolerance, theorem1_discretized_plan, velocity_from_path, BranchMap, Component,
    ContinuousPlanSpec, PressureFunction, TrigPathParams,
};
pub use discrete::{
    cost_bounds, delta_family_plan, gerosplan_plan, optimal_face_width, upper_vacating_path,
    CostBounds,
};
pub use qsqrt3::QSqrt3;
