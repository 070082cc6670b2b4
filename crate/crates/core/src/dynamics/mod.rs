//! The outer symplectic billiard map and the flow of the shadow field.

mod flow;
mod map;
mod periodic;
mod reflection;

pub use flow::{flow, flow_with_report, FlowResult, DEFAULT_FLOW_TOL};
pub use map::{
    orbit, symplecticity_defect, t2, t_inv, t_inv_step, t_jacobian, t_map, t_power, t_step,
    OrbitFailure, OrbitRecord, Step,
};
pub use periodic::{periodic_search, periodic_search_in, PeriodicOrbit, StartRange, PERIODIC_TOL};
pub use reflection::{
    reflect, reflect_minus, reflect_plus, solution_branches, ReflectionSolution, Side,
    SolverSettings, EXTERIOR_MARGIN,
};
