//! Dense bounded-variable simplex and an exhaustive integral solver.

mod exact;
mod program;
mod simplex;

pub use exact::{solve_ip_exact, solve_ip_exact_with, ExactAllocation, DEFAULT_NODE_BUDGET};
pub use program::{Constraint, LinearProgram, LpSolution, LpStatus, Relation};
pub use simplex::{solve_lp, solve_lp_with, PivotRule, SimplexOptions};
