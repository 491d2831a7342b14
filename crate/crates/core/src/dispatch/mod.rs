//! Greedy dispatching rules and the shifting bottleneck procedure.

mod one_machine;
mod rules;
mod shifting_bottleneck;

pub use one_machine::{solve_one_machine_lmax, OneMachineProblem};
pub use rules::{dispatch, dispatch_order, dispatch_order_with, dispatch_with, Candidates, Rule};
pub use shifting_bottleneck::shifting_bottleneck;
