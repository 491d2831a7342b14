//! Job-shop scheduling toolkit: layered decision diagrams (restricted,
//! relaxed, exact), critical-path local refinement on the disjunctive graph,
//! dispatching rules, the shifting bottleneck procedure, a MIP model
//! exporter and a benchmark harness.

pub mod bench;
pub mod dd;
pub mod dispatch;
pub mod error;
pub mod export;
pub mod graph;
pub mod instance;
pub mod opset;

pub use graph::{lns1_refine, Arc, CriticalPath, DisjunctiveGraph, Lns1Config, Lns1Outcome};
pub use error::{Error, Result, Violation};
pub use instance::{
    cost_from_partial, schedule_from_order, validate_schedule, Instance, OpOrder, OperationId,
    PartialCost, Schedule, Time, TrailerMode,
};
pub use opset::OpSet;
