use std::fmt;

use crate::instance::OperationId;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing prerequisite for {op}: {missing} has not been scheduled")]
    MissingPrerequisite { op: OperationId, missing: OperationId },

    #[error("operation {0} is already scheduled")]
    AlreadyScheduled(OperationId),

    #[error("invalid machine order: {0}")]
    MachineOrder(String),

    #[error("graph contains a cycle")]
    Cyclic,

    #[error("arc {0} is fixed and cannot be reversed")]
    FixedArc(usize),

    #[error("arc {0} is not on the critical path")]
    NotCritical(usize),

    #[error("{what} cap of {cap} exceeded")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("infeasible schedule: {0}")]
    Infeasible(Violation),

    #[error("makespan {makespan} is below the recorded optimum {optimum}")]
    BelowOptimum { makespan: i64, optimum: i64 },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// First constraint a schedule breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The schedule does not cover the instance.
    Shape { expected: usize, found: usize },
    NegativeStart(OperationId),
    /// completion != start + duration
    Completion(OperationId),
    Makespan { recorded: i64, actual: i64 },
    Precedence { before: OperationId, after: OperationId },
    Overlap { machine: usize, first: OperationId, second: OperationId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { expected, found } => {
                write!(f, "schedule has {found} operations, instance has {expected}")
            }
            Violation::NegativeStart(op) => write!(f, "{op} starts before time 0"),
            Violation::Completion(op) => {
                write!(f, "completion of {op} differs from start plus duration")
            }
            Violation::Makespan { recorded, actual } => {
                write!(f, "makespan {recorded} differs from latest completion {actual}")
            }
            Violation::Precedence { before, after } => {
                write!(f, "precedence violation {before}->{after}")
            }
            Violation::Overlap {
                machine,
                first,
                second,
            } => write!(f, "overlap on machine {machine} between {first} and {second}"),
        }
    }
}
