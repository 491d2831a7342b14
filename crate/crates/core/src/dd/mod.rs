//! Layered multivalued decision diagrams over operation permutations.
//!
//! Layer `k` holds the states reachable after `k` operations have been
//! appended. Two state models are available: [`Model::M1`] keys a state on
//! every completion time, [`Model::M2`] drops the completion times of
//! operations whose job successor is already scheduled, folding more
//! symmetric partial schedules into one node.

mod astar;
mod bnb;
mod compile;
mod state;

pub use astar::{a_star_search, AStarHeuristic, AStarOutcome};
pub use bnb::{dd_branch_and_bound, BnbOutcome};
pub use compile::{
    compile_relaxed, compile_restricted, full_expansion, node_stats_csv, DdSolution,
    FullExpansion, LayerStats, RelaxedConfig, RelaxedOutcome, RestrictedConfig,
    RestrictedOutcome,
};
pub use state::{DdState, StateKey};

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    M1,
    M2,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::M1 => "m1",
            Model::M2 => "m2",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "m1" | "1" => Ok(Model::M1),
            "m2" | "2" => Ok(Model::M2),
            other => Err(format!("unknown model {other:?}, expected m1 or m2")),
        }
    }
}

/// How completion times of operations done on both merged paths combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MergeMode {
    /// Worst-case (latest) completion time.
    #[default]
    Max,
    /// Earliest completion time; keeps relaxed bounds valid.
    Min,
}

/// Ordering key used when a layer must be truncated or merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rank {
    /// Running makespan.
    #[default]
    Cost,
    /// Running makespan raised to the remaining machine and job work bound.
    CostPlusTrailer,
}

impl Rank {
    fn value(self, inst: &crate::Instance, state: &DdState) -> crate::Time {
        match self {
            Rank::Cost => state.cost(),
            Rank::CostPlusTrailer => state.lower_bound(inst),
        }
    }
}

/// Default limit on stored states for exact expansion.
pub const FULL_EXPANSION_CAP: usize = 50_000_000;
/// Default limit on A* expansions.
pub const A_STAR_CAP: usize = 10_000_000;
