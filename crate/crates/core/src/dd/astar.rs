use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::instance::{Instance, OpOrder, Time};

use super::state::DdState;
use super::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AStarHeuristic {
    Zero,
    /// Remaining machine and job work beyond the running makespan.
    TrailerMax,
}

impl AStarHeuristic {
    /// Estimated increase of the makespan from `state` to completion.
    pub fn estimate(self, inst: &Instance, state: &DdState) -> Time {
        match self {
            AStarHeuristic::Zero => 0,
            AStarHeuristic::TrailerMax => state.lower_bound(inst) - state.cost(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AStarOutcome {
    pub optimum: Time,
    pub order: OpOrder,
    pub expansions: usize,
}

/// Best-first search over Model 2 states ordered by running makespan plus
/// the heuristic estimate. The estimate never decreases along a path, so the
/// first complete state popped is optimal.
pub fn a_star_search(inst: &Instance, heuristic: AStarHeuristic, cap: usize) -> Result<AStarOutcome> {
    let root = DdState::root(inst, Model::M2);
    let mut arena: Vec<(DdState, u32, u32)> = Vec::new();
    let mut seen = HashSet::new();
    let mut open = BinaryHeap::new();
    let priority = |s: &DdState| s.cost() + heuristic.estimate(inst, s);
    seen.insert(root.key());
    open.push(Reverse((priority(&root), Reverse(0usize), 0usize)));
    arena.push((root, u32::MAX, u32::MAX));
    let mut expansions = 0;
    while let Some(Reverse((_, _, id))) = open.pop() {
        let state = arena[id].0.clone();
        if state.depth() == inst.n_ops() {
            let mut ops = Vec::with_capacity(inst.n_ops());
            let mut cur = id;
            while arena[cur].1 != u32::MAX {
                ops.push(arena[cur].2 as usize);
                cur = arena[cur].1 as usize;
            }
            ops.reverse();
            return Ok(AStarOutcome {
                optimum: state.cost(),
                order: OpOrder::from_indices(inst, &ops)?,
                expansions,
            });
        }
        expansions += 1;
        if expansions > cap {
            return Err(Error::CapExceeded {
                what: "A* expansion",
                cap,
            });
        }
        for x in state.eligible(inst) {
            let (child, _) = state.transition(inst, x)?;
            if !seen.insert(child.key()) {
                continue;
            }
            let f = priority(&child);
            let depth = child.depth();
            open.push(Reverse((f, Reverse(depth), arena.len())));
            arena.push((child, id as u32, x as u32));
        }
    }
    unreachable!("the search space always contains a complete schedule")
}
