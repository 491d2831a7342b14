use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::instance::{Instance, OpOrder, Time};

use super::compile::{relaxed_from, restricted_from};
use super::state::DdState;
use super::{MergeMode, Model, Rank, RelaxedConfig, RestrictedConfig};

/// Limit on processed branch-and-bound nodes.
const NODE_CAP: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct BnbOutcome {
    pub optimum: Time,
    pub order: OpOrder,
    /// Queue nodes processed.
    pub nodes: usize,
}

/// Exact search that branches on exact cutsets of relaxed diagrams.
///
/// Each queued exact node gets a restricted diagram (primal update) and a
/// relaxed diagram with min-mode merging rooted at it. A node whose relaxed
/// bound cannot beat the incumbent is dropped; otherwise the exact nodes of
/// the first merged layer are queued. Model 2 states are used throughout.
pub fn dd_branch_and_bound(inst: &Instance, width: usize) -> Result<BnbOutcome> {
    if width == 0 {
        return Err(Error::InvalidArgument("width must be at least 1".into()));
    }
    let model = Model::M2;
    let primal = RestrictedConfig {
        model,
        width,
        rank: Rank::Cost,
        collect: 1,
    };
    let root = DdState::root(inst, model);
    let (first, _) = restricted_from(inst, root.clone(), &primal)?;
    let (mut best_order, mut incumbent) = first.into_iter().next().expect("restricted diagrams yield a solution");

    let mut stack: Vec<(DdState, Vec<usize>)> = vec![(root, Vec::new())];
    let mut nodes = 0;
    // Equal exact states have identical completions; branch on each once.
    let mut seen = HashSet::new();
    while let Some((state, prefix)) = stack.pop() {
        if state.cost() >= incumbent || !seen.insert(state.key()) {
            continue;
        }
        nodes += 1;
        if nodes > NODE_CAP {
            return Err(Error::CapExceeded {
                what: "branch-and-bound node",
                cap: NODE_CAP,
            });
        }
        let (found, _) = restricted_from(inst, state.clone(), &primal)?;
        if let Some((suffix, value)) = found.into_iter().next() {
            if value < incumbent {
                incumbent = value;
                best_order = [prefix.as_slice(), suffix.as_slice()].concat();
            }
        }
        let relaxed = relaxed_from(
            inst,
            state,
            &RelaxedConfig {
                model,
                width,
                merge_mode: MergeMode::Min,
                primal_bound: Some(incumbent - 1),
            },
        )?;
        let Some(bound) = relaxed.bound else { continue };
        if bound >= incumbent {
            continue;
        }
        if relaxed.exact {
            if let Some((suffix, value)) = relaxed.best {
                incumbent = value;
                best_order = [prefix.as_slice(), suffix.as_slice()].concat();
            }
            continue;
        }
        for (child, suffix) in relaxed.cutset.into_iter().rev() {
            let path = [prefix.as_slice(), suffix.as_slice()].concat();
            stack.push((child, path));
        }
    }
    Ok(BnbOutcome {
        optimum: incumbent,
        order: OpOrder::from_indices(inst, &best_order)?,
        nodes,
    })
}
