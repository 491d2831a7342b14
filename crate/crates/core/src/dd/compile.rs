use std::hash::BuildHasher;

use hashbrown::HashTable;
use rayon::prelude::*;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::instance::{Instance, OpOrder, Time};

use super::state::{DdState, StateKey};
use super::{MergeMode, Model, Rank};

/// Layers narrower than this are expanded on the calling thread.
const PARALLEL_LAYER: usize = 64;

/// Per-layer node statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayerStats {
    pub layer: usize,
    /// Unique states after deduplication and pruning.
    pub width_before: usize,
    /// States kept after truncation or merging.
    pub width_after: usize,
    pub merges: usize,
    pub prunes: usize,
}

/// A complete operation order found by a diagram and its makespan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdSolution {
    pub order: OpOrder,
    pub makespan: Time,
}

pub(crate) struct Node {
    pub(crate) state: DdState,
    key: StateKey,
    parent: u32,
    op: u32,
    relaxed: bool,
}

impl Node {
    fn root(state: DdState) -> Self {
        Node {
            key: state.key(),
            state,
            parent: u32::MAX,
            op: u32::MAX,
            relaxed: false,
        }
    }
}

/// Expands every node of a layer and folds children with equal identity,
/// keeping the first one in (parent, operation) order. Returns the new layer
/// and the number of folded duplicates.
fn expand(inst: &Instance, parents: &[Node]) -> (Vec<Node>, usize) {
    let children_of = |(pi, p): (usize, &Node)| -> Vec<Node> {
        p.state
            .eligible(inst)
            .map(|x| {
                let (state, _) = p
                    .state
                    .transition(inst, x)
                    .expect("eligible operations always transition");
                Node {
                    key: state.key(),
                    state,
                    parent: pi as u32,
                    op: x as u32,
                    relaxed: p.relaxed,
                }
            })
            .collect()
    };
    let batches: Vec<Vec<Node>> = if parents.len() >= PARALLEL_LAYER {
        parents.par_iter().enumerate().map(children_of).collect()
    } else {
        parents.iter().enumerate().map(children_of).collect()
    };
    let mut index: HashTable<u32> = HashTable::new();
    let mut layer: Vec<Node> = Vec::new();
    let mut dups = 0;
    for child in batches.into_iter().flatten() {
        let hash = FxBuildHasher.hash_one(&child.key);
        match index.find(hash, |&i| layer[i as usize].key == child.key) {
            Some(&i) => {
                dups += 1;
                let kept = &mut layer[i as usize];
                if kept.relaxed && !child.relaxed {
                    kept.relaxed = false;
                    kept.parent = child.parent;
                    kept.op = child.op;
                }
            }
            None => {
                index.insert_unique(hash, layer.len() as u32, |&i| {
                    FxBuildHasher.hash_one(&layer[i as usize].key)
                });
                layer.push(child);
            }
        }
    }
    (layer, dups)
}

/// Sorts a layer by rank, ties broken by state identity.
fn sort_layer(inst: &Instance, layer: &mut Vec<Node>, rank: Rank) {
    let mut keyed: Vec<(Time, Node)> = layer
        .drain(..)
        .map(|n| (rank.value(inst, &n.state), n))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.key.cmp(&b.1.key)));
    layer.extend(keyed.into_iter().map(|(_, n)| n));
}

fn backtrack(trace: &[Vec<(u32, u32)>], mut idx: usize) -> Vec<usize> {
    let mut ops = Vec::with_capacity(trace.len());
    for layer in trace.iter().rev() {
        let (parent, op) = layer[idx];
        ops.push(op as usize);
        idx = parent as usize;
    }
    ops.reverse();
    ops
}

fn record(layer: &[Node]) -> Vec<(u32, u32)> {
    layer.iter().map(|n| (n.parent, n.op)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RestrictedConfig {
    pub model: Model,
    /// Maximum nodes kept per layer; `usize::MAX` disables truncation.
    pub width: usize,
    pub rank: Rank,
    /// Number of best terminal solutions to return.
    pub collect: usize,
}

impl Default for RestrictedConfig {
    fn default() -> Self {
        RestrictedConfig {
            model: Model::M2,
            width: 200,
            rank: Rank::Cost,
            collect: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RestrictedOutcome {
    pub best_makespan: Time,
    /// Up to `collect` distinct solutions, best first.
    pub solutions: Vec<DdSolution>,
    pub stats: Vec<LayerStats>,
}

/// Restricted diagram: every layer is truncated to the `width` best-ranked
/// states. Only the width filter is applied, so at least one complete
/// schedule always reaches the last layer.
pub fn compile_restricted(inst: &Instance, config: &RestrictedConfig) -> Result<RestrictedOutcome> {
    let (suffixes, stats) = restricted_from(inst, DdState::root(inst, config.model), config)?;
    let solutions = suffixes
        .into_iter()
        .map(|(ops, makespan)| {
            Ok(DdSolution {
                order: OpOrder::from_indices(inst, &ops)?,
                makespan,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictedOutcome {
        best_makespan: solutions[0].makespan,
        solutions,
        stats,
    })
}

/// Operations appended below a root, with the resulting makespan.
pub(crate) type Suffix = (Vec<usize>, Time);

/// Restricted diagram rooted at `root`; returns completion suffixes.
pub(crate) fn restricted_from(
    inst: &Instance,
    root: DdState,
    config: &RestrictedConfig,
) -> Result<(Vec<Suffix>, Vec<LayerStats>)> {
    if config.width == 0 {
        return Err(Error::InvalidArgument("width must be at least 1".into()));
    }
    let start = root.depth();
    let mut layer = vec![Node::root(root)];
    let mut trace = Vec::with_capacity(inst.n_ops() - start);
    let mut stats = Vec::new();
    for depth in start + 1..=inst.n_ops() {
        let (mut next, _) = expand(inst, &layer);
        let before = next.len();
        if before > config.width || depth == inst.n_ops() {
            sort_layer(inst, &mut next, config.rank);
            next.truncate(config.width);
        }
        stats.push(LayerStats {
            layer: depth,
            width_before: before,
            width_after: next.len(),
            merges: 0,
            prunes: 0,
        });
        trace.push(record(&next));
        layer = next;
    }
    if start == inst.n_ops() {
        return Ok((vec![(Vec::new(), layer[0].state.cost())], stats));
    }
    // The final layer was sorted by rank; re-sort by makespan for output.
    let mut order: Vec<usize> = (0..layer.len()).collect();
    order.sort_by(|&a, &b| {
        layer[a]
            .state
            .cost()
            .cmp(&layer[b].state.cost())
            .then_with(|| layer[a].key.cmp(&layer[b].key))
    });
    let out = order
        .into_iter()
        .take(config.collect.max(1))
        .map(|i| (backtrack(&trace, i), layer[i].state.cost()))
        .collect();
    Ok((out, stats))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelaxedConfig {
    pub model: Model,
    pub width: usize,
    pub merge_mode: MergeMode,
    /// Nodes whose running makespan exceeds this are discarded.
    pub primal_bound: Option<Time>,
}

impl Default for RelaxedConfig {
    fn default() -> Self {
        RelaxedConfig {
            model: Model::M2,
            width: 200,
            merge_mode: MergeMode::Max,
            primal_bound: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxedOutcome {
    /// Smallest terminal makespan; `None` when pruning removed every path.
    pub bound: Option<Time>,
    /// No merge happened, so `bound` is the exact optimum below the root.
    pub exact: bool,
    pub merges: usize,
    pub prunes: usize,
    /// Best terminal reached without passing a merged node.
    pub best: Option<DdSolution>,
    pub stats: Vec<LayerStats>,
}

/// Relaxed diagram: over-width layers fold their worst-ranked states into a
/// single merged state.
pub fn compile_relaxed(inst: &Instance, config: &RelaxedConfig) -> Result<RelaxedOutcome> {
    let relaxed = relaxed_from(inst, DdState::root(inst, config.model), config)?;
    let best = match relaxed.best {
        Some((ops, makespan)) => Some(DdSolution {
            order: OpOrder::from_indices(inst, &ops)?,
            makespan,
        }),
        None => None,
    };
    Ok(RelaxedOutcome {
        bound: relaxed.bound,
        exact: relaxed.exact,
        merges: relaxed.merges,
        prunes: relaxed.prunes,
        best,
        stats: relaxed.stats,
    })
}

pub(crate) struct RelaxedRun {
    pub(crate) bound: Option<Time>,
    pub(crate) exact: bool,
    pub(crate) merges: usize,
    pub(crate) prunes: usize,
    pub(crate) best: Option<(Vec<usize>, Time)>,
    /// Exact nodes of the first layer that needed merging, with the suffix
    /// leading to each from the root.
    pub(crate) cutset: Vec<(DdState, Vec<usize>)>,
    pub(crate) stats: Vec<LayerStats>,
}

pub(crate) fn relaxed_from(inst: &Instance, root: DdState, config: &RelaxedConfig) -> Result<RelaxedRun> {
    if config.width == 0 {
        return Err(Error::InvalidArgument("width must be at least 1".into()));
    }
    let start = root.depth();
    let mut layer = vec![Node::root(root)];
    let mut trace: Vec<Vec<(u32, u32)>> = Vec::with_capacity(inst.n_ops() - start);
    let mut stats = Vec::new();
    let (mut merges, mut prunes) = (0, 0);
    let mut cutset = Vec::new();
    let mut exact = true;
    for depth in start + 1..=inst.n_ops() {
        let (mut next, _) = expand(inst, &layer);
        let mut layer_prunes = 0;
        if let Some(pb) = config.primal_bound {
            let before = next.len();
            next.retain(|n| n.state.cost() <= pb);
            layer_prunes = before - next.len();
            prunes += layer_prunes;
        }
        let before = next.len();
        let mut layer_merges = 0;
        if next.len() > config.width {
            if exact {
                exact = false;
                cutset = next
                    .iter()
                    .map(|n| {
                        let mut path = backtrack(&trace, n.parent as usize);
                        path.push(n.op as usize);
                        (n.state.clone(), path)
                    })
                    .collect();
            }
            sort_layer(inst, &mut next, Rank::Cost);
            let tail = next.split_off(config.width - 1);
            layer_merges = tail.len() - 1;
            merges += layer_merges;
            let mut tail = tail.into_iter();
            let first = tail.next().expect("tail holds at least two nodes");
            let mut merged_state = first.state;
            for n in tail {
                merged_state = merged_state.merge(&n.state, config.merge_mode)?;
            }
            let merged = Node {
                key: merged_state.key(),
                state: merged_state,
                parent: first.parent,
                op: first.op,
                relaxed: true,
            };
            if !next.iter().any(|n| n.key == merged.key) {
                next.push(merged);
            }
        }
        stats.push(LayerStats {
            layer: depth,
            width_before: before,
            width_after: next.len(),
            merges: layer_merges,
            prunes: layer_prunes,
        });
        trace.push(record(&next));
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    let bound = layer.iter().map(|n| n.state.cost()).min();
    let best = layer
        .iter()
        .enumerate()
        .filter(|(_, n)| !n.relaxed)
        .min_by(|a, b| a.1.state.cost().cmp(&b.1.state.cost()).then_with(|| a.1.key.cmp(&b.1.key)))
        .map(|(i, n)| {
            let path = if trace.is_empty() { Vec::new() } else { backtrack(&trace, i) };
            (path, n.state.cost())
        });
    Ok(RelaxedRun {
        bound,
        exact,
        merges,
        prunes,
        best,
        cutset,
        stats,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullExpansion {
    pub optimum: Time,
    /// Unique states stored over all layers, root included.
    pub valid_nodes: usize,
    /// Generated children that matched an already stored state.
    pub duplicates_folded: usize,
    pub stats: Vec<LayerStats>,
}

/// Exact diagram without truncation.
pub fn full_expansion(inst: &Instance, model: Model, cap: usize) -> Result<FullExpansion> {
    let mut layer = vec![Node::root(DdState::root(inst, model))];
    let mut valid = 1;
    let mut dups = 0;
    let mut stats = Vec::with_capacity(inst.n_ops());
    for depth in 1..=inst.n_ops() {
        let (next, d) = expand(inst, &layer);
        valid += next.len();
        dups += d;
        if valid > cap {
            return Err(Error::CapExceeded {
                what: "full expansion node",
                cap,
            });
        }
        stats.push(LayerStats {
            layer: depth,
            width_before: next.len(),
            width_after: next.len(),
            merges: 0,
            prunes: 0,
        });
        layer = next;
    }
    let optimum = layer
        .iter()
        .map(|n| n.state.cost())
        .min()
        .expect("the last layer of an exact diagram is never empty");
    Ok(FullExpansion {
        optimum,
        valid_nodes: valid,
        duplicates_folded: dups,
        stats,
    })
}

/// Node statistics as CSV with columns
/// `instance,model,layer,width_before,width_after,merges,prunes`.
pub fn node_stats_csv(instance: &str, model: Model, stats: &[LayerStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "model", "layer", "width_before", "width_after", "merges", "prunes"])
        .expect("writing to memory");
    for s in stats {
        w.write_record([
            instance.to_string(),
            model.to_string(),
            s.layer.to_string(),
            s.width_before.to_string(),
            s.width_after.to_string(),
            s.merges.to_string(),
            s.prunes.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}
