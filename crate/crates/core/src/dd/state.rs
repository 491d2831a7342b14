use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{Instance, Time};
use crate::opset::OpSet;

use super::{MergeMode, Model};

/// Canonical identity of a state: set words, machine finish times, then the
/// completion times that take part in identity, in operation order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<u64>);

/// DD node state for both models, with the "maybe done" fields used by
/// merged (relaxed) nodes.
///
/// * `done` is everything known to be finished. Under Model 1 that is `V`;
///   under Model 2 it is `V ∪ V_L`, with `V_L` kept in `long_done`.
/// * `maybe` is `V_s`, operations finished on some but not all merged paths.
/// * `op_finish` holds `f^O` over `done` and `f^s` over `maybe`; entries for
///   other operations are zero.
///
/// Under Model 2 the completion times of `V_L` are retained but excluded from
/// identity.
#[derive(Clone)]
pub struct DdState {
    model: Model,
    depth: usize,
    done: OpSet,
    long_done: OpSet,
    maybe: OpSet,
    op_finish: Vec<Time>,
    machine_finish: Vec<Time>,
}

impl fmt::Debug for DdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let times = |set: &OpSet| -> Vec<(usize, Time)> {
            set.iter().map(|i| (i, self.op_finish[i])).collect()
        };
        f.debug_struct("DdState")
            .field("model", &self.model)
            .field("depth", &self.depth)
            .field("recent", &times(&self.recent()))
            .field("long_done", &self.long_done.iter().collect::<Vec<_>>())
            .field("maybe", &times(&self.maybe))
            .field("machine_finish", &self.machine_finish)
            .finish()
    }
}

impl PartialEq for DdState {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.key() == other.key()
    }
}

impl Eq for DdState {}

impl DdState {
    pub fn root(inst: &Instance, model: Model) -> Self {
        let n = inst.n_ops();
        DdState {
            model,
            depth: 0,
            done: OpSet::new(n),
            long_done: OpSet::new(n),
            maybe: OpSet::new(n),
            op_finish: vec![0; n],
            machine_finish: vec![0; inst.n_machines()],
        }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Number of decisions taken to reach this state.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Every operation known to be finished.
    pub fn done(&self) -> &OpSet {
        &self.done
    }

    /// `V`: finished operations whose completion time is part of identity.
    pub fn recent(&self) -> OpSet {
        self.done.difference(&self.long_done)
    }

    /// `V_L`; always empty under Model 1.
    pub fn long_done(&self) -> &OpSet {
        &self.long_done
    }

    /// `V_s`.
    pub fn maybe(&self) -> &OpSet {
        &self.maybe
    }

    pub fn op_finish(&self, idx: usize) -> Option<Time> {
        (self.done.contains(idx) || self.maybe.contains(idx)).then(|| self.op_finish[idx])
    }

    pub fn machine_finish(&self) -> &[Time] {
        &self.machine_finish
    }

    pub fn is_exact(&self) -> bool {
        self.maybe.is_empty()
    }

    /// Running makespan: the latest machine finish time.
    pub fn cost(&self) -> Time {
        self.machine_finish.iter().copied().max().unwrap_or(0)
    }

    pub fn key(&self) -> StateKey {
        let words = self.done.words().len();
        let mut k = Vec::with_capacity(3 * words + self.machine_finish.len() + self.done.len());
        k.extend_from_slice(self.done.words());
        k.extend_from_slice(self.long_done.words());
        k.extend_from_slice(self.maybe.words());
        k.extend(self.machine_finish.iter().map(|&t| t as u64));
        for w in 0..words {
            let mut bits = (self.done.words()[w] & !self.long_done.words()[w]) | self.maybe.words()[w];
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                k.push(self.op_finish[i] as u64);
            }
        }
        StateKey(k)
    }

    /// Operations that may be appended: not finished, job predecessor
    /// finished or maybe finished.
    pub fn eligible<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = usize> + 'a {
        (0..inst.n_ops()).filter(move |&x| {
            !self.done.contains(x)
                && inst
                    .pred_index(x)
                    .is_none_or(|p| self.done.contains(p) || self.maybe.contains(p))
        })
    }

    /// Appends operation `x` (flat index), returning the child state and the
    /// completion time of `x`.
    pub fn transition(&self, inst: &Instance, x: usize) -> Result<(DdState, Time)> {
        if x >= inst.n_ops() {
            return Err(Error::InvalidArgument(format!("operation index {x} out of range")));
        }
        if self.done.contains(x) {
            return Err(Error::AlreadyScheduled(inst.op(x)));
        }
        let pred = inst.pred_index(x);
        let ready = match pred {
            Some(p) if self.done.contains(p) || self.maybe.contains(p) => self.op_finish[p],
            Some(p) => {
                return Err(Error::MissingPrerequisite {
                    op: inst.op(x),
                    missing: inst.op(p),
                })
            }
            None => 0,
        };
        let m = inst.machines()[x];
        let c = self.machine_finish[m].max(ready) + inst.durations()[x];
        let mut next = self.clone();
        next.depth += 1;
        next.done.insert(x);
        next.maybe.remove(x);
        next.op_finish[x] = c;
        next.machine_finish[m] = c;
        if let (Model::M2, Some(p)) = (self.model, pred) {
            if next.maybe.remove(p) {
                next.done.insert(p);
            }
            next.long_done.insert(p);
        }
        Ok((next, c))
    }

    /// Merges two states of the same layer into one relaxed state.
    ///
    /// Machine finish times take the minimum; definitely-done sets intersect;
    /// operations done on only one side, or maybe-done on either, become
    /// maybe-done. Completion times combine by `mode`.
    pub fn merge(&self, other: &DdState, mode: MergeMode) -> Result<DdState> {
        if self.model != other.model {
            return Err(Error::InvalidArgument("cannot merge states of different models".into()));
        }
        if self.depth != other.depth || self.op_finish.len() != other.op_finish.len() {
            return Err(Error::InvalidArgument("cannot merge states from different layers".into()));
        }
        let combine = |a: Time, b: Time| match mode {
            MergeMode::Max => a.max(b),
            MergeMode::Min => a.min(b),
        };
        let done = self.done.intersection(&other.done);
        let long_done = self.long_done.intersection(&other.long_done);
        let touched = self
            .done
            .union(&other.done)
            .union(&self.maybe)
            .union(&other.maybe);
        let maybe = touched.difference(&done);
        let mut op_finish = vec![0; self.op_finish.len()];
        for i in touched.iter() {
            let a = (self.done.contains(i) || self.maybe.contains(i)).then(|| self.op_finish[i]);
            let b = (other.done.contains(i) || other.maybe.contains(i)).then(|| other.op_finish[i]);
            op_finish[i] = match (a, b) {
                (Some(a), Some(b)) => combine(a, b),
                (Some(t), None) | (None, Some(t)) => t,
                (None, None) => 0,
            };
        }
        let machine_finish = self
            .machine_finish
            .iter()
            .zip(&other.machine_finish)
            .map(|(&a, &b)| a.min(b))
            .collect();
        Ok(DdState {
            model: self.model,
            depth: self.depth,
            done,
            long_done,
            maybe,
            op_finish,
            machine_finish,
        })
    }

    /// Admissible estimate of the final makespan: every machine still has to
    /// process its unfinished operations, and every job its remaining chain.
    pub fn lower_bound(&self, inst: &Instance) -> Time {
        let mut lb = self.cost();
        let mut machine_rem = vec![0; inst.n_machines()];
        for x in 0..inst.n_ops() {
            if !self.done.contains(x) {
                machine_rem[inst.machines()[x]] += inst.durations()[x];
            }
        }
        for (m, rem) in machine_rem.into_iter().enumerate() {
            lb = lb.max(self.machine_finish[m] + rem);
        }
        let per_job = inst.n_machines();
        for j in 0..inst.n_jobs() {
            let first = j * per_job;
            if let Some(x) = (first..first + per_job).find(|&x| !self.done.contains(x)) {
                let ready = inst
                    .pred_index(x)
                    .and_then(|p| self.op_finish(p))
                    .unwrap_or(0);
                lb = lb.max(ready + inst.durations()[x] + inst.job_tail_work(x));
            }
        }
        lb
    }
}
