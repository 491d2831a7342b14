use rayon::prelude::*;

use crate::graph::DisjunctiveGraph;
use crate::instance::{Instance, Schedule, Time};

use super::one_machine::{solve_with_precedences, OneMachineProblem};

/// Search nodes allowed per one-machine subproblem before the best
/// sequence found so far is accepted.
const SUBPROBLEM_NODES: usize = 200_000;

/// Shifting bottleneck: machines are sequenced one at a time, each time
/// fixing the unsequenced machine with the largest optimal maximum lateness
/// (ties to the lowest machine). With `reoptimize`, every previously fixed
/// machine is re-solved once, in fixation order, after each new fixation.
pub fn shifting_bottleneck(inst: &Instance, reoptimize: bool) -> Schedule {
    let m = inst.n_machines();
    let mut seqs: Vec<Option<Vec<usize>>> = vec![None; m];
    let mut fixed: Vec<usize> = Vec::with_capacity(m);
    while fixed.len() < m {
        let graph = PartialGraph::new(inst, &seqs);
        let open: Vec<usize> = (0..m).filter(|k| seqs[*k].is_none()).collect();
        let solved: Vec<(Vec<usize>, Time)> = open.par_iter().map(|&k| graph.solve(inst, k)).collect();
        let mut pick = 0;
        for (i, s) in solved.iter().enumerate() {
            if s.1 > solved[pick].1 {
                pick = i;
            }
        }
        let k = open[pick];
        seqs[k] = Some(solved.into_iter().nth(pick).expect("pick indexes solved").0);
        if reoptimize {
            for &r in &fixed {
                seqs[r] = None;
                let (seq, _) = PartialGraph::new(inst, &seqs).solve(inst, r);
                seqs[r] = Some(seq);
            }
        }
        fixed.push(k);
    }
    let orders: Vec<_> = seqs
        .into_iter()
        .map(|s| s.expect("all machines sequenced").into_iter().map(|i| inst.op(i)).collect())
        .collect();
    DisjunctiveGraph::build(inst, &orders)
        .and_then(|g| g.to_schedule())
        .expect("sequences respect reachability, so the selection is acyclic")
}

/// Job arcs plus the chains of the sequenced machines.
struct PartialGraph {
    succ: Vec<Vec<usize>>,
    head: Vec<Time>,
    tail: Vec<Time>,
    makespan: Time,
}

impl PartialGraph {
    fn new(inst: &Instance, seqs: &[Option<Vec<usize>>]) -> Self {
        let n = inst.n_ops();
        let p = inst.durations();
        let mut succ = vec![Vec::new(); n];
        for (i, out) in succ.iter_mut().enumerate() {
            out.extend(inst.succ_index(i));
        }
        for seq in seqs.iter().flatten() {
            for w in seq.windows(2) {
                succ[w[0]].push(w[1]);
            }
        }
        let mut indeg = vec![0usize; n];
        for v in succ.iter().flatten() {
            indeg[*v] += 1;
        }
        let mut topo: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut at = 0;
        while at < topo.len() {
            let u = topo[at];
            at += 1;
            for &v in &succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    topo.push(v);
                }
            }
        }
        assert_eq!(topo.len(), n, "partial selection must stay acyclic");
        let mut head = vec![0; n];
        for &u in &topo {
            for &v in &succ[u] {
                head[v] = head[v].max(head[u] + p[u]);
            }
        }
        let mut tail = vec![0; n];
        for &u in topo.iter().rev() {
            for &v in &succ[u] {
                tail[u] = tail[u].max(p[v] + tail[v]);
            }
        }
        let makespan = (0..n).map(|i| head[i] + p[i] + tail[i]).max().unwrap_or(0);
        PartialGraph {
            succ,
            head,
            tail,
            makespan,
        }
    }

    /// Optimal sequence of machine `k` and its maximum lateness against the
    /// current makespan.
    fn solve(&self, inst: &Instance, k: usize) -> (Vec<usize>, Time) {
        let ops = inst.machine_ops(k);
        let problem = OneMachineProblem {
            release: ops.iter().map(|&i| self.head[i]).collect(),
            processing: ops.iter().map(|&i| inst.durations()[i]).collect(),
            due: ops.iter().map(|&i| self.makespan - self.tail[i]).collect(),
        };
        let preds = self.reach_within(inst.n_ops(), ops);
        let (seq, lmax) = solve_with_precedences(&problem, &preds, Some(SUBPROBLEM_NODES));
        (seq.into_iter().map(|j| ops[j]).collect(), lmax)
    }

    /// For each of `ops`, the positions in `ops` that reach it.
    fn reach_within(&self, n: usize, ops: &[usize]) -> Vec<Vec<usize>> {
        let mut local = vec![usize::MAX; n];
        for (j, &i) in ops.iter().enumerate() {
            local[i] = j;
        }
        let mut preds = vec![Vec::new(); ops.len()];
        let mut seen = vec![usize::MAX; n];
        let mut stack = Vec::new();
        for (a, &src) in ops.iter().enumerate() {
            stack.push(src);
            seen[src] = a;
            while let Some(u) = stack.pop() {
                for &v in &self.succ[u] {
                    if seen[v] != a {
                        seen[v] = a;
                        if local[v] != usize::MAX {
                            preds[local[v]].push(a);
                        }
                        stack.push(v);
                    }
                }
            }
        }
        preds
    }
}
