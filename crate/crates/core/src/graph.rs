//! Disjunctive graph of a complete machine selection.
//!
//! Node `0` is the source, node `i + 1` is the operation with flat index `i`
//! and the last node is the sink. Every pair of operations sharing a machine
//! carries exactly one oriented, non-fixed arc, so a critical machine arc
//! always joins two operations that are adjacent in the machine order and
//! reversing it is an adjacent swap.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{Instance, OperationId, Schedule, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: Time,
    /// Conjunctive (job order, source, sink) arcs are fixed.
    pub fixed: bool,
    /// Machine of a disjunctive arc.
    pub machine: Option<usize>,
}

/// A longest source-to-sink path, as indices into [`DisjunctiveGraph::arcs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalPath {
    pub arcs: Vec<usize>,
    pub length: Time,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjunctiveGraph {
    ops_per_job: usize,
    n_machines: usize,
    durations: Vec<Time>,
    machine_of: Vec<usize>,
    arcs: Vec<Arc>,
}

impl DisjunctiveGraph {
    /// Builds the graph of `instance` with the given per-machine orders.
    pub fn build(instance: &Instance, machine_orders: &[Vec<OperationId>]) -> Result<Self> {
        let m = instance.n_machines();
        if machine_orders.len() != m {
            return Err(Error::MachineOrder(format!(
                "{} machine orders for {m} machines",
                machine_orders.len()
            )));
        }
        let n = instance.n_ops();
        let sink = n + 1;
        let mut arcs = Vec::with_capacity(n + instance.n_jobs() + n * m / 2);
        for j in 0..instance.n_jobs() {
            let first = j * m;
            arcs.push(Arc {
                from: 0,
                to: first + 1,
                weight: 0,
                fixed: true,
                machine: None,
            });
            for idx in first..first + m {
                let to = if idx + 1 < first + m { idx + 2 } else { sink };
                arcs.push(Arc {
                    from: idx + 1,
                    to,
                    weight: instance.durations()[idx],
                    fixed: true,
                    machine: None,
                });
            }
        }
        let mut seen = vec![false; n];
        for (mach, order) in machine_orders.iter().enumerate() {
            let mut idxs = Vec::with_capacity(order.len());
            for &op in order {
                if !instance.contains(op) || instance.machine_of(op) != mach {
                    return Err(Error::MachineOrder(format!(
                        "{op} is not processed on machine {mach}"
                    )));
                }
                let idx = instance.index(op);
                if std::mem::replace(&mut seen[idx], true) {
                    return Err(Error::MachineOrder(format!("{op} listed twice")));
                }
                idxs.push(idx);
            }
            if idxs.len() != instance.machine_ops(mach).len() {
                return Err(Error::MachineOrder(format!(
                    "machine {mach} order lists {} of {} operations",
                    idxs.len(),
                    instance.machine_ops(mach).len()
                )));
            }
            for (a, &u) in idxs.iter().enumerate() {
                for &v in &idxs[a + 1..] {
                    arcs.push(Arc {
                        from: u + 1,
                        to: v + 1,
                        weight: instance.durations()[u],
                        fixed: false,
                        machine: Some(mach),
                    });
                }
            }
        }
        Ok(DisjunctiveGraph {
            ops_per_job: m,
            n_machines: m,
            durations: instance.durations().to_vec(),
            machine_of: instance.machines().to_vec(),
            arcs,
        })
    }

    /// Graph over arbitrary arcs on operation nodes `1..=durations.len()`,
    /// treated as a single job on a single machine. Used for testing path
    /// computations on hand-made graphs.
    pub fn from_arcs(durations: Vec<Time>, arcs: Vec<Arc>) -> Self {
        let n = durations.len();
        DisjunctiveGraph {
            ops_per_job: n.max(1),
            n_machines: 1,
            machine_of: vec![0; n],
            durations,
            arcs,
        }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn n_ops(&self) -> usize {
        self.durations.len()
    }

    pub fn sink(&self) -> usize {
        self.durations.len() + 1
    }

    fn node_op(&self, node: usize) -> OperationId {
        let idx = node - 1;
        OperationId::new(idx / self.ops_per_job, idx % self.ops_per_job)
    }

    /// Longest path by a topological-order dynamic program. Among equally
    /// long ways into a node, the lowest-numbered predecessor wins.
    pub fn longest_path(&self) -> Result<CriticalPath> {
        let mut ws = Workspace::default();
        self.longest_path_with(&mut ws)
    }

    fn longest_path_with(&self, ws: &mut Workspace) -> Result<CriticalPath> {
        self.forward(ws)?;
        let sink = self.sink();
        let mut arcs = Vec::new();
        let mut node = sink;
        while let Some(a) = ws.pred[node] {
            arcs.push(a);
            node = self.arcs[a].from;
        }
        arcs.reverse();
        Ok(CriticalPath {
            arcs,
            length: ws.dist[sink],
        })
    }

    /// Fills `ws.dist` (earliest start of every node) and `ws.pred`.
    fn forward(&self, ws: &mut Workspace) -> Result<()> {
        let nodes = self.sink() + 1;
        ws.reset(nodes);
        for a in &self.arcs {
            ws.out_start[a.from + 1] += 1;
            ws.indeg[a.to] += 1;
        }
        for i in 0..nodes {
            ws.out_start[i + 1] += ws.out_start[i];
        }
        ws.cursor.extend_from_slice(&ws.out_start[..nodes]);
        ws.out_arcs.resize(self.arcs.len(), 0);
        for (i, a) in self.arcs.iter().enumerate() {
            ws.out_arcs[ws.cursor[a.from]] = i;
            ws.cursor[a.from] += 1;
        }
        ws.stack.extend((0..nodes).rev().filter(|&v| ws.indeg[v] == 0));
        let mut processed = 0;
        while let Some(u) = ws.stack.pop() {
            processed += 1;
            for k in ws.out_start[u]..ws.out_start[u + 1] {
                let ai = ws.out_arcs[k];
                let a = &self.arcs[ai];
                let cand = ws.dist[u] + a.weight;
                let v = a.to;
                let better = match ws.pred[v] {
                    None => cand >= ws.dist[v],
                    Some(p) => {
                        cand > ws.dist[v] || (cand == ws.dist[v] && u < self.arcs[p].from)
                    }
                };
                if better {
                    ws.dist[v] = cand;
                    ws.pred[v] = Some(ai);
                }
                ws.indeg[v] -= 1;
                if ws.indeg[v] == 0 {
                    ws.stack.push(v);
                }
            }
        }
        if processed == nodes {
            Ok(())
        } else {
            Err(Error::Cyclic)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.forward(&mut Workspace::default()).is_ok()
    }

    /// Returns a copy with critical arc `arc` complemented.
    pub fn reverse_critical_arc(&self, path: &CriticalPath, arc: usize) -> Result<Self> {
        let a = self.arcs.get(arc).ok_or(Error::NotCritical(arc))?;
        if a.fixed {
            return Err(Error::FixedArc(arc));
        }
        if !path.arcs.contains(&arc) {
            return Err(Error::NotCritical(arc));
        }
        let mut g = self.clone();
        g.flip(arc);
        Ok(g)
    }

    fn flip(&mut self, arc: usize) {
        let a = &mut self.arcs[arc];
        std::mem::swap(&mut a.from, &mut a.to);
        a.weight = self.durations[a.from - 1];
    }

    /// Start time of every operation is its longest-path distance from the source.
    pub fn to_schedule(&self) -> Result<Schedule> {
        let mut ws = Workspace::default();
        self.forward(&mut ws)?;
        let start = ws.dist[1..=self.n_ops()].to_vec();
        Ok(Schedule::with_durations(self.ops_per_job, &self.durations, start))
    }

    /// Operation order of every machine implied by the disjunctive arcs.
    pub fn machine_orders(&self) -> Vec<Vec<OperationId>> {
        let mut ahead = vec![0usize; self.n_ops()];
        for a in &self.arcs {
            if a.machine.is_some() {
                ahead[a.to - 1] += 1;
            }
        }
        (0..self.n_machines)
            .map(|m| {
                let mut ops: Vec<usize> = (0..self.n_ops()).filter(|&i| self.machine_of[i] == m).collect();
                ops.sort_by_key(|&i| (ahead[i], i));
                ops.into_iter().map(|i| self.node_op(i + 1)).collect()
            })
            .collect()
    }

    /// One line per machine listing its operations in processing order.
    pub fn dump_orientation(&self) -> String {
        let mut out = String::new();
        for (m, ops) in self.machine_orders().iter().enumerate() {
            let _ = write!(out, "m{m}:");
            for op in ops {
                let _ = write!(out, " {op}");
            }
            out.push('\n');
        }
        out
    }

    fn orientation_key(&self) -> Vec<u64> {
        let mut key = vec![0u64; self.arcs.len().div_ceil(64)];
        for (i, a) in self.arcs.iter().enumerate() {
            if a.machine.is_some() && a.from > a.to {
                key[i / 64] |= 1 << (i % 64);
            }
        }
        key
    }
}

#[derive(Default)]
struct Workspace {
    dist: Vec<Time>,
    pred: Vec<Option<usize>>,
    indeg: Vec<usize>,
    out_start: Vec<usize>,
    out_arcs: Vec<usize>,
    cursor: Vec<usize>,
    stack: Vec<usize>,
}

impl Workspace {
    fn reset(&mut self, nodes: usize) {
        self.dist.clear();
        self.dist.resize(nodes, 0);
        self.pred.clear();
        self.pred.resize(nodes, None);
        self.indeg.clear();
        self.indeg.resize(nodes, 0);
        self.out_start.clear();
        self.out_start.resize(nodes + 1, 0);
        self.cursor.clear();
        self.stack.clear();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lns1Config {
    /// Maximum number of graph evaluations.
    pub budget: usize,
    /// Abandon a branch as soon as it is longer than its parent.
    pub strict_descent: bool,
}

impl Default for Lns1Config {
    fn default() -> Self {
        Lns1Config {
            budget: 10_000,
            strict_descent: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lns1Outcome {
    pub makespan: Time,
    pub graph: DisjunctiveGraph,
    pub visits: usize,
}

/// Recursive critical-arc reversal search.
///
/// Each step reverses one non-fixed critical arc, locks it for the rest of
/// that branch, recurses and then restores it. Orientations already seen are
/// not expanded again. The best orientation found is returned; its length
/// never exceeds the input's.
pub fn lns1_refine(graph: &DisjunctiveGraph, config: Lns1Config) -> Result<Lns1Outcome> {
    let mut ws = Workspace::default();
    let initial = graph.longest_path_with(&mut ws)?.length;
    let mut search = Lns1 {
        graph: graph.clone(),
        locked: vec![false; graph.arcs.len()],
        config,
        visits: 0,
        seen: HashSet::new(),
        best_len: initial,
        best_arcs: None,
        ws,
    };
    search.visit(initial);
    let mut best = graph.clone();
    if let Some(arcs) = search.best_arcs {
        best.arcs = arcs;
    }
    Ok(Lns1Outcome {
        makespan: search.best_len,
        graph: best,
        visits: search.visits,
    })
}

struct Lns1 {
    graph: DisjunctiveGraph,
    locked: Vec<bool>,
    config: Lns1Config,
    visits: usize,
    seen: HashSet<Vec<u64>>,
    best_len: Time,
    best_arcs: Option<Vec<Arc>>,
    ws: Workspace,
}

impl Lns1 {
    fn visit(&mut self, parent: Time) -> Time {
        if self.visits >= self.config.budget {
            return parent;
        }
        self.visits += 1;
        // Reversing a critical arc of an acyclic graph keeps it acyclic.
        let Ok(path) = self.graph.longest_path_with(&mut self.ws) else {
            return Time::MAX;
        };
        let mut s = path.length;
        if s < self.best_len {
            self.best_len = s;
            self.best_arcs = Some(self.graph.arcs.clone());
        }
        if self.config.strict_descent && s > parent {
            return s;
        }
        if !self.seen.insert(self.graph.orientation_key()) {
            return s;
        }
        for a in path.arcs {
            if self.graph.arcs[a].fixed || self.locked[a] {
                continue;
            }
            self.graph.flip(a);
            self.locked[a] = true;
            let t = self.visit(s);
            if t < s {
                s = t;
            }
            self.graph.flip(a);
            self.locked[a] = false;
            if self.visits >= self.config.budget {
                break;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{cost_from_partial, OpOrder};
    use std::collections::BTreeMap;

    fn t1() -> Instance {
        Instance::parse("2 2\n0 3 1 2\n1 2 0 4").unwrap()
    }

    fn o(j: usize, k: usize) -> OperationId {
        OperationId::new(j, k)
    }

    fn feasible_t1() -> DisjunctiveGraph {
        DisjunctiveGraph::build(&t1(), &[vec![o(0, 0), o(1, 1)], vec![o(1, 0), o(0, 1)]]).unwrap()
    }

    fn long_t1() -> DisjunctiveGraph {
        DisjunctiveGraph::build(&t1(), &[vec![o(1, 1), o(0, 0)], vec![o(1, 0), o(0, 1)]]).unwrap()
    }

    fn arc(from: usize, to: usize, weight: Time, fixed: bool) -> Arc {
        Arc {
            from,
            to,
            weight,
            fixed,
            machine: if fixed { None } else { Some(0) },
        }
    }

    #[test]
    fn build_matches_hand_construction() {
        let g = feasible_t1();
        // Nodes: O0.0=1, O0.1=2, O1.0=3, O1.1=4, sink=5.
        let mut got: Vec<(usize, usize, Time, bool)> =
            g.arcs().iter().map(|a| (a.from, a.to, a.weight, a.fixed)).collect();
        got.sort();
        let mut want = vec![
            (0, 1, 0, true),
            (0, 3, 0, true),
            (1, 2, 3, true),
            (3, 4, 2, true),
            (1, 4, 3, false),
            (3, 2, 2, false),
            (2, 5, 2, true),
            (4, 5, 4, true),
        ];
        want.sort();
        assert_eq!(got, want);
        assert!(g.is_acyclic());
    }

    #[test]
    fn longest_paths_of_both_m0_orders() {
        let g = feasible_t1();
        let cp = g.longest_path().unwrap();
        assert_eq!(cp.length, 7);
        let nodes: Vec<usize> = std::iter::once(0)
            .chain(cp.arcs.iter().map(|&a| g.arcs()[a].to))
            .collect();
        assert_eq!(nodes, vec![0, 1, 4, 5]);

        let g = long_t1();
        assert!(g.is_acyclic());
        let cp = g.longest_path().unwrap();
        assert_eq!(cp.length, 11);
        let nodes: Vec<usize> = std::iter::once(0)
            .chain(cp.arcs.iter().map(|&a| g.arcs()[a].to))
            .collect();
        assert_eq!(nodes, vec![0, 3, 4, 1, 2, 5]);
    }

    #[test]
    fn build_rejects_bad_orders() {
        let inst = t1();
        let err = DisjunctiveGraph::build(&inst, &[vec![o(1, 0), o(0, 0)], vec![o(1, 1), o(0, 1)]]);
        assert!(matches!(err, Err(Error::MachineOrder(_))));
        let err = DisjunctiveGraph::build(&inst, &[vec![o(0, 0), o(0, 0)], vec![o(1, 0), o(0, 1)]]);
        assert!(matches!(err, Err(Error::MachineOrder(_))));
    }

    #[test]
    fn raw_graph_paths() {
        let chain = DisjunctiveGraph::from_arcs(
            vec![2, 3],
            vec![arc(0, 1, 0, true), arc(1, 2, 2, true), arc(2, 3, 3, true)],
        );
        assert_eq!(chain.longest_path().unwrap().length, 5);

        let cyc = DisjunctiveGraph::from_arcs(
            vec![1, 1],
            vec![
                arc(0, 1, 0, true),
                arc(1, 2, 1, false),
                arc(2, 1, 1, false),
                arc(2, 3, 1, true),
            ],
        );
        assert_eq!(cyc.longest_path(), Err(Error::Cyclic));
        assert_eq!(cyc.to_schedule(), Err(Error::Cyclic));
    }

    #[test]
    fn reversing_the_critical_machine_arc() {
        let g = long_t1();
        let cp = g.longest_path().unwrap();
        let machine_arc = *cp.arcs.iter().find(|&&a| !g.arcs()[a].fixed).unwrap();
        assert_eq!((g.arcs()[machine_arc].from, g.arcs()[machine_arc].to), (4, 1));
        let r = g.reverse_critical_arc(&cp, machine_arc).unwrap();
        assert_eq!(r.longest_path().unwrap().length, 7);
        assert_eq!(r.arcs()[machine_arc].weight, 3);

        let fixed = *cp.arcs.iter().find(|&&a| g.arcs()[a].fixed).unwrap();
        assert_eq!(g.reverse_critical_arc(&cp, fixed), Err(Error::FixedArc(fixed)));

        let off_path = (0..g.arcs().len())
            .find(|a| !g.arcs()[*a].fixed && !cp.arcs.contains(a))
            .unwrap();
        assert_eq!(g.reverse_critical_arc(&cp, off_path), Err(Error::NotCritical(off_path)));
    }

    #[test]
    fn lns1_examples() {
        let out = lns1_refine(&long_t1(), Lns1Config::default()).unwrap();
        assert_eq!(out.makespan, 7);
        assert_eq!(out.graph.longest_path().unwrap().length, 7);

        let g = feasible_t1();
        let out = lns1_refine(&g, Lns1Config::default()).unwrap();
        assert_eq!(out.makespan, 7);
        assert_eq!(out.graph, g);

        let out = lns1_refine(
            &long_t1(),
            Lns1Config {
                budget: 0,
                strict_descent: true,
            },
        )
        .unwrap();
        assert_eq!((out.makespan, out.visits), (11, 0));
    }

    #[test]
    fn schedule_extraction() {
        let s = feasible_t1().to_schedule().unwrap();
        assert_eq!(s.makespan(), 7);
        assert_eq!(crate::validate_schedule(&t1(), &s), Ok(()));

        let one = Instance::parse("1 1\n0 5").unwrap();
        let g = DisjunctiveGraph::build(&one, &[vec![o(0, 0)]]).unwrap();
        let s = g.to_schedule().unwrap();
        assert_eq!((s.start(o(0, 0)), s.makespan()), (0, 5));
    }

    #[test]
    fn cfp_round_trip() {
        let inst = Instance::random(5, 4, 3, 1, 30).unwrap();
        let order: Vec<usize> = (0..inst.n_machines())
            .flat_map(|k| (0..inst.n_jobs()).map(move |j| j * 4 + k))
            .collect();
        let ord = OpOrder::from_indices(&inst, &order).unwrap();
        let cfp = cost_from_partial(&inst, &ord, None, &BTreeMap::new()).unwrap();
        let sched = crate::schedule_from_order(&inst, &order).unwrap();
        let g = DisjunctiveGraph::build(&inst, &sched.machine_orders(&inst)).unwrap();
        assert_eq!(g.longest_path().unwrap().length, cfp.makespan);
        assert_eq!(g.machine_orders(), sched.machine_orders(&inst));
    }

    #[test]
    fn orientation_dump() {
        assert_eq!(feasible_t1().dump_orientation(), "m0: O0.0 O1.1\nm1: O1.0 O0.1\n");
    }
}
