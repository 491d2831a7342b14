#![allow(dead_code)]

use jobshop::{DisjunctiveGraph, Instance, Time};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimum by enumerating every job-order-respecting operation sequence and
/// timing each one semi-actively. Independent of the library's evaluators.
pub fn brute_force_optimum(inst: &Instance) -> Time {
    struct Walk<'a> {
        m: usize,
        mach: &'a [usize],
        dur: &'a [Time],
        next: Vec<usize>,
        job_ready: Vec<Time>,
        free: Vec<Time>,
        best: Time,
    }
    impl Walk<'_> {
        fn go(&mut self, left: usize, cmax: Time) {
            if left == 0 {
                self.best = self.best.min(cmax);
                return;
            }
            for j in 0..self.next.len() {
                let pos = self.next[j];
                if pos == self.m {
                    continue;
                }
                let idx = j * self.m + pos;
                let k = self.mach[idx];
                let (jr, fr) = (self.job_ready[j], self.free[k]);
                let end = jr.max(fr) + self.dur[idx];
                self.next[j] += 1;
                self.job_ready[j] = end;
                self.free[k] = end;
                self.go(left - 1, cmax.max(end));
                self.next[j] -= 1;
                self.job_ready[j] = jr;
                self.free[k] = fr;
            }
        }
    }
    let mut w = Walk {
        m: inst.n_machines(),
        mach: inst.machines(),
        dur: inst.durations(),
        next: vec![0; inst.n_jobs()],
        job_ready: vec![0; inst.n_jobs()],
        free: vec![0; inst.n_machines()],
        best: Time::MAX,
    };
    w.go(inst.n_ops(), 0);
    w.best
}

/// A uniformly drawn job-order-respecting sequence of flat indices.
pub fn random_sequence(inst: &Instance, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let m = inst.n_machines();
    let mut next = vec![0usize; inst.n_jobs()];
    let mut order = Vec::with_capacity(inst.n_ops());
    while order.len() < inst.n_ops() {
        let open: Vec<usize> = (0..inst.n_jobs()).filter(|&j| next[j] < m).collect();
        let j = open[rng.gen_range(0..open.len())];
        order.push(j * m + next[j]);
        next[j] += 1;
    }
    order
}

/// Acyclic disjunctive graph of a random sequence.
pub fn random_graph(inst: &Instance, rng: &mut ChaCha8Rng) -> DisjunctiveGraph {
    let order = random_sequence(inst, rng);
    let s = jobshop::schedule_from_order(inst, &order).unwrap();
    DisjunctiveGraph::build(inst, &s.machine_orders(inst)).unwrap()
}

/// Small random instance with at most `max_ops` operations.
pub fn small_instance(seed: u64, max_ops: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    loop {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        if n * m <= max_ops && n * m >= 2 {
            return Instance::random(n, m, seed, 1, 20).unwrap();
        }
    }
}
