use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::instance::Time;

/// Single machine sequencing with release dates, minimising maximum lateness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneMachineProblem {
    pub release: Vec<Time>,
    pub processing: Vec<Time>,
    pub due: Vec<Time>,
}

impl OneMachineProblem {
    pub fn len(&self) -> usize {
        self.release.len()
    }

    pub fn is_empty(&self) -> bool {
        self.release.is_empty()
    }

    /// Maximum lateness of `sequence` with every job started as early as possible.
    pub fn lateness(&self, sequence: &[usize]) -> Time {
        let mut t = Time::MIN;
        let mut worst = Time::MIN;
        for &j in sequence {
            t = t.max(self.release[j]) + self.processing[j];
            worst = worst.max(t - self.due[j]);
        }
        worst
    }
}

/// Exact optimum by depth-first branch and bound over active schedules,
/// seeded with the Schrage schedule and bounded by preemptive EDD.
/// Among equal optima the first found in job index order is kept.
pub fn solve_one_machine_lmax(problem: &OneMachineProblem) -> (Vec<usize>, Time) {
    let preds = vec![Vec::new(); problem.len()];
    solve_with_precedences(problem, &preds, None)
}

/// As [`solve_one_machine_lmax`], additionally requiring every job in
/// `preds[j]` to precede `j`. With a node limit the best sequence found so
/// far is returned once it is reached.
pub(crate) fn solve_with_precedences(
    problem: &OneMachineProblem,
    preds: &[Vec<usize>],
    node_limit: Option<usize>,
) -> (Vec<usize>, Time) {
    assert_eq!(problem.processing.len(), problem.len());
    assert_eq!(problem.due.len(), problem.len());
    let (seq, value) = schrage(problem, preds);
    let mut search = Search {
        p: problem,
        preds,
        best: value,
        best_seq: seq,
        seq: Vec::with_capacity(problem.len()),
        placed: vec![false; problem.len()],
        nodes: 0,
        limit: node_limit.unwrap_or(usize::MAX),
    };
    search.visit(Time::MIN, Time::MIN);
    (search.best_seq, search.best)
}

/// Non-delay list schedule: whenever the machine frees, the released
/// eligible job with the earliest due date runs next.
fn schrage(p: &OneMachineProblem, preds: &[Vec<usize>]) -> (Vec<usize>, Time) {
    let n = p.len();
    let mut placed = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    let mut t = Time::MIN;
    while seq.len() < n {
        let ready: Vec<usize> = (0..n)
            .filter(|&j| !placed[j] && preds[j].iter().all(|&q| placed[q]))
            .collect();
        let earliest = ready.iter().map(|&j| p.release[j]).min().expect("precedences are acyclic");
        t = t.max(earliest);
        let j = ready
            .into_iter()
            .filter(|&j| p.release[j] <= t)
            .min_by_key(|&j| (p.due[j], j))
            .expect("a job is released at time t");
        placed[j] = true;
        seq.push(j);
        t += p.processing[j];
    }
    let value = p.lateness(&seq);
    (seq, value)
}

struct Search<'a> {
    p: &'a OneMachineProblem,
    preds: &'a [Vec<usize>],
    best: Time,
    best_seq: Vec<usize>,
    seq: Vec<usize>,
    placed: Vec<bool>,
    nodes: usize,
    limit: usize,
}

impl Search<'_> {
    fn visit(&mut self, t: Time, lateness: Time) {
        let n = self.p.len();
        if self.seq.len() == n {
            if lateness < self.best {
                self.best = lateness;
                self.best_seq.clone_from(&self.seq);
            }
            return;
        }
        self.nodes += 1;
        if self.nodes > self.limit || lateness.max(self.preemptive_bound(t)) >= self.best {
            return;
        }
        let eligible: Vec<usize> = (0..n)
            .filter(|&j| !self.placed[j] && self.preds[j].iter().all(|&q| self.placed[q]))
            .collect();
        let start = |j: usize| t.max(self.p.release[j]);
        let (first, ect) = eligible
            .iter()
            .map(|&j| (j, start(j) + self.p.processing[j]))
            .min_by_key(|&(j, c)| (c, j))
            .expect("precedences are acyclic");
        for j in eligible {
            // Starting at or after the earliest completion leaves room for
            // that job first without delaying anything: not active.
            if j != first && start(j) >= ect {
                continue;
            }
            let c = start(j) + self.p.processing[j];
            self.placed[j] = true;
            self.seq.push(j);
            self.visit(c, lateness.max(c - self.p.due[j]));
            self.seq.pop();
            self.placed[j] = false;
        }
    }

    /// Preemptive EDD lateness of the unplaced jobs from time `t`.
    fn preemptive_bound(&self, t: Time) -> Time {
        let mut jobs: Vec<(Time, usize)> = (0..self.p.len())
            .filter(|&j| !self.placed[j])
            .map(|j| (t.max(self.p.release[j]), j))
            .collect();
        jobs.sort_unstable();
        let mut heap: BinaryHeap<Reverse<(Time, Time)>> = BinaryHeap::new();
        let mut now = Time::MIN;
        let mut worst = Time::MIN;
        let mut next = 0;
        while next < jobs.len() || !heap.is_empty() {
            if heap.is_empty() {
                now = now.max(jobs[next].0);
            }
            while next < jobs.len() && jobs[next].0 <= now {
                let j = jobs[next].1;
                heap.push(Reverse((self.p.due[j], self.p.processing[j])));
                next += 1;
            }
            let Reverse((due, left)) = heap.pop().expect("a job is available");
            let horizon = jobs.get(next).map_or(Time::MAX, |r| r.0);
            let run = left.min(horizon - now);
            now += run;
            if run == left {
                worst = worst.max(now - due);
            } else {
                heap.push(Reverse((due, left - run)));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(p: &OneMachineProblem) -> Time {
        fn rec(p: &OneMachineProblem, seq: &mut Vec<usize>, best: &mut Time) {
            if seq.len() == p.len() {
                *best = (*best).min(p.lateness(seq));
                return;
            }
            for j in 0..p.len() {
                if !seq.contains(&j) {
                    seq.push(j);
                    rec(p, seq, best);
                    seq.pop();
                }
            }
        }
        let mut best = Time::MAX;
        rec(p, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn two_jobs() {
        let p = OneMachineProblem {
            release: vec![0, 1],
            processing: vec![3, 2],
            due: vec![7, 4],
        };
        assert_eq!(solve_one_machine_lmax(&p), (vec![1, 0], -1));
    }

    #[test]
    fn single_job() {
        let p = OneMachineProblem {
            release: vec![2],
            processing: vec![3],
            due: vec![5],
        };
        assert_eq!(solve_one_machine_lmax(&p), (vec![0], 0));
    }

    #[test]
    fn common_release_gives_edd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut due: Vec<Time> = (0..5).map(|_| rng.gen_range(0..40)).collect();
            due.sort();
            let p = OneMachineProblem {
                release: vec![0; 5],
                processing: (0..5).map(|_| rng.gen_range(1..10)).collect(),
                due,
            };
            let (_, value) = solve_one_machine_lmax(&p);
            assert_eq!(value, p.lateness(&[0, 1, 2, 3, 4]));
        }
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=7);
            let p = OneMachineProblem {
                release: (0..n).map(|_| rng.gen_range(0..30)).collect(),
                processing: (0..n).map(|_| rng.gen_range(1..12)).collect(),
                due: (0..n).map(|_| rng.gen_range(0..60)).collect(),
            };
            let (seq, value) = solve_one_machine_lmax(&p);
            assert_eq!(p.lateness(&seq), value);
            assert_eq!(value, brute(&p), "{p:?}");
        }
    }

    #[test]
    fn precedences_are_respected() {
        let p = OneMachineProblem {
            release: vec![0, 0, 0],
            processing: vec![2, 2, 2],
            due: vec![10, 2, 4],
        };
        let preds = vec![vec![], vec![0], vec![]];
        let (seq, value) = solve_with_precedences(&p, &preds, None);
        assert_eq!((seq, value), (vec![0, 1, 2], 2));
        assert_eq!(solve_one_machine_lmax(&p).1, 0);
    }
}
