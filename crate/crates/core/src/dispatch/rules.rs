use std::fmt;
use std::str::FromStr;

use crate::instance::{schedule_from_order, Instance, Schedule, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Most work remaining in the job, current operation included.
    Mwr,
    /// Most operations remaining in the job, current operation included.
    Mor,
    /// Shortest processing time.
    Spt,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Mwr, Rule::Mor, Rule::Spt];

    /// Priority of the ready operation `idx`; larger is dispatched first.
    fn priority(self, inst: &Instance, idx: usize) -> Time {
        match self {
            Rule::Mwr => inst.durations()[idx] + inst.job_tail_work(idx),
            Rule::Mor => (inst.n_machines() - inst.op(idx).position) as Time,
            Rule::Spt => -inst.durations()[idx],
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Mwr => "MWR",
            Rule::Mor => "MOR",
            Rule::Spt => "SPT",
        })
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MWR" => Ok(Rule::Mwr),
            "MOR" => Ok(Rule::Mor),
            "SPT" => Ok(Rule::Spt),
            other => Err(format!("unknown rule {other:?}, expected MWR, MOR or SPT")),
        }
    }
}

/// Which ready operations a rule may choose from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Candidates {
    /// Every operation whose job predecessor is scheduled.
    All,
    /// Ready operations that could start before every other ready operation
    /// on their machine completes; an operation that can only start after
    /// some competitor would already be finished is passed over.
    #[default]
    NonDominated,
}

/// Operation order built by repeatedly appending the best candidate, each
/// operation starting as early as its machine and job allow. Ties go to the
/// lowest job.
pub fn dispatch_order(inst: &Instance, rule: Rule) -> Vec<usize> {
    dispatch_order_with(inst, rule, Candidates::default())
}

pub fn dispatch_order_with(inst: &Instance, rule: Rule, candidates: Candidates) -> Vec<usize> {
    let m = inst.n_machines();
    let p = inst.durations();
    let mut next = vec![0usize; inst.n_jobs()];
    let mut job_ready = vec![0 as Time; inst.n_jobs()];
    let mut machine_free = vec![0 as Time; m];
    let mut min_end = vec![Time::MAX; m];
    let mut order = Vec::with_capacity(inst.n_ops());
    while order.len() < inst.n_ops() {
        let ready = || {
            next.iter()
                .enumerate()
                .filter(|&(_, &pos)| pos < m)
                .map(|(job, &pos)| job * m + pos)
        };
        let start = |idx: usize| job_ready[idx / m].max(machine_free[inst.machines()[idx]]);
        if candidates == Candidates::NonDominated {
            min_end.fill(Time::MAX);
            for idx in ready() {
                let mach = inst.machines()[idx];
                min_end[mach] = min_end[mach].min(start(idx) + p[idx]);
            }
        }
        let mut best: Option<(Time, usize)> = None;
        for idx in ready() {
            if start(idx) >= min_end[inst.machines()[idx]] {
                continue;
            }
            let pr = rule.priority(inst, idx);
            if best.is_none_or(|(bp, _)| pr > bp) {
                best = Some((pr, idx));
            }
        }
        let (_, idx) = best.expect("the earliest finishing ready operation is a candidate");
        let end = start(idx) + p[idx];
        job_ready[idx / m] = end;
        machine_free[inst.machines()[idx]] = end;
        next[idx / m] += 1;
        order.push(idx);
    }
    order
}

/// Semi-active schedule of the rule's dispatch order.
pub fn dispatch(inst: &Instance, rule: Rule) -> Schedule {
    dispatch_with(inst, rule, Candidates::default())
}

pub fn dispatch_with(inst: &Instance, rule: Rule, candidates: Candidates) -> Schedule {
    schedule_from_order(inst, &dispatch_order_with(inst, rule, candidates))
        .expect("dispatch orders are complete and job-ordered")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_schedule;

    fn t1() -> Instance {
        Instance::parse("2 2\n0 3 1 2\n1 2 0 4").unwrap()
    }

    #[test]
    fn t1_first_pick_and_makespan() {
        let inst = t1();
        for rule in [Rule::Spt, Rule::Mwr] {
            assert_eq!(dispatch_order(&inst, rule)[0], 2, "{rule}");
            assert_eq!(dispatch(&inst, rule).makespan(), 7, "{rule}");
        }
        // Equal counts: the lowest job goes first.
        assert_eq!(dispatch_order(&inst, Rule::Mor)[0], 0);
    }

    #[test]
    fn candidate_filter_on_t1_changes_nothing() {
        let inst = t1();
        for rule in Rule::ALL {
            assert_eq!(
                dispatch_order_with(&inst, rule, Candidates::All),
                dispatch_order_with(&inst, rule, Candidates::NonDominated)
            );
        }
    }

    #[test]
    fn dominated_operation_is_skipped() {
        // After O0.0 runs on m1 (0..2), O0.1 could start on m0 at 2, but
        // O1.0 would already be done there by 1.
        let inst = Instance::parse("2 2\n1 2 0 20\n0 1 1 1").unwrap();
        assert_eq!(dispatch_order_with(&inst, Rule::Mwr, Candidates::All), vec![0, 1, 2, 3]);
        assert_eq!(dispatch_order_with(&inst, Rule::Mwr, Candidates::NonDominated), vec![0, 2, 1, 3]);
    }

    #[test]
    fn bundled_instances_match_reference_dispatcher() {
        // Makespans from an independent dispatcher implementation.
        let expect = [
            ("ft10", [1684, 1178, 1219]),
            ("la16", [1820, 1360, 1089]),
            ("abz5", [2379, 1451, 1429]),
            ("orb03", [1865, 1353, 1513]),
        ];
        let insts = crate::bench::bundled_instances();
        for (name, [spt, mwr, mor]) in expect {
            let inst = insts.iter().find(|i| i.name() == name).unwrap();
            let got = [Rule::Spt, Rule::Mwr, Rule::Mor].map(|r| dispatch(inst, r).makespan());
            assert_eq!(got, [spt, mwr, mor], "{name}");
        }
    }

    #[test]
    fn single_job_is_rule_independent() {
        let inst = Instance::parse("1 3\n2 4 0 1 1 6").unwrap();
        let base = dispatch(&inst, Rule::Mwr);
        for rule in Rule::ALL {
            assert_eq!(dispatch(&inst, rule), base);
        }
    }

    #[test]
    fn random_instances_are_feasible() {
        for seed in 0..20 {
            let inst = Instance::random(5, 4, seed, 1, 20).unwrap();
            for rule in Rule::ALL {
                validate_schedule(&inst, &dispatch(&inst, rule)).unwrap();
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for rule in Rule::ALL {
            assert_eq!(rule.to_string().to_lowercase().parse::<Rule>(), Ok(rule));
        }
        assert!("edd".parse::<Rule>().is_err());
    }
}
