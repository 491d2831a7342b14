mod common;

use std::collections::BTreeMap;

use jobshop::dd::{
    compile_relaxed, compile_restricted, full_expansion, DdState, MergeMode, Model, RelaxedConfig, RestrictedConfig,
};
use jobshop::dispatch::{shifting_bottleneck, solve_one_machine_lmax, OneMachineProblem};
use jobshop::export::MipModel;
use jobshop::{
    cost_from_partial, lns1_refine, schedule_from_order, validate_schedule, Instance, Lns1Config, OpOrder, Time,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=5, 1usize..=5, any::<u64>()).prop_map(|(n, m, seed)| Instance::random(n, m, seed, 1, 30).unwrap())
}

fn walk(inst: &Instance, model: Model, depth: usize, rng: &mut ChaCha8Rng) -> DdState {
    let mut s = DdState::root(inst, model);
    for _ in 0..depth {
        let opts: Vec<usize> = s.eligible(inst).collect();
        let x = opts[rng.gen_range(0..opts.len())];
        s = s.transition(inst, x).unwrap().0;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsplib_text_round_trips(inst in instance()) {
        let back = Instance::parse(&inst.to_jsplib()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn sequences_give_feasible_semi_active_schedules(inst in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = common::random_sequence(&inst, &mut rng);
        let s = schedule_from_order(&inst, &order).unwrap();
        prop_assert!(validate_schedule(&inst, &s).is_ok());
        let partial = cost_from_partial(&inst, &OpOrder::from_indices(&inst, &order).unwrap(), None, &BTreeMap::new()).unwrap();
        prop_assert_eq!(partial.makespan, s.makespan());
        let longest_job = (0..inst.n_jobs())
            .map(|j| (0..inst.n_machines()).map(|k| inst.durations()[j * inst.n_machines() + k]).sum::<Time>())
            .max()
            .unwrap();
        prop_assert!(s.makespan() >= longest_job);
    }

    #[test]
    fn reversing_any_critical_machine_arc_keeps_the_graph_acyclic(inst in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&inst, &mut rng);
        let path = g.longest_path().unwrap();
        prop_assert_eq!(path.length, g.to_schedule().unwrap().makespan());
        for &a in path.arcs.iter().filter(|&&a| !g.arcs()[a].fixed) {
            let r = g.reverse_critical_arc(&path, a).unwrap();
            prop_assert!(r.is_acyclic());
            prop_assert!(validate_schedule(&inst, &r.to_schedule().unwrap()).is_ok());
        }
    }

    #[test]
    fn refinement_never_worsens(inst in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&inst, &mut rng);
        let before = g.longest_path().unwrap().length;
        let out = lns1_refine(&g, Lns1Config { budget: 500, ..Lns1Config::default() }).unwrap();
        prop_assert!(out.makespan <= before);
        let s = out.graph.to_schedule().unwrap();
        prop_assert!(validate_schedule(&inst, &s).is_ok());
        prop_assert_eq!(s.makespan(), out.makespan);
    }

    #[test]
    fn merge_is_commutative_and_associative(inst in instance(), seed in any::<u64>(), m2 in any::<bool>(), max in any::<bool>()) {
        let model = if m2 { Model::M2 } else { Model::M1 };
        let mode = if max { MergeMode::Max } else { MergeMode::Min };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.gen_range(0..=inst.n_ops());
        let [a, b, c] = [0, 1, 2].map(|_| walk(&inst, model, depth, &mut rng));
        let ab = a.merge(&b, mode).unwrap();
        prop_assert_eq!(ab.key(), b.merge(&a, mode).unwrap().key());
        let left = ab.merge(&c, mode).unwrap();
        let right = a.merge(&b.merge(&c, mode).unwrap(), mode).unwrap();
        prop_assert_eq!(left.key(), right.key());
        prop_assert_eq!(a.merge(&a, mode).unwrap().key(), a.key());
        if mode == MergeMode::Min {
            prop_assert!(ab.cost() <= a.cost().min(b.cost()));
        }
    }

    #[test]
    fn diagrams_bracket_the_optimum(inst in (1usize..=3, 1usize..=3, any::<u64>()).prop_map(|(n, m, s)| Instance::random(n, m, s, 1, 30).unwrap()), width in 1usize..6) {
        let opt = common::brute_force_optimum(&inst);
        for model in [Model::M1, Model::M2] {
            prop_assert_eq!(full_expansion(&inst, model, 1 << 22).unwrap().optimum, opt);
            let r = compile_restricted(&inst, &RestrictedConfig { model, width, ..RestrictedConfig::default() }).unwrap();
            prop_assert!(r.best_makespan >= opt);
            let x = compile_relaxed(&inst, &RelaxedConfig { model, width, merge_mode: MergeMode::Min, primal_bound: None }).unwrap();
            prop_assert!(x.bound.unwrap() <= opt);
            if x.exact {
                prop_assert_eq!(x.bound.unwrap(), opt);
            }
        }
    }

    #[test]
    fn one_machine_solver_beats_every_sequence(
        jobs in prop::collection::vec((0i64..30, 1i64..10, 0i64..60), 1..=6),
        perm_seed in any::<u64>(),
    ) {
        let p = OneMachineProblem {
            release: jobs.iter().map(|j| j.0).collect(),
            processing: jobs.iter().map(|j| j.1).collect(),
            due: jobs.iter().map(|j| j.2).collect(),
        };
        let (seq, v) = solve_one_machine_lmax(&p);
        let mut sorted = seq.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..p.len()).collect::<Vec<_>>());
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        let mut perm: Vec<usize> = (0..p.len()).collect();
        for _ in 0..20 {
            perm.sort_by_key(|_| rng.gen::<u32>());
            prop_assert!(p.lateness(&perm) >= v);
        }
    }

    #[test]
    fn binary_count_follows_machine_loads(inst in instance()) {
        let model = MipModel::build(&inst);
        let expect: usize = (0..inst.n_machines()).map(|k| { let c = inst.machine_ops(k).len(); c * (c - 1) / 2 }).sum();
        prop_assert_eq!(model.binaries.len(), expect);
        prop_assert_eq!(model.big_m, 1 + inst.total_duration());
        prop_assert_eq!(jobshop::export::export_disjunctive_lp(&inst), model.to_lp());
    }
}

#[test]
fn model_two_never_stores_more_states() {
    for seed in 0..30 {
        let inst = Instance::random(3, 3, seed, 1, 20).unwrap();
        let m1 = full_expansion(&inst, Model::M1, 1 << 22).unwrap();
        let m2 = full_expansion(&inst, Model::M2, 1 << 22).unwrap();
        assert!(m2.valid_nodes <= m1.valid_nodes, "seed {seed}");
    }
}

#[test]
fn readjustment_helps_shifting_bottleneck_on_average() {
    let (mut plain, mut re) = (0, 0);
    for seed in 0..20 {
        let inst = Instance::random(10, 10, seed, 1, 99).unwrap();
        let a = shifting_bottleneck(&inst, false);
        let b = shifting_bottleneck(&inst, true);
        validate_schedule(&inst, &a).unwrap();
        validate_schedule(&inst, &b).unwrap();
        plain += a.makespan();
        re += b.makespan();
    }
    assert!(re <= plain, "with readjustment {re}, without {plain}");
}
