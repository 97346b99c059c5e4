mod common;

use common::{all_plans, pair_relation, random_constraint, random_workflow, rng, Shape};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use wsp_core::{ClassIndependent, JointPattern, LevelPattern, Plan, StepSet, UserId, Workflow};

fn random_plan(seed: u64, w: &Workflow) -> Plan {
    let mut r = rng(seed);
    Plan::new((0..w.num_steps()).map(|_| UserId(r.gen_range(0..w.num_users()))).collect())
}

/// Injective relabelling of every nonzero label.
fn relabel(labels: &[u32], seed: u64) -> Vec<u32> {
    let mut r = rng(seed);
    let mut targets: Vec<u32> = (1..=64).collect();
    targets.shuffle(&mut r);
    labels.iter().map(|&x| if x == 0 { 0 } else { targets[x as usize - 1] }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coarser_levels_follow_finer_ones(seed in any::<u64>()) {
        let w = random_workflow(seed, &Shape::small());
        let plan = random_plan(seed, &w);
        let rel = pair_relation(&w, &plan);
        for fine in 1..w.depth() {
            for coarse in 0..fine {
                for (f, c) in rel[fine].iter().zip(&rel[coarse]) {
                    prop_assert!(!f || *c);
                }
            }
        }
        prop_assert!(JointPattern::of_plan(&w, &plan).unwrap().is_consistent());
    }

    #[test]
    fn validity_is_authorization_and_eligibility(seed in any::<u64>()) {
        let w = random_workflow(seed, &Shape::small());
        let plan = random_plan(seed ^ 7, &w);
        prop_assert_eq!(
            w.is_valid(&plan).unwrap(),
            w.is_authorized(&plan).unwrap() && w.is_eligible(&plan).unwrap()
        );
    }

    #[test]
    fn relabelling_preserves_pattern_eligibility(seed in any::<u64>()) {
        let w = random_workflow(seed, &Shape::small());
        let plan = random_plan(seed, &w);
        let jp = JointPattern::of_plan(&w, &plan).unwrap();
        let mut r = rng(seed);
        let mask = StepSet(r.gen::<u64>());
        for c in w.constraints() {
            let q = c.level(w.depth());
            let partial = jp.level(q).restrict(mask);
            let moved = relabel(partial.labels(), seed);
            prop_assert_eq!(c.pattern_eligible(partial.labels()), c.pattern_eligible(&moved));
        }
    }

    #[test]
    fn violated_partial_patterns_have_no_eligible_completion(seed in any::<u64>()) {
        let w = random_workflow(seed, &Shape::small());
        let plan = random_plan(seed, &w);
        let jp = JointPattern::of_plan(&w, &plan).unwrap();
        let mask = StepSet(rng(seed ^ 3).gen::<u64>());
        for c in w.constraints() {
            let q = c.level(w.depth());
            if !c.pattern_eligible(jp.level(q).restrict(mask).labels()) {
                prop_assert!(!c.satisfied_by(&plan, w.hierarchy()).unwrap());
            }
        }
    }

    #[test]
    fn canonical_form_is_idempotent_and_relabelling_invariant(seed in any::<u64>(), k in 1usize..10) {
        let mut r = rng(seed);
        let labels: Vec<u32> = (0..k).map(|_| r.gen_range(0..6)).collect();
        let lp = LevelPattern::new(labels.clone());
        let canon = lp.canonicalize();
        prop_assert_eq!(canon.canonicalize(), canon.clone());
        prop_assert_eq!(LevelPattern::new(relabel(&labels, seed)).canonicalize(), canon);
    }

    #[test]
    fn constraint_kinds_are_relabelling_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(2..8);
        let c = random_constraint(&mut r, k, 2);
        let labels: Vec<u32> = (0..k).map(|_| r.gen_range(0..5)).collect();
        prop_assert_eq!(c.pattern_eligible(&labels), c.pattern_eligible(&relabel(&labels, seed)));
    }
}

/// Exhaustive check on tiny instances: a plan is eligible iff its joint
/// pattern is, and two plans share a canonical joint pattern iff they put
/// the same step pairs together at every level.
#[test]
fn plans_and_patterns_agree_exhaustively() {
    let shape = Shape { k: (2, 4), n: (3, 6), depth: (1, 3), max_constraints: 5, density: 0.5 };
    for seed in 0..60 {
        let w = random_workflow(20_000 + seed, &shape);
        let plans = all_plans(&w);
        let sample: Vec<&Plan> = plans.iter().step_by(1 + plans.len() / 40).collect();
        let mut patterns = Vec::new();
        for plan in &plans {
            let jp = JointPattern::of_plan(&w, plan).unwrap();
            assert!(jp.is_consistent());
            let pattern_eligible = w.constraints().iter().all(|c| {
                let q = c.level(w.depth());
                c.pattern_eligible(jp.level(q).labels())
            });
            assert_eq!(pattern_eligible, w.is_eligible(plan).unwrap(), "{plan} on {w:?}");
            for c in w.constraints() {
                let q = c.level(w.depth());
                assert_eq!(c.pattern_eligible(jp.level(q).labels()), c.satisfied_by(plan, w.hierarchy()).unwrap());
            }
            patterns.push(jp);
        }
        for a in &sample {
            let pa = JointPattern::of_plan(&w, a).unwrap();
            let ra = pair_relation(&w, a);
            for (b, pb) in plans.iter().zip(&patterns) {
                assert_eq!(pa == *pb, ra == pair_relation(&w, b));
            }
        }
    }
}

#[test]
fn single_step_patterns() {
    let w = random_workflow(3, &Shape { k: (1, 1), n: (2, 5), depth: (3, 3), max_constraints: 0, density: 1.0 });
    let jp = JointPattern::of_plan(&w, &Plan::new(vec![UserId(1)])).unwrap();
    for q in 1..=3 {
        assert_eq!(jp.level(q).labels(), &[1]);
    }
}
