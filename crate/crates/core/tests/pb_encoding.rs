mod common;

use common::{example1, example2, random_workflow, Shape};
use proptest::prelude::*;
use wsp_core::oracle::{brute_force_pb_satisfiable, brute_force_solve, DEFAULT_PLAN_CAP};
use wsp_core::pb::{encode, parse_opb, PbDocument, PbVar};
use wsp_core::{EquivalenceHierarchy, Plan, StepId, UserId, Workflow};

const MAX_PB_VARS: usize = 20;

fn pb_shape() -> Shape {
    Shape { k: (2, 4), n: (3, 6), depth: (1, 2), max_constraints: 5, density: 0.35 }
}

/// Minimal OPB grammar: header, comment lines, then
/// `(+c|-c) xI ... (>=|=) rhs ;` lines.
fn check_grammar(text: &str, doc: &PbDocument) {
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        format!("* #variable= {} #constraint= {}", doc.num_vars(), doc.num_constraints())
    );
    let mut body = 0;
    for line in lines {
        if line.starts_with('*') {
            assert!(line.starts_with("* map x"), "{line}");
            continue;
        }
        body += 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(*tokens.last().unwrap(), ";", "{line}");
        let rel = tokens.len() - 3;
        assert!(tokens[rel] == ">=" || tokens[rel] == "=", "{line}");
        tokens[rel + 1].parse::<i64>().unwrap();
        assert!(rel.is_multiple_of(2) && rel > 0, "{line}");
        for pair in tokens[..rel].chunks(2) {
            assert!(pair[0].starts_with('+') || pair[0].starts_with('-'), "{line}");
            pair[0][1..].parse::<u64>().unwrap();
            let var: usize = pair[1].strip_prefix('x').unwrap().parse().unwrap();
            assert!((1..=doc.num_vars()).contains(&var), "{line}");
        }
    }
    assert_eq!(body, doc.num_constraints());
}

fn check_equisatisfiable(w: &Workflow) -> Option<bool> {
    let doc = encode(w).unwrap();
    let text = doc.to_opb();
    check_grammar(&text, &doc);
    let (vars, parsed) = parse_opb(&text).unwrap();
    assert_eq!(vars, doc.num_vars());
    assert_eq!(parsed, doc.constraints());

    let oracle = brute_force_solve(w, DEFAULT_PLAN_CAP).unwrap();
    match &oracle.witness {
        Some(plan) => {
            let model = doc.assignment_for_plan(w, plan);
            assert!(doc.is_satisfied_by(&model), "witness {plan} does not satisfy the encoding");
            assert_eq!(&doc.decode(w.num_steps(), &model).unwrap(), plan);
            Some(true)
        }
        None if doc.num_vars() <= MAX_PB_VARS => {
            assert!(brute_force_pb_satisfiable(&doc, MAX_PB_VARS).unwrap().is_none());
            Some(false)
        }
        None => None,
    }
}

#[test]
fn encoding_is_equisatisfiable_on_seeded_instances() {
    let mut checked = 0;
    let mut unsat = 0;
    for seed in 0..400 {
        let w = random_workflow(40_000 + seed, &pb_shape());
        if let Some(sat) = check_equisatisfiable(&w) {
            checked += 1;
            unsat += !sat as usize;
        }
    }
    assert!(checked >= 200, "{checked}");
    assert!(unsat >= 20, "{unsat}");
}

/// Any satisfying PB model, not only characteristic ones, decodes to a valid plan.
#[test]
fn every_model_decodes_to_a_valid_plan() {
    let mut decoded = 0;
    for seed in 0..300 {
        let w = random_workflow(60_000 + seed, &pb_shape());
        let doc = encode(&w).unwrap();
        if doc.num_vars() > 16 {
            continue;
        }
        for bits in 0u64..(1 << doc.num_vars()) {
            let model: Vec<bool> = (0..doc.num_vars()).map(|i| bits >> i & 1 == 1).collect();
            if doc.is_satisfied_by(&model) {
                let plan = doc.decode(w.num_steps(), &model).unwrap();
                assert!(w.is_valid(&plan).unwrap(), "{plan}");
                decoded += 1;
            }
        }
    }
    assert!(decoded > 100);
}

#[test]
fn example_encodings() {
    let w1 = example1();
    let doc = encode(&w1).unwrap();
    assert_eq!(doc.num_vars(), 2 + 2 + 3 + 3);
    assert_eq!(check_equisatisfiable(&w1), Some(true));

    let w2 = example2();
    let doc = encode(&w2).unwrap();
    let pi2 = Plan::from_one_based(&[1, 1, 4, 5]);
    let model = doc.assignment_for_plan(&w2, &pi2);
    assert!(doc.is_satisfied_by(&model));
    assert_eq!(doc.decode(4, &model).unwrap(), pi2);
    assert!(doc.decode(4, &vec![false; doc.num_vars()]).is_err());
}

#[test]
fn single_user_steps_are_forced() {
    let auth = vec![vec![StepId(0), StepId(1)], vec![StepId(1)]];
    let w = Workflow::new(2, auth, vec![], EquivalenceHierarchy::flat(2)).unwrap();
    let doc = encode(&w).unwrap();
    let only = doc
        .vars()
        .iter()
        .position(|v| *v == PbVar::Assign { step: StepId(0), user: UserId(0) })
        .unwrap();
    let mut models = 0;
    for bits in 0u64..(1 << doc.num_vars()) {
        let model: Vec<bool> = (0..doc.num_vars()).map(|i| bits >> i & 1 == 1).collect();
        if doc.is_satisfied_by(&model) {
            assert!(model[only]);
            models += 1;
        }
    }
    assert_eq!(models, 2);
}

#[test]
fn deep_hierarchies_are_unsupported() {
    let w = random_workflow(1, &Shape { k: (3, 3), n: (6, 6), depth: (3, 3), max_constraints: 0, density: 0.5 });
    assert!(encode(&w).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_plans_round_trip(seed in any::<u64>()) {
        let w = random_workflow(seed, &pb_shape());
        let doc = encode(&w).unwrap();
        for plan in common::all_plans(&w).iter().filter(|p| w.is_valid(p).unwrap()) {
            let model = doc.assignment_for_plan(&w, plan);
            prop_assert!(doc.is_satisfied_by(&model));
            prop_assert_eq!(&doc.decode(w.num_steps(), &model).unwrap(), plan);
        }
    }
}
