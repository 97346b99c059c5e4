mod common;

use std::collections::HashSet;

use common::{random_workflow, Shape};
use proptest::prelude::*;
use wsp_core::generator::{class_size_histogram, generate, GenParams};
use wsp_core::io::{parse_instance, write_instance};
use wsp_core::ConstraintKind;

fn params() -> impl Strategy<Value = GenParams> {
    (6usize..16, any::<u64>(), 0usize..10, 0usize..6, 0usize..3, 0usize..10).prop_map(
        |(k, seed, ne, am, sc, dc)| {
            let mut p = GenParams::new(k, seed);
            p.not_equals = ne;
            p.at_most = am;
            p.same_class = sc;
            p.different_class = dc;
            p
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_well_formed(p in params()) {
        let w = generate(&p).unwrap();
        prop_assert_eq!(w.num_users(), 10 * p.k);
        prop_assert_eq!(w.depth(), 2);
        let sizes = class_size_histogram(&w);
        prop_assert_eq!(sizes.iter().sum::<usize>(), w.num_users());
        prop_assert!(sizes.iter().all(|s| (3..=7).contains(s)));

        let mut not_equals = HashSet::new();
        let mut same = HashSet::new();
        let mut different = HashSet::new();
        let mut at_most = HashSet::new();
        for c in w.constraints() {
            let key = c.scope_set();
            match c.kind() {
                ConstraintKind::NotEquals => prop_assert!(not_equals.insert(key)),
                ConstraintKind::SameClass { level } => {
                    prop_assert_eq!(level, 1);
                    prop_assert!(same.insert(key));
                }
                ConstraintKind::DifferentClass { level } => {
                    prop_assert_eq!(level, 1);
                    prop_assert!(different.insert(key));
                }
                ConstraintKind::AtMost { limit } => {
                    prop_assert_eq!((limit, key.len()), (3, 5));
                    prop_assert!(at_most.insert(key));
                }
                ConstraintKind::Equals => prop_assert!(false, "generator never emits equals"),
            }
        }
        prop_assert!(same.is_disjoint(&different));
        prop_assert_eq!(
            (not_equals.len(), at_most.len(), same.len(), different.len()),
            (p.not_equals, p.at_most, p.same_class, p.different_class)
        );
        for s in w.steps() {
            prop_assert!(w.users().any(|u| w.is_user_authorized(u, s)));
        }
        let text = write_instance(&w);
        prop_assert_eq!(&parse_instance(&text).unwrap(), &w);
        prop_assert_eq!(write_instance(&generate(&p).unwrap()), text);
    }

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let w = random_workflow(seed, &Shape::small());
        let text = write_instance(&w);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(write_instance(&back), text);
    }
}

#[test]
fn labels() {
    assert_eq!(GenParams::new(5, 0).label(), "0.0.0.0");
    let mut p = GenParams::new(30, 0);
    p.not_equals = 30;
    p.at_most = 50;
    p.same_class = 2;
    p.different_class = 40;
    assert_eq!(p.label(), "30.50.2.40");
}

#[test]
fn exhausted_pairs_leave_no_room_for_different_class() {
    let mut p = GenParams::new(6, 4);
    p.same_class = 15;
    assert!(generate(&p).is_ok());
    p.different_class = 1;
    assert!(generate(&p).is_err());
}
