#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wsp_core::{Constraint, ConstraintKind, EquivalenceHierarchy, StepId, UserId, Workflow};

pub struct Shape {
    pub k: (usize, usize),
    pub n: (usize, usize),
    pub depth: (usize, usize),
    pub max_constraints: usize,
    /// Probability that a user is authorized for a given step.
    pub density: f64,
}

impl Shape {
    pub fn small() -> Self {
        Shape { k: (2, 6), n: (3, 12), depth: (1, 3), max_constraints: 6, density: 0.45 }
    }

    pub fn tiny() -> Self {
        Shape { k: (2, 4), n: (3, 6), depth: (1, 3), max_constraints: 4, density: 0.5 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nested hierarchy built by splitting each class of the previous level at random.
pub fn random_hierarchy(rng: &mut impl Rng, n: usize, depth: usize) -> EquivalenceHierarchy {
    let mut levels = Vec::new();
    let mut current = vec![0usize; n];
    for _ in 1..depth {
        let split = rng.gen_range(1..=3);
        current = current.iter().map(|&c| c * 4 + rng.gen_range(0..split)).collect();
        levels.push(current.clone());
    }
    EquivalenceHierarchy::from_labels(n, levels).unwrap()
}

pub fn random_constraint(rng: &mut impl Rng, k: usize, depth: usize) -> Constraint {
    let mut steps: Vec<StepId> = (0..k).map(StepId).collect();
    steps.shuffle(rng);
    let pair = vec![steps[0], steps[1]];
    let level = rng.gen_range(1..=depth);
    match rng.gen_range(0..5) {
        0 => Constraint::new(ConstraintKind::NotEquals, pair).unwrap(),
        1 => Constraint::new(ConstraintKind::Equals, pair).unwrap(),
        2 => Constraint::new(ConstraintKind::SameClass { level }, pair).unwrap(),
        3 => Constraint::new(ConstraintKind::DifferentClass { level }, pair).unwrap(),
        _ => {
            let size = rng.gen_range(2..=k.min(4));
            let limit = rng.gen_range(1..size);
            Constraint::new(ConstraintKind::AtMost { limit }, steps[..size].to_vec()).unwrap()
        }
    }
}

pub fn random_workflow(seed: u64, shape: &Shape) -> Workflow {
    let mut rng = rng(seed);
    let k = rng.gen_range(shape.k.0..=shape.k.1);
    let n = rng.gen_range(shape.n.0.max(k)..=shape.n.1.max(k));
    let depth = rng.gen_range(shape.depth.0..=shape.depth.1);
    let hierarchy = random_hierarchy(&mut rng, n, depth);
    let auth = (0..n)
        .map(|_| (0..k).filter(|_| rng.gen_bool(shape.density)).map(StepId).collect())
        .collect();
    let count = rng.gen_range(0..=shape.max_constraints);
    let constraints = (0..count).map(|_| random_constraint(&mut rng, k, depth)).collect();
    Workflow::new(k, auth, constraints, hierarchy).unwrap()
}

pub fn example1() -> Workflow {
    let auth = vec![vec![0, 1, 2, 3], vec![0], vec![1], vec![2, 3], vec![2, 3]];
    let auth = auth.into_iter().map(|a| a.into_iter().map(StepId).collect()).collect();
    let s = StepId;
    let constraints = vec![
        Constraint::equals(s(0), s(1)).unwrap(),
        Constraint::not_equals(s(1), s(2)).unwrap(),
        Constraint::not_equals(s(2), s(3)).unwrap(),
        Constraint::not_equals(s(3), s(0)).unwrap(),
    ];
    Workflow::new(4, auth, constraints, EquivalenceHierarchy::flat(5)).unwrap()
}

pub fn example2_hierarchy() -> EquivalenceHierarchy {
    let u = UserId;
    EquivalenceHierarchy::new(5, vec![vec![vec![u(0), u(1), u(4)], vec![u(2), u(3)]]]).unwrap()
}

pub fn example2() -> Workflow {
    let w1 = example1();
    let auth = w1.users().map(|u| w1.authorized_steps(u).iter().collect()).collect();
    let mut constraints = w1.constraints().to_vec();
    constraints.push(Constraint::same_class(1, StepId(0), StepId(3)).unwrap());
    Workflow::new(4, auth, constraints, example2_hierarchy()).unwrap()
}

/// Joint pattern with 1-based labels from a chain of restricted growth strings.
pub fn pattern_from_chain(chain: &[Vec<u8>]) -> wsp_core::JointPattern {
    let levels = chain
        .iter()
        .map(|rgs| wsp_core::LevelPattern::new(rgs.iter().map(|&x| x as u32 + 1).collect()))
        .collect();
    wsp_core::JointPattern::new(levels).unwrap()
}

/// Per level, which step pairs share a class under the plan.
pub fn pair_relation(w: &Workflow, plan: &wsp_core::Plan) -> Vec<Vec<bool>> {
    let h = w.hierarchy();
    let k = w.num_steps();
    (1..=w.depth())
        .map(|q| {
            let mut rel = Vec::with_capacity(k * k);
            for a in 0..k {
                for b in 0..k {
                    let ca = h.class_of(q, plan.get(StepId(a))).unwrap();
                    let cb = h.class_of(q, plan.get(StepId(b))).unwrap();
                    rel.push(ca == cb);
                }
            }
            rel
        })
        .collect()
}

/// Every plan of the workflow, lexicographic.
pub fn all_plans(w: &Workflow) -> Vec<wsp_core::Plan> {
    let k = w.num_steps();
    let n = w.num_users();
    let total = n.pow(k as u32);
    (0..total)
        .map(|mut code| {
            let mut users = vec![UserId(0); k];
            for slot in users.iter_mut().rev() {
                *slot = UserId(code % n);
                code /= n;
            }
            wsp_core::Plan::new(users)
        })
        .collect()
}
