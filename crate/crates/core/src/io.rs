//! JSON instance and plan files. All ids in files are 1-based.
//!
//! Instance layout:
//!
//! ```json
//! {
//!   "k": 4,
//!   "n": 5,
//!   "hierarchy": [
//!     [[1, 2, 5], [3, 4]]
//!   ],
//!   "authorizations": [
//!     [1, 2, 3, 4],
//!     ...
//!   ],
//!   "constraints": [
//!     {"kind": "same_class", "scope": [1, 4], "level": 1},
//!     ...
//!   ]
//! }
//! ```
//!
//! `hierarchy` lists the user partitions strictly between the trivial level
//! and equality, coarsest first; an empty list means user constraints only.
//! `authorizations[u - 1]` is the step list of user `u`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraints::{ClassIndependent, Constraint, ConstraintKind};
use crate::error::{Result, WspError};
use crate::model::{Plan, StepId, UserId, Workflow};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ConstraintRecord {
    NotEquals { scope: Vec<usize> },
    Equals { scope: Vec<usize> },
    SameClass { scope: Vec<usize>, level: usize },
    DifferentClass { scope: Vec<usize>, level: usize },
    AtMost { scope: Vec<usize>, limit: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    k: usize,
    n: usize,
    #[serde(default)]
    hierarchy: Vec<Vec<Vec<usize>>>,
    authorizations: Vec<Vec<usize>>,
    #[serde(default)]
    constraints: Vec<ConstraintRecord>,
}

fn step_ids(ids: &[usize]) -> Result<Vec<StepId>> {
    ids.iter()
        .map(|&i| {
            i.checked_sub(1)
                .map(StepId)
                .ok_or_else(|| WspError::Malformed("step ids are 1-based".into()))
        })
        .collect()
}

fn one_based(steps: &[StepId]) -> Vec<usize> {
    steps.iter().map(|s| s.0 + 1).collect()
}

impl ConstraintRecord {
    fn to_constraint(&self) -> Result<Constraint> {
        match self {
            ConstraintRecord::NotEquals { scope } => Constraint::new(ConstraintKind::NotEquals, step_ids(scope)?),
            ConstraintRecord::Equals { scope } => Constraint::new(ConstraintKind::Equals, step_ids(scope)?),
            ConstraintRecord::SameClass { scope, level } => {
                Constraint::new(ConstraintKind::SameClass { level: *level }, step_ids(scope)?)
            }
            ConstraintRecord::DifferentClass { scope, level } => {
                Constraint::new(ConstraintKind::DifferentClass { level: *level }, step_ids(scope)?)
            }
            ConstraintRecord::AtMost { scope, limit } => {
                Constraint::new(ConstraintKind::AtMost { limit: *limit }, step_ids(scope)?)
            }
        }
    }

    fn from_constraint(c: &Constraint) -> Self {
        let scope = one_based(c.scope());
        match c.kind() {
            ConstraintKind::NotEquals => ConstraintRecord::NotEquals { scope },
            ConstraintKind::Equals => ConstraintRecord::Equals { scope },
            ConstraintKind::SameClass { level } => ConstraintRecord::SameClass { scope, level },
            ConstraintKind::DifferentClass { level } => ConstraintRecord::DifferentClass { scope, level },
            ConstraintKind::AtMost { limit } => ConstraintRecord::AtMost { scope, limit },
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Workflow> {
    let rec: InstanceRecord =
        serde_json::from_str(text).map_err(|e| WspError::Malformed(format!("instance: {e}")))?;
    if rec.authorizations.len() != rec.n {
        return Err(WspError::Malformed(format!(
            "n = {} but {} authorization lists",
            rec.n,
            rec.authorizations.len()
        )));
    }
    let mut levels = Vec::with_capacity(rec.hierarchy.len());
    for partition in &rec.hierarchy {
        let mut classes = Vec::with_capacity(partition.len());
        for class in partition {
            let users = class
                .iter()
                .map(|&u| {
                    u.checked_sub(1)
                        .map(UserId)
                        .ok_or_else(|| WspError::Malformed("user ids are 1-based".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            classes.push(users);
        }
        levels.push(classes);
    }
    let hierarchy = crate::model::EquivalenceHierarchy::new(rec.n, levels)?;
    let auth = rec
        .authorizations
        .iter()
        .map(|a| step_ids(a))
        .collect::<Result<Vec<_>>>()?;
    let constraints = rec
        .constraints
        .iter()
        .map(ConstraintRecord::to_constraint)
        .collect::<Result<Vec<_>>>()?;
    if rec.k == 0 {
        return Err(WspError::Malformed("k must be positive".into()));
    }
    Workflow::new(rec.k, auth, constraints, hierarchy)
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data always serializes")
}

/// Canonical text: one authorization list, class list or constraint per line.
pub fn write_instance(w: &Workflow) -> String {
    let h = w.hierarchy();
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"k\": {},\n", w.num_steps()));
    out.push_str(&format!("  \"n\": {},\n", w.num_users()));

    let levels: Vec<String> = (1..h.depth())
        .map(|q| {
            let classes: Vec<String> = h
                .partition(q)
                .iter()
                .map(|class| json(&class.iter().map(|u| u.0 + 1).collect::<Vec<_>>()))
                .collect();
            format!("    [\n      {}\n    ]", classes.join(",\n      "))
        })
        .collect();
    if levels.is_empty() {
        out.push_str("  \"hierarchy\": [],\n");
    } else {
        out.push_str(&format!("  \"hierarchy\": [\n{}\n  ],\n", levels.join(",\n")));
    }

    let auth: Vec<String> = w
        .users()
        .map(|u| json(&w.authorized_steps(u).iter().map(|s| s.0 + 1).collect::<Vec<_>>()))
        .collect();
    out.push_str(&format!("  \"authorizations\": [\n    {}\n  ],\n", auth.join(",\n    ")));

    let cs: Vec<String> = w
        .constraints()
        .iter()
        .map(|c| json(&ConstraintRecord::from_constraint(c)))
        .collect();
    if cs.is_empty() {
        out.push_str("  \"constraints\": []\n");
    } else {
        out.push_str(&format!("  \"constraints\": [\n    {}\n  ]\n", cs.join(",\n    ")));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanRecord {
    assignment: BTreeMap<usize, usize>,
}

/// Parses a plan file; every step `1..=k` must be assigned exactly once.
pub fn parse_plan(text: &str, k: usize) -> Result<Plan> {
    let rec: PlanRecord =
        serde_json::from_str(text).map_err(|e| WspError::Malformed(format!("plan: {e}")))?;
    let mut users = Vec::with_capacity(k);
    for step in 1..=k {
        let u = rec
            .assignment
            .get(&step)
            .ok_or_else(|| WspError::Malformed(format!("plan does not assign step {step}")))?;
        if *u == 0 {
            return Err(WspError::Malformed("user ids are 1-based".into()));
        }
        users.push(UserId(u - 1));
    }
    if let Some(extra) = rec.assignment.keys().find(|&&s| s == 0 || s > k) {
        return Err(WspError::Malformed(format!("plan assigns unknown step {extra}")));
    }
    Ok(Plan::new(users))
}

pub fn write_plan(plan: &Plan) -> String {
    let lines: Vec<String> = plan
        .users()
        .iter()
        .enumerate()
        .map(|(i, u)| format!("    \"{}\": {}", i + 1, u.0 + 1))
        .collect();
    format!("{{\n  \"assignment\": {{\n{}\n  }}\n}}\n", lines.join(",\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
  "k": 4,
  "n": 5,
  "hierarchy": [[[1, 2, 5], [3, 4]]],
  "authorizations": [[1, 2, 3, 4], [1], [2], [3, 4], [3, 4]],
  "constraints": [
    {"kind": "equals", "scope": [1, 2]},
    {"kind": "not_equals", "scope": [2, 3]},
    {"kind": "same_class", "scope": [1, 4], "level": 1},
    {"kind": "at_most", "scope": [1, 2, 3], "limit": 2}
  ]
}"#;

    #[test]
    fn canonical_write_is_a_fixed_point() {
        let w = parse_instance(EXAMPLE).unwrap();
        let text = write_instance(&w);
        let again = parse_instance(&text).unwrap();
        assert_eq!(again, w);
        assert_eq!(write_instance(&again), text);
    }

    #[test]
    fn flat_instance_round_trips() {
        let text = r#"{"k": 2, "n": 2, "authorizations": [[1], [2]], "constraints": []}"#;
        let w = parse_instance(text).unwrap();
        assert_eq!(w.depth(), 1);
        assert_eq!(parse_instance(&write_instance(&w)).unwrap(), w);
    }

    #[test]
    fn malformed_instances() {
        assert!(parse_instance("{").is_err());
        let zero_step = EXAMPLE.replace("[1, 2], [3, 4]]\n", "[0, 2], [3, 4]]\n");
        assert!(parse_instance(&zero_step.replace("\"scope\": [1, 2]}", "\"scope\": [0, 2]}")).is_err());
        assert!(parse_instance(&EXAMPLE.replace("\"n\": 5", "\"n\": 6")).is_err());
        assert!(parse_instance(&EXAMPLE.replace("[[1, 2, 5], [3, 4]]", "[[1, 2], [3, 4]]")).is_err());
        assert!(parse_instance(&EXAMPLE.replace("\"equals\"", "\"bogus\"")).is_err());
    }

    #[test]
    fn plans() {
        let plan = Plan::from_one_based(&[1, 1, 4, 5]);
        assert_eq!(parse_plan(&write_plan(&plan), 4).unwrap(), plan);
        let missing = r#"{"assignment": {"1": 1, "2": 1, "4": 5}}"#;
        assert!(parse_plan(missing, 4).is_err());
        let extra = r#"{"assignment": {"1": 1, "2": 1, "3": 2, "4": 5, "5": 1}}"#;
        assert!(parse_plan(extra, 4).is_err());
    }
}
