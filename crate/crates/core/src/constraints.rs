//! Constraint kinds, checked both on plans and on level patterns.
//!
//! Every shipped constraint is class-independent for exactly one hierarchy
//! level. The user-independent kinds (`NotEquals`, `Equals`, `AtMost`) live
//! at the equality level.

use std::fmt;

use crate::error::{Result, WspError};
use crate::model::{Assignment, EquivalenceHierarchy, StepId, StepSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// Two steps performed by different users.
    NotEquals,
    /// Two steps performed by the same user.
    Equals,
    /// Two steps performed by users in the same class at `level`.
    SameClass { level: usize },
    /// Two steps performed by users in different classes at `level`.
    DifferentClass { level: usize },
    /// At most `limit` distinct users perform the steps of the scope.
    AtMost { limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    kind: ConstraintKind,
    scope: Vec<StepId>,
    scope_set: StepSet,
}

/// The interface the solver needs from a constraint: where it applies, and
/// how to check it on plans and on patterns.
pub trait ClassIndependent {
    fn scope(&self) -> &[StepId];

    /// The hierarchy level this constraint is class-independent for.
    fn level(&self, depth: usize) -> usize;

    /// Truth of the constraint on an assignment covering its scope.
    fn satisfied_by<A: Assignment + ?Sized>(
        &self,
        plan: &A,
        hierarchy: &EquivalenceHierarchy,
    ) -> Result<bool>;

    /// Violation check on the (possibly partial) pattern of this
    /// constraint's level; `0` marks an unassigned step. Returns `false`
    /// only when no completion can satisfy the constraint.
    fn pattern_eligible(&self, labels: &[u32]) -> bool;
}

impl Constraint {
    pub fn new(kind: ConstraintKind, scope: Vec<StepId>) -> Result<Self> {
        let scope_set: StepSet = scope.iter().copied().collect();
        if scope_set.len() != scope.len() {
            return Err(WspError::Malformed(format!(
                "constraint scope repeats a step: {}",
                fmt_scope(&scope)
            )));
        }
        match kind {
            ConstraintKind::AtMost { limit } => {
                if limit == 0 || limit > scope.len() {
                    return Err(WspError::Malformed(format!(
                        "at-most limit {limit} must lie in 1..={}",
                        scope.len()
                    )));
                }
            }
            _ => {
                if scope.len() != 2 {
                    return Err(WspError::Malformed(format!(
                        "binary constraint needs exactly two steps, got {}",
                        scope.len()
                    )));
                }
            }
        }
        Ok(Constraint {
            kind,
            scope,
            scope_set,
        })
    }

    pub fn not_equals(a: StepId, b: StepId) -> Result<Self> {
        Self::new(ConstraintKind::NotEquals, vec![a, b])
    }

    pub fn equals(a: StepId, b: StepId) -> Result<Self> {
        Self::new(ConstraintKind::Equals, vec![a, b])
    }

    pub fn same_class(level: usize, a: StepId, b: StepId) -> Result<Self> {
        Self::new(ConstraintKind::SameClass { level }, vec![a, b])
    }

    pub fn different_class(level: usize, a: StepId, b: StepId) -> Result<Self> {
        Self::new(ConstraintKind::DifferentClass { level }, vec![a, b])
    }

    pub fn at_most(limit: usize, scope: Vec<StepId>) -> Result<Self> {
        Self::new(ConstraintKind::AtMost { limit }, scope)
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn scope_set(&self) -> StepSet {
        self.scope_set
    }

    pub fn is_user_independent(&self) -> bool {
        matches!(
            self.kind,
            ConstraintKind::NotEquals | ConstraintKind::Equals | ConstraintKind::AtMost { .. }
        )
    }

    /// Checks scope and level against a workflow shape.
    pub fn validate(&self, num_steps: usize, depth: usize) -> Result<()> {
        if let Some(s) = self.scope.iter().find(|s| s.0 >= num_steps) {
            return Err(WspError::Malformed(format!("constraint {self} mentions unknown step {s}")));
        }
        match self.kind {
            ConstraintKind::SameClass { level } | ConstraintKind::DifferentClass { level }
                if level == 0 || level > depth =>
            {
                Err(WspError::LevelOutOfRange { level, depth })
            }
            _ => Ok(()),
        }
    }
}

impl ClassIndependent for Constraint {
    fn scope(&self) -> &[StepId] {
        &self.scope
    }

    fn level(&self, depth: usize) -> usize {
        match self.kind {
            ConstraintKind::SameClass { level } | ConstraintKind::DifferentClass { level } => level,
            _ => depth,
        }
    }

    fn satisfied_by<A: Assignment + ?Sized>(
        &self,
        plan: &A,
        hierarchy: &EquivalenceHierarchy,
    ) -> Result<bool> {
        let level = self.level(hierarchy.depth());
        let mut classes = Vec::with_capacity(self.scope.len());
        for &s in &self.scope {
            let u = plan.user(s).ok_or_else(|| {
                WspError::Precondition(format!("constraint {self} needs {s} to be assigned"))
            })?;
            classes.push(hierarchy.class_of(level, u)?);
        }
        Ok(match self.kind {
            ConstraintKind::NotEquals | ConstraintKind::DifferentClass { .. } => classes[0] != classes[1],
            ConstraintKind::Equals | ConstraintKind::SameClass { .. } => classes[0] == classes[1],
            ConstraintKind::AtMost { limit } => {
                classes.sort_unstable();
                classes.dedup();
                classes.len() <= limit
            }
        })
    }

    #[inline]
    fn pattern_eligible(&self, labels: &[u32]) -> bool {
        match self.kind {
            ConstraintKind::NotEquals | ConstraintKind::DifferentClass { .. } => {
                let (a, b) = (labels[self.scope[0].0], labels[self.scope[1].0]);
                a == 0 || b == 0 || a != b
            }
            ConstraintKind::Equals | ConstraintKind::SameClass { .. } => {
                let (a, b) = (labels[self.scope[0].0], labels[self.scope[1].0]);
                a == 0 || b == 0 || a == b
            }
            ConstraintKind::AtMost { limit } => {
                // labels never exceed the step count, which is at most 64
                let mut seen: u128 = 0;
                for s in &self.scope {
                    let x = labels[s.0];
                    if x != 0 {
                        seen |= 1u128 << x;
                    }
                }
                seen.count_ones() as usize <= limit
            }
        }
    }
}

fn fmt_scope(scope: &[StepId]) -> String {
    scope.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scope = fmt_scope(&self.scope);
        match self.kind {
            ConstraintKind::NotEquals => write!(f, "({scope},!=)"),
            ConstraintKind::Equals => write!(f, "({scope},=)"),
            ConstraintKind::SameClass { level } => write!(f, "({scope},~{level})"),
            ConstraintKind::DifferentClass { level } => write!(f, "({scope},!~{level})"),
            ConstraintKind::AtMost { limit } => write!(f, "({limit},{{{scope}}},<=)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Plan, UserId};

    fn s(i: usize) -> StepId {
        StepId(i - 1)
    }

    fn example2_hierarchy() -> EquivalenceHierarchy {
        EquivalenceHierarchy::from_labels(5, vec![vec![0, 0, 1, 1, 0]]).unwrap()
    }

    #[test]
    fn plan_checks_on_example_two() {
        let h = example2_hierarchy();
        let pi2 = Plan::from_one_based(&[1, 1, 4, 5]);
        let pi1 = Plan::from_one_based(&[1, 1, 5, 4]);
        let ne = Constraint::not_equals(s(2), s(3)).unwrap();
        assert!(ne.satisfied_by(&pi2, &h).unwrap());
        let same = Constraint::same_class(1, s(1), s(4)).unwrap();
        assert!(!same.satisfied_by(&pi1, &h).unwrap());
        assert!(same.satisfied_by(&pi2, &h).unwrap());
    }

    #[test]
    fn at_most_on_plan() {
        let h = EquivalenceHierarchy::flat(6);
        let c = Constraint::at_most(3, (0..5).map(StepId).collect()).unwrap();
        let plan = Plan::new(vec![UserId(0), UserId(1), UserId(0), UserId(1), UserId(0)]);
        assert!(c.satisfied_by(&plan, &h).unwrap());
        let plan = Plan::new((0..5).map(UserId).collect());
        assert!(!c.satisfied_by(&plan, &h).unwrap());
    }

    #[test]
    fn uncovered_scope_is_a_precondition_error() {
        let h = EquivalenceHierarchy::flat(3);
        let mut partial = crate::model::PartialPlan::empty(2);
        partial.set(StepId(0), UserId(0));
        let c = Constraint::not_equals(s(1), s(2)).unwrap();
        assert!(matches!(c.satisfied_by(&partial, &h), Err(WspError::Precondition(_))));
    }

    #[test]
    fn pattern_checks() {
        let diff = Constraint::different_class(1, s(1), s(3)).unwrap();
        assert!(diff.pattern_eligible(&[1, 1, 2, 1]));
        let eq = Constraint::equals(s(1), s(2)).unwrap();
        assert!(eq.pattern_eligible(&[1, 1, 2, 3]));
        assert!(!eq.pattern_eligible(&[1, 2, 2, 3]));
        let at_most = Constraint::at_most(3, (0..5).map(StepId).collect()).unwrap();
        assert!(!at_most.pattern_eligible(&[1, 2, 3, 4, 0]));
        assert!(at_most.pattern_eligible(&[1, 2, 3, 0, 0]));
    }

    #[test]
    fn partial_binary_scopes_are_not_violated() {
        let ne = Constraint::not_equals(s(1), s(2)).unwrap();
        assert!(ne.pattern_eligible(&[1, 0]));
        let eq = Constraint::equals(s(1), s(2)).unwrap();
        assert!(eq.pattern_eligible(&[0, 3]));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Constraint::not_equals(s(1), s(1)).is_err());
        assert!(Constraint::at_most(0, vec![s(1), s(2)]).is_err());
        assert!(Constraint::at_most(3, vec![s(1), s(2)]).is_err());
        assert!(Constraint::new(ConstraintKind::Equals, vec![s(1), s(2), s(3)]).is_err());
        let c = Constraint::same_class(3, s(1), s(2)).unwrap();
        assert_eq!(c.validate(4, 2), Err(WspError::LevelOutOfRange { level: 3, depth: 2 }));
        assert!(Constraint::same_class(0, s(1), s(2)).unwrap().validate(4, 2).is_err());
        assert!(Constraint::not_equals(s(1), s(5)).unwrap().validate(4, 2).is_err());
    }

    #[test]
    fn levels() {
        assert_eq!(Constraint::not_equals(s(1), s(2)).unwrap().level(3), 3);
        assert_eq!(Constraint::different_class(2, s(1), s(2)).unwrap().level(3), 2);
    }
}
