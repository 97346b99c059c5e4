//! Workflow instances, user-equivalence hierarchies and plans.
//!
//! Steps and users are identified by dense 0-based indices internally. They
//! are displayed (and serialized) 1-based, so step `StepId(0)` prints as `s1`.

use std::fmt;

use crate::constraints::{ClassIndependent, Constraint};
use crate::error::{Result, WspError};

/// Largest supported number of steps; step sets are packed into a `u64`.
pub const MAX_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub usize);

/// Dense per-level class index.
pub type ClassId = usize;

impl StepId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl UserId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0 + 1)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0 + 1)
    }
}

/// A set of steps packed into a bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct StepSet(pub u64);

impl StepSet {
    pub const EMPTY: StepSet = StepSet(0);

    pub fn full(k: usize) -> StepSet {
        if k >= 64 {
            StepSet(u64::MAX)
        } else {
            StepSet((1u64 << k) - 1)
        }
    }

    pub fn singleton(s: StepId) -> StepSet {
        StepSet(1u64 << s.0)
    }

    pub fn insert(&mut self, s: StepId) {
        self.0 |= 1u64 << s.0;
    }

    pub fn contains(self, s: StepId) -> bool {
        self.0 >> s.0 & 1 == 1
    }

    pub fn is_subset(self, other: StepSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = StepId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(StepId(i))
        })
    }
}

impl FromIterator<StepId> for StepSet {
    fn from_iter<I: IntoIterator<Item = StepId>>(iter: I) -> Self {
        let mut set = StepSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

/// A chain of nested partitions of the users.
///
/// Level 0 puts every user in one class, level `depth` is equality, and each
/// level refines the one above it. Class ids are dense per level and assigned
/// in order of the first user (by index) that belongs to the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceHierarchy {
    num_users: usize,
    class_of: Vec<Vec<ClassId>>,
    members: Vec<Vec<Vec<UserId>>>,
    children: Vec<Vec<Vec<ClassId>>>,
}

impl EquivalenceHierarchy {
    /// The depth-1 hierarchy: only the trivial level and equality.
    pub fn flat(num_users: usize) -> Self {
        Self::from_labels(num_users, Vec::new()).expect("flat hierarchy is always valid")
    }

    /// Builds a hierarchy from the partitions strictly between the trivial
    /// level and equality, coarsest first.
    pub fn new(num_users: usize, levels: Vec<Vec<Vec<UserId>>>) -> Result<Self> {
        let mut labels = Vec::with_capacity(levels.len());
        for (i, partition) in levels.iter().enumerate() {
            let level = i + 1;
            let mut label = vec![usize::MAX; num_users];
            for (c, class) in partition.iter().enumerate() {
                if class.is_empty() {
                    return Err(WspError::InvalidHierarchy(format!(
                        "level {level} has an empty class"
                    )));
                }
                for &u in class {
                    if u.0 >= num_users {
                        return Err(WspError::InvalidHierarchy(format!(
                            "level {level} mentions unknown user {u}"
                        )));
                    }
                    if label[u.0] != usize::MAX {
                        return Err(WspError::InvalidHierarchy(format!(
                            "user {u} appears twice at level {level}"
                        )));
                    }
                    label[u.0] = c;
                }
            }
            if let Some(u) = label.iter().position(|&c| c == usize::MAX) {
                return Err(WspError::InvalidHierarchy(format!(
                    "user {} missing at level {level}",
                    UserId(u)
                )));
            }
            labels.push(label);
        }
        Self::from_labels(num_users, labels)
    }

    /// Builds a hierarchy from per-user class labels for each intermediate
    /// level. Labels are arbitrary and get renumbered densely.
    pub fn from_labels(num_users: usize, levels: Vec<Vec<usize>>) -> Result<Self> {
        let depth = levels.len() + 1;
        let mut class_of: Vec<Vec<ClassId>> = Vec::with_capacity(depth + 1);
        class_of.push(vec![0; num_users]);
        for (i, raw) in levels.iter().enumerate() {
            if raw.len() != num_users {
                return Err(WspError::InvalidHierarchy(format!(
                    "level {} labels {} users, expected {num_users}",
                    i + 1,
                    raw.len()
                )));
            }
            class_of.push(renumber(raw));
        }
        class_of.push((0..num_users).collect());

        for q in 1..=depth {
            // every class at q must sit inside one class at q - 1
            let mut parent: Vec<Option<ClassId>> = vec![None; num_users];
            for (u, (&c, &p)) in class_of[q].iter().zip(&class_of[q - 1]).enumerate() {
                match parent[c] {
                    None => parent[c] = Some(p),
                    Some(existing) if existing != p => {
                        return Err(WspError::InvalidHierarchy(format!(
                            "level {q} does not refine level {}: {} and its classmates straddle two classes",
                            q - 1,
                            UserId(u)
                        )));
                    }
                    Some(_) => {}
                }
            }
        }

        let mut members = Vec::with_capacity(depth + 1);
        for labels in &class_of {
            let count = labels.iter().max().map_or(0, |m| m + 1);
            let mut level_members = vec![Vec::new(); count];
            for (u, &c) in labels.iter().enumerate() {
                level_members[c].push(UserId(u));
            }
            members.push(level_members);
        }

        let mut children = Vec::with_capacity(depth);
        for q in 0..depth {
            let mut level_children = vec![Vec::new(); members[q].len()];
            for (c, users) in members[q + 1].iter().enumerate() {
                let parent = class_of[q][users[0].0];
                level_children[parent].push(c);
            }
            children.push(level_children);
        }

        Ok(EquivalenceHierarchy {
            num_users,
            class_of,
            members,
            children,
        })
    }

    /// Index of the equality level; also the number of non-trivial levels.
    pub fn depth(&self) -> usize {
        self.class_of.len() - 1
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_classes(&self, level: usize) -> usize {
        self.members.get(level).map_or(0, Vec::len)
    }

    pub fn class_of(&self, level: usize, user: UserId) -> Result<ClassId> {
        let labels = self.class_of.get(level).ok_or(WspError::LevelOutOfRange {
            level,
            depth: self.depth(),
        })?;
        labels
            .get(user.0)
            .copied()
            .ok_or_else(|| WspError::Malformed(format!("unknown user {user}")))
    }

    /// Unchecked lookup for hot paths; panics on out-of-range input.
    #[inline]
    pub(crate) fn class_unchecked(&self, level: usize, user: UserId) -> ClassId {
        self.class_of[level][user.0]
    }

    pub fn members(&self, level: usize, class: ClassId) -> &[UserId] {
        &self.members[level][class]
    }

    /// Classes one level below `level` contained in `class`.
    pub fn children(&self, level: usize, class: ClassId) -> &[ClassId] {
        &self.children[level][class]
    }

    /// All classes of a level, as member lists.
    pub fn partition(&self, level: usize) -> &[Vec<UserId>] {
        &self.members[level]
    }
}

fn renumber(raw: &[usize]) -> Vec<ClassId> {
    let mut map = std::collections::HashMap::new();
    raw.iter()
        .map(|&x| {
            let next = map.len();
            *map.entry(x).or_insert(next)
        })
        .collect()
}

/// Anything that maps (some) steps to users.
pub trait Assignment {
    fn num_steps(&self) -> usize;
    fn user(&self, step: StepId) -> Option<UserId>;

    fn domain(&self) -> StepSet {
        (0..self.num_steps())
            .map(StepId)
            .filter(|&s| self.user(s).is_some())
            .collect()
    }
}

/// A total assignment of steps to users.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plan {
    users: Vec<UserId>,
}

impl Plan {
    pub fn new(users: Vec<UserId>) -> Self {
        Plan { users }
    }

    /// Convenience constructor from 1-based user numbers.
    pub fn from_one_based(users: &[usize]) -> Self {
        Plan::new(users.iter().map(|&u| UserId(u - 1)).collect())
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn get(&self, step: StepId) -> UserId {
        self.users[step.0]
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

impl Assignment for Plan {
    fn num_steps(&self) -> usize {
        self.users.len()
    }

    fn user(&self, step: StepId) -> Option<UserId> {
        self.users.get(step.0).copied()
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .users
            .iter()
            .enumerate()
            .map(|(i, u)| format!("{}->{}", StepId(i), u))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// An assignment defined on a subset of the steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialPlan {
    users: Vec<Option<UserId>>,
}

impl PartialPlan {
    pub fn empty(k: usize) -> Self {
        PartialPlan {
            users: vec![None; k],
        }
    }

    pub fn set(&mut self, step: StepId, user: UserId) {
        self.users[step.0] = Some(user);
    }

    pub fn unset(&mut self, step: StepId) {
        self.users[step.0] = None;
    }

    /// `Some(plan)` once every step is assigned.
    pub fn to_plan(&self) -> Option<Plan> {
        self.users.iter().copied().collect::<Option<Vec<_>>>().map(Plan::new)
    }
}

impl From<&Plan> for PartialPlan {
    fn from(plan: &Plan) -> Self {
        PartialPlan {
            users: plan.users.iter().copied().map(Some).collect(),
        }
    }
}

impl Assignment for PartialPlan {
    fn num_steps(&self) -> usize {
        self.users.len()
    }

    fn user(&self, step: StepId) -> Option<UserId> {
        self.users.get(step.0).copied().flatten()
    }
}

/// An immutable workflow instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workflow {
    num_steps: usize,
    num_users: usize,
    auth: Vec<StepSet>,
    constraints: Vec<Constraint>,
    hierarchy: EquivalenceHierarchy,
}

impl Workflow {
    /// `auth[u]` lists the steps user `u` may perform.
    pub fn new(
        num_steps: usize,
        auth: Vec<Vec<StepId>>,
        constraints: Vec<Constraint>,
        hierarchy: EquivalenceHierarchy,
    ) -> Result<Self> {
        let num_users = auth.len();
        if num_steps == 0 {
            return Err(WspError::Malformed("workflow has no steps".into()));
        }
        if num_steps > MAX_STEPS {
            return Err(WspError::Malformed(format!(
                "{num_steps} steps exceeds the supported maximum of {MAX_STEPS}"
            )));
        }
        if num_steps > num_users {
            return Err(WspError::Malformed(format!(
                "fewer users ({num_users}) than steps ({num_steps})"
            )));
        }
        if hierarchy.num_users() != num_users {
            return Err(WspError::Malformed(format!(
                "hierarchy covers {} users, authorizations cover {num_users}",
                hierarchy.num_users()
            )));
        }
        let mut sets = Vec::with_capacity(num_users);
        for (u, steps) in auth.iter().enumerate() {
            let mut set = StepSet::EMPTY;
            for &s in steps {
                if s.0 >= num_steps {
                    return Err(WspError::Malformed(format!(
                        "authorization list of {} mentions unknown step {s}",
                        UserId(u)
                    )));
                }
                set.insert(s);
            }
            sets.push(set);
        }
        for c in &constraints {
            c.validate(num_steps, hierarchy.depth())?;
        }
        Ok(Workflow {
            num_steps,
            num_users,
            auth: sets,
            constraints,
            hierarchy,
        })
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn steps(&self) -> impl Iterator<Item = StepId> {
        (0..self.num_steps).map(StepId)
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> {
        (0..self.num_users).map(UserId)
    }

    /// A(u).
    pub fn authorized_steps(&self, user: UserId) -> StepSet {
        self.auth[user.0]
    }

    pub fn is_user_authorized(&self, user: UserId, step: StepId) -> bool {
        self.auth[user.0].contains(step)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn hierarchy(&self) -> &EquivalenceHierarchy {
        &self.hierarchy
    }

    pub fn depth(&self) -> usize {
        self.hierarchy.depth()
    }

    /// A copy of this workflow with one more constraint.
    pub fn with_constraint(&self, c: Constraint) -> Result<Workflow> {
        c.validate(self.num_steps, self.depth())?;
        let mut w = self.clone();
        w.constraints.push(c);
        Ok(w)
    }

    fn check_ids<A: Assignment + ?Sized>(&self, plan: &A) -> Result<()> {
        if plan.num_steps() != self.num_steps {
            return Err(WspError::Malformed(format!(
                "plan covers {} steps, workflow has {}",
                plan.num_steps(),
                self.num_steps
            )));
        }
        for s in self.steps() {
            if let Some(u) = plan.user(s) {
                if u.0 >= self.num_users {
                    return Err(WspError::Malformed(format!("unknown user {u} assigned to {s}")));
                }
            }
        }
        Ok(())
    }

    /// Every assigned step is performed by a user authorized for it.
    pub fn is_authorized<A: Assignment + ?Sized>(&self, plan: &A) -> Result<bool> {
        self.check_ids(plan)?;
        Ok(self
            .steps()
            .all(|s| plan.user(s).is_none_or(|u| self.is_user_authorized(u, s))))
    }

    /// Every constraint whose scope lies inside the plan's domain is satisfied.
    pub fn is_eligible<A: Assignment + ?Sized>(&self, plan: &A) -> Result<bool> {
        self.check_ids(plan)?;
        Ok(self.violated_constraints(plan).next().is_none())
    }

    pub fn is_valid(&self, plan: &Plan) -> Result<bool> {
        Ok(self.is_authorized(plan)? && self.is_eligible(plan)?)
    }

    /// Constraints (by index) with scope inside the plan's domain that the
    /// plan violates. Assumes ids have been checked.
    pub fn violated_constraints<'a, A: Assignment + ?Sized>(
        &'a self,
        plan: &'a A,
    ) -> impl Iterator<Item = usize> + 'a {
        let domain = plan.domain();
        self.constraints.iter().enumerate().filter_map(move |(i, c)| {
            if !c.scope_set().is_subset(domain) {
                return None;
            }
            match c.satisfied_by(plan, &self.hierarchy) {
                Ok(true) => None,
                _ => Some(i),
            }
        })
    }

    /// Steps assigned to users who are not authorized for them.
    pub fn unauthorized_steps<'a, A: Assignment + ?Sized>(
        &'a self,
        plan: &'a A,
    ) -> impl Iterator<Item = StepId> + 'a {
        self.steps()
            .filter(move |&s| plan.user(s).is_some_and(|u| !self.is_user_authorized(u, s)))
    }
}
