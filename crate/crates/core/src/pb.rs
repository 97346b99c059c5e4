//! Pseudo-Boolean (OPB) encoding of a workflow instance.
//!
//! Variables:
//! * `x(s, u)` for each authorized step/user pair: user `u` performs `s`;
//! * `y(c, u)` for each at-most constraint `c` and user `u` authorized for
//!   a step of its scope: `u` performs some step of the scope;
//! * `z(s, E)` for each step on a class constraint and level-1 class `E`
//!   holding an authorized user: `s` is performed inside `E`.
//!
//! Every constraint is written in `>=` normal form.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::constraints::{ClassIndependent, ConstraintKind};
use crate::error::{Result, WspError};
use crate::model::{ClassId, Plan, StepId, UserId, Workflow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PbVar {
    Assign { step: StepId, user: UserId },
    Uses { constraint: usize, user: UserId },
    InClass { step: StepId, class: ClassId },
    /// Forced both ways; only present when some step has no authorized user.
    Contradiction,
}

/// `sum(coef * var) >= rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbConstraint {
    pub terms: Vec<(i64, usize)>,
    pub rhs: i64,
}

impl PbConstraint {
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .filter(|&&(_, v)| model[v])
            .map(|&(c, _)| c)
            .sum();
        lhs >= self.rhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PbDocument {
    vars: Vec<PbVar>,
    constraints: Vec<PbConstraint>,
}

impl PbDocument {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn vars(&self) -> &[PbVar] {
        &self.vars
    }

    pub fn constraints(&self) -> &[PbConstraint] {
        &self.constraints
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        model.len() == self.vars.len() && self.constraints.iter().all(|c| c.is_satisfied_by(model))
    }

    /// The characteristic assignment of a plan.
    pub fn assignment_for_plan(&self, w: &Workflow, plan: &Plan) -> Vec<bool> {
        let h = w.hierarchy();
        self.vars
            .iter()
            .map(|v| match *v {
                PbVar::Assign { step, user } => plan.get(step) == user,
                PbVar::Uses { constraint, user } => w.constraints()[constraint]
                    .scope()
                    .iter()
                    .any(|&s| plan.get(s) == user),
                PbVar::InClass { step, class } => h.class_unchecked(1, plan.get(step)) == class,
                PbVar::Contradiction => false,
            })
            .collect()
    }

    /// Reads the plan out of a model: each step must have exactly one true
    /// assignment variable.
    pub fn decode(&self, num_steps: usize, model: &[bool]) -> Result<Plan> {
        if model.len() != self.vars.len() {
            return Err(WspError::Malformed(format!(
                "model has {} values for {} variables",
                model.len(),
                self.vars.len()
            )));
        }
        let mut users: Vec<Option<UserId>> = vec![None; num_steps];
        for (v, &value) in self.vars.iter().zip(model) {
            if let (PbVar::Assign { step, user }, true) = (v, value) {
                if users[step.0].replace(*user).is_some() {
                    return Err(WspError::Malformed(format!("{step} is assigned twice in the model")));
                }
            }
        }
        users
            .into_iter()
            .enumerate()
            .map(|(i, u)| {
                u.ok_or_else(|| WspError::Malformed(format!("{} is unassigned in the model", StepId(i))))
            })
            .collect::<Result<Vec<_>>>()
            .map(Plan::new)
    }

    fn legend(&self, var: usize) -> String {
        match self.vars[var] {
            PbVar::Assign { step, user } => format!("step {}, user {}", step.0 + 1, user.0 + 1),
            PbVar::Uses { constraint, user } => {
                format!("at-most constraint {}, user {}", constraint + 1, user.0 + 1)
            }
            PbVar::InClass { step, class } => format!("step {}, class {}", step.0 + 1, class + 1),
            PbVar::Contradiction => "contradiction".to_string(),
        }
    }

    /// OPB text: header, variable legend, one constraint per line.
    pub fn to_opb(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "* #variable= {} #constraint= {}",
            self.vars.len(),
            self.constraints.len()
        )
        .unwrap();
        for i in 0..self.vars.len() {
            writeln!(out, "* map x{} = {}", i + 1, self.legend(i)).unwrap();
        }
        for c in &self.constraints {
            for &(coef, v) in &c.terms {
                write!(out, "{coef:+} x{} ", v + 1).unwrap();
            }
            writeln!(out, ">= {} ;", c.rhs).unwrap();
        }
        out
    }
}

/// Parses OPB text (the subset this module writes, plus `=`) and checks the
/// header counts. Returns the variable count and constraints in `>=` form.
pub fn parse_opb(text: &str) -> Result<(usize, Vec<PbConstraint>)> {
    let bad = |msg: String| WspError::Malformed(format!("OPB: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty document".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (num_vars, num_constraints) = match fields.as_slice() {
        ["*", "#variable=", v, "#constraint=", c] => (
            v.parse::<usize>().map_err(|e| bad(e.to_string()))?,
            c.parse::<usize>().map_err(|e| bad(e.to_string()))?,
        ),
        _ => return Err(bad(format!("bad header {header:?}"))),
    };
    let mut constraints = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let body = line
            .strip_suffix(';')
            .ok_or_else(|| bad(format!("missing ';' in {line:?}")))?;
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let rel_at = tokens
            .iter()
            .position(|t| *t == ">=" || *t == "=")
            .ok_or_else(|| bad(format!("no relation in {line:?}")))?;
        if rel_at % 2 != 0 || rel_at + 2 != tokens.len() {
            return Err(bad(format!("malformed terms in {line:?}")));
        }
        let mut terms = Vec::new();
        for pair in tokens[..rel_at].chunks(2) {
            let coef: i64 = pair[0].parse().map_err(|_| bad(format!("bad coefficient {:?}", pair[0])))?;
            let var: usize = pair[1]
                .strip_prefix('x')
                .and_then(|v| v.parse().ok())
                .filter(|&v| v >= 1 && v <= num_vars)
                .ok_or_else(|| bad(format!("bad variable {:?}", pair[1])))?;
            terms.push((coef, var - 1));
        }
        let rhs: i64 = tokens[rel_at + 1]
            .parse()
            .map_err(|_| bad(format!("bad right-hand side in {line:?}")))?;
        if tokens[rel_at] == "=" {
            let negated = terms.iter().map(|&(c, v)| (-c, v)).collect();
            constraints.push(PbConstraint { terms, rhs });
            constraints.push(PbConstraint { terms: negated, rhs: -rhs });
        } else {
            constraints.push(PbConstraint { terms, rhs });
        }
    }
    if constraints.len() != num_constraints {
        return Err(bad(format!(
            "header announces {num_constraints} constraints, body has {}",
            constraints.len()
        )));
    }
    Ok((num_vars, constraints))
}

struct Encoder<'a> {
    w: &'a Workflow,
    doc: PbDocument,
    x: Vec<Vec<Option<usize>>>,
    z: HashMap<(StepId, ClassId), Option<usize>>,
}

impl Encoder<'_> {
    fn var(&mut self, v: PbVar) -> usize {
        self.doc.vars.push(v);
        self.doc.vars.len() - 1
    }

    fn ge(&mut self, terms: Vec<(i64, usize)>, rhs: i64) {
        self.doc.constraints.push(PbConstraint { terms, rhs });
    }

    /// `a = b` where a missing side is the constant 0.
    fn equal(&mut self, a: Option<usize>, b: Option<usize>) {
        match (a, b) {
            (Some(a), Some(b)) => {
                self.ge(vec![(1, a), (-1, b)], 0);
                self.ge(vec![(1, b), (-1, a)], 0);
            }
            (Some(v), None) | (None, Some(v)) => self.ge(vec![(-1, v)], 0),
            (None, None) => {}
        }
    }

    /// `a + b <= 1`.
    fn at_most_one(&mut self, a: Option<usize>, b: Option<usize>) {
        if let (Some(a), Some(b)) = (a, b) {
            self.ge(vec![(-1, a), (-1, b)], -1);
        }
    }

    /// Indicator of "step `s` is performed inside level-`level` class `e`".
    fn class_var(&mut self, level: usize, s: StepId, e: ClassId) -> Option<usize> {
        if level == self.w.depth() {
            return self.x[s.0][e];
        }
        if let Some(&v) = self.z.get(&(s, e)) {
            return v;
        }
        let members: Vec<usize> = self
            .w
            .hierarchy()
            .members(level, e)
            .iter()
            .filter_map(|u| self.x[s.0][u.0])
            .collect();
        let v = if members.is_empty() {
            None
        } else {
            let z = self.var(PbVar::InClass { step: s, class: e });
            let mut up = vec![(1, z)];
            up.extend(members.iter().map(|&x| (-1, x)));
            self.ge(up, 0);
            let mut down = vec![(-1, z)];
            down.extend(members.iter().map(|&x| (1, x)));
            self.ge(down, 0);
            Some(z)
        };
        self.z.insert((s, e), v);
        v
    }
}

/// Encodes a workflow of depth at most 2 (user constraints plus one class level).
pub fn encode(w: &Workflow) -> Result<PbDocument> {
    if w.depth() > 2 {
        return Err(WspError::Unsupported(format!(
            "PB encoding handles at most one class level, instance has depth {}",
            w.depth()
        )));
    }
    let mut enc = Encoder {
        w,
        doc: PbDocument::default(),
        x: vec![vec![None; w.num_users()]; w.num_steps()],
        z: HashMap::new(),
    };
    for s in w.steps() {
        for u in w.users() {
            if w.is_user_authorized(u, s) {
                enc.x[s.0][u.0] = Some(enc.var(PbVar::Assign { step: s, user: u }));
            }
        }
    }
    let mut contradiction = None;
    for s in w.steps() {
        let xs: Vec<usize> = enc.x[s.0].iter().flatten().copied().collect();
        if xs.is_empty() {
            let c = *contradiction.get_or_insert_with(|| enc.var(PbVar::Contradiction));
            enc.ge(vec![(1, c)], 1);
            enc.ge(vec![(-1, c)], 0);
            continue;
        }
        enc.ge(xs.iter().map(|&v| (1, v)).collect(), 1);
        enc.ge(xs.iter().map(|&v| (-1, v)).collect(), -1);
    }

    let depth = w.depth();
    for (ci, c) in w.constraints().iter().enumerate() {
        let level = c.level(depth);
        let scope = c.scope();
        match c.kind() {
            ConstraintKind::NotEquals => {
                for u in 0..w.num_users() {
                    enc.at_most_one(enc.x[scope[0].0][u], enc.x[scope[1].0][u]);
                }
            }
            ConstraintKind::Equals => {
                for u in 0..w.num_users() {
                    enc.equal(enc.x[scope[0].0][u], enc.x[scope[1].0][u]);
                }
            }
            ConstraintKind::SameClass { .. } => {
                for e in 0..w.hierarchy().num_classes(level) {
                    let a = enc.class_var(level, scope[0], e);
                    let b = enc.class_var(level, scope[1], e);
                    enc.equal(a, b);
                }
            }
            ConstraintKind::DifferentClass { .. } => {
                for e in 0..w.hierarchy().num_classes(level) {
                    let a = enc.class_var(level, scope[0], e);
                    let b = enc.class_var(level, scope[1], e);
                    enc.at_most_one(a, b);
                }
            }
            ConstraintKind::AtMost { limit } => {
                let mut ys = Vec::new();
                for u in w.users() {
                    let xs: Vec<usize> = scope.iter().filter_map(|s| enc.x[s.0][u.0]).collect();
                    if xs.is_empty() {
                        continue;
                    }
                    let y = enc.var(PbVar::Uses { constraint: ci, user: u });
                    for x in xs {
                        enc.ge(vec![(1, y), (-1, x)], 0);
                    }
                    ys.push(y);
                }
                if ys.len() > limit {
                    enc.ge(ys.iter().map(|&y| (-1, y)).collect(), -(limit as i64));
                }
            }
        }
    }
    Ok(enc.doc)
}
