//! Level patterns and joint patterns.
//!
//! A level pattern labels every step with a positive integer (or `0` when the
//! step is still unassigned); two steps share a label exactly when their
//! users share a class at that level. A joint pattern stacks one level
//! pattern per hierarchy level `1..=depth`, coarsest first.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Result, WspError};
use crate::model::{Plan, StepId, StepSet, Workflow};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelPattern(Vec<u32>);

/// Disjoint, nonempty step blocks ordered by their first step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepPartition {
    pub blocks: Vec<Vec<StepId>>,
}

impl LevelPattern {
    pub fn new(labels: Vec<u32>) -> Self {
        LevelPattern(labels)
    }

    pub fn zeros(k: usize) -> Self {
        LevelPattern(vec![0; k])
    }

    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: StepId) -> u32 {
        self.0[s.0]
    }

    pub fn set(&mut self, s: StepId, label: u32) {
        self.0[s.0] = label;
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().all(|&x| x != 0)
    }

    pub fn max_label(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Zeroes every coordinate outside `steps`.
    pub fn restrict(&self, steps: StepSet) -> LevelPattern {
        LevelPattern(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &x)| if steps.contains(StepId(i)) { x } else { 0 })
                .collect(),
        )
    }

    /// Renumbers labels by first occurrence; zeros stay zero.
    pub fn canonicalize(&self) -> LevelPattern {
        let mut map: HashMap<u32, u32> = HashMap::new();
        LevelPattern(
            self.0
                .iter()
                .map(|&x| {
                    if x == 0 {
                        0
                    } else {
                        let next = map.len() as u32 + 1;
                        *map.entry(x).or_insert(next)
                    }
                })
                .collect(),
        )
    }

    /// Steps carrying `label`.
    pub fn block(&self, label: u32) -> StepSet {
        self.0
            .iter()
            .enumerate()
            .filter(|&(_, &x)| x == label)
            .map(|(i, _)| StepId(i))
            .collect()
    }

    pub fn induced_partition(&self) -> Result<StepPartition> {
        if !self.is_complete() {
            return Err(WspError::Precondition(format!(
                "pattern {self} is incomplete"
            )));
        }
        let mut order: Vec<u32> = Vec::new();
        let mut blocks: HashMap<u32, Vec<StepId>> = HashMap::new();
        for (i, &x) in self.0.iter().enumerate() {
            blocks
                .entry(x)
                .or_insert_with(|| {
                    order.push(x);
                    Vec::new()
                })
                .push(StepId(i));
        }
        Ok(StepPartition {
            blocks: order.into_iter().map(|x| blocks.remove(&x).unwrap()).collect(),
        })
    }
}

impl fmt::Display for LevelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointPattern {
    levels: Vec<LevelPattern>,
}

impl JointPattern {
    /// `levels[0]` is hierarchy level 1.
    pub fn new(levels: Vec<LevelPattern>) -> Result<Self> {
        if levels.is_empty() {
            return Err(WspError::Malformed("joint pattern needs at least one level".into()));
        }
        let k = levels[0].len();
        if levels.iter().any(|l| l.len() != k) {
            return Err(WspError::Malformed("level patterns differ in length".into()));
        }
        Ok(JointPattern { levels })
    }

    /// Shorthand used mostly by tests: raw label rows, level 1 first.
    pub fn from_rows(rows: &[&[u32]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| LevelPattern::new(r.to_vec())).collect())
    }

    pub fn zeros(k: usize, depth: usize) -> Self {
        JointPattern {
            levels: vec![LevelPattern::zeros(k); depth],
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn num_steps(&self) -> usize {
        self.levels[0].len()
    }

    /// Pattern of hierarchy level `q` (1-based).
    pub fn level(&self, q: usize) -> &LevelPattern {
        &self.levels[q - 1]
    }

    pub fn levels(&self) -> &[LevelPattern] {
        &self.levels
    }

    pub fn is_complete(&self) -> bool {
        self.levels.iter().all(LevelPattern::is_complete)
    }

    /// Equal labels at a finer level imply equal labels at the coarser one,
    /// wherever both coordinates are assigned on both levels.
    pub fn is_consistent(&self) -> bool {
        self.levels.windows(2).all(|pair| {
            let (coarse, fine) = (pair[0].labels(), pair[1].labels());
            let mut up: HashMap<u32, u32> = HashMap::new();
            coarse.iter().zip(fine).all(|(&c, &f)| {
                if c == 0 || f == 0 {
                    return true;
                }
                *up.entry(f).or_insert(c) == c
            })
        })
    }

    pub fn canonicalize(&self) -> JointPattern {
        JointPattern {
            levels: self.levels.iter().map(LevelPattern::canonicalize).collect(),
        }
    }

    /// The canonical joint pattern induced by a total plan.
    pub fn of_plan(w: &Workflow, plan: &Plan) -> Result<JointPattern> {
        // id check only; authorization itself is irrelevant to the pattern
        w.is_authorized(plan)?;
        let h = w.hierarchy();
        let levels = (1..=h.depth())
            .map(|q| {
                let raw = plan
                    .users()
                    .iter()
                    .map(|&u| h.class_unchecked(q, u) as u32 + 1)
                    .collect();
                LevelPattern::new(raw).canonicalize()
            })
            .collect();
        Ok(JointPattern { levels })
    }
}

impl fmt::Display for JointPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.levels.iter().map(LevelPattern::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}
