//! Realizability of complete joint patterns.
//!
//! A pattern is realizable when some authorized plan induces it. The check
//! walks the hierarchy top-down: a block of steps at level `q` fits a user
//! class at level `q` iff the block's sub-blocks at level `q + 1` can be
//! matched injectively onto sub-classes they fit. At the equality level a
//! block fits a user iff the user is authorized for every step of the block.

use std::collections::HashMap;

use crate::error::{Result, WspError};
use crate::matching::{max_matching, BipartiteGraph, Matching};
use crate::model::{ClassId, PartialPlan, Plan, StepSet, UserId, Workflow};
use crate::patterns::JointPattern;

pub struct Realizer<'a> {
    w: &'a Workflow,
    depth: usize,
    /// `blocks[q][x]`: steps labelled `x` at level `q`; index 0 unused.
    blocks: Vec<Vec<StepSet>>,
    /// `sub_blocks[q][x]`: labels at `q + 1` inside block `x` of level `q`.
    sub_blocks: Vec<Vec<Vec<u32>>>,
    /// Canonical labels per level, level 0 included.
    labels: Vec<Vec<u32>>,
    memo: Option<HashMap<(usize, u32, ClassId), bool>>,
    edge_queries: u64,
}

impl<'a> Realizer<'a> {
    pub fn new(w: &'a Workflow, jp: &JointPattern) -> Result<Self> {
        Self::with_memo(w, jp, true)
    }

    pub fn with_memo(w: &'a Workflow, jp: &JointPattern, memoize: bool) -> Result<Self> {
        let depth = w.depth();
        if jp.depth() != depth || jp.num_steps() != w.num_steps() {
            return Err(WspError::Precondition(format!(
                "pattern shape {}x{} does not match workflow {}x{}",
                jp.depth(),
                jp.num_steps(),
                depth,
                w.num_steps()
            )));
        }
        if !jp.is_complete() {
            return Err(WspError::Precondition(format!("pattern {jp} is incomplete")));
        }
        if !jp.is_consistent() {
            return Err(WspError::Precondition(format!("pattern {jp} is inconsistent")));
        }
        let k = w.num_steps();
        let canonical = jp.canonicalize();
        let mut labels = Vec::with_capacity(depth + 1);
        labels.push(vec![1u32; k]);
        for q in 1..=depth {
            labels.push(canonical.level(q).labels().to_vec());
        }

        let mut blocks = Vec::with_capacity(depth + 1);
        for row in &labels {
            let max = row.iter().copied().max().unwrap_or(0) as usize;
            let mut level_blocks = vec![StepSet::EMPTY; max + 1];
            for (i, &x) in row.iter().enumerate() {
                level_blocks[x as usize].0 |= 1u64 << i;
            }
            blocks.push(level_blocks);
        }

        let mut sub_blocks = Vec::with_capacity(depth);
        for q in 0..depth {
            let mut level_subs = vec![Vec::new(); blocks[q].len()];
            let mut seen = vec![false; blocks[q + 1].len()];
            for i in 0..k {
                let fine = labels[q + 1][i];
                if !seen[fine as usize] {
                    seen[fine as usize] = true;
                    level_subs[labels[q][i] as usize].push(fine);
                }
            }
            sub_blocks.push(level_subs);
        }

        Ok(Realizer {
            w,
            depth,
            blocks,
            sub_blocks,
            labels,
            memo: memoize.then(HashMap::new),
            edge_queries: 0,
        })
    }

    /// Number of block/class fit evaluations performed so far.
    pub fn edge_queries(&self) -> u64 {
        self.edge_queries
    }

    /// Whether the level-`q` block `block` can be performed by users of the
    /// level-`q` class `class` in a way that reproduces the pattern at every
    /// level below `q`.
    pub fn level_edge_exists(&mut self, q: usize, block: StepSet, class: ClassId) -> Result<bool> {
        if q > self.depth {
            return Err(WspError::LevelOutOfRange {
                level: q,
                depth: self.depth,
            });
        }
        if class >= self.w.hierarchy().num_classes(q) {
            return Err(WspError::Precondition(format!("no class {class} at level {q}")));
        }
        let first = block
            .iter()
            .next()
            .ok_or_else(|| WspError::Precondition("empty block".into()))?;
        let label = self.labels[q][first.0];
        if self.blocks[q][label as usize] != block {
            return Err(WspError::Precondition(format!(
                "steps {:?} do not form a level-{q} block",
                block.iter().map(|s| s.to_string()).collect::<Vec<_>>()
            )));
        }
        Ok(self.fits(q, label, class))
    }

    fn fits(&mut self, q: usize, label: u32, class: ClassId) -> bool {
        self.edge_queries += 1;
        if q == self.depth {
            // the equality level numbers classes by user index
            let block = self.blocks[q][label as usize];
            return block.is_subset(self.w.authorized_steps(UserId(class)));
        }
        if let Some(&hit) = self.memo.as_ref().and_then(|m| m.get(&(q, label, class))) {
            return hit;
        }
        let result = self.sub_matching(q, label, class).is_some();
        if let Some(m) = self.memo.as_mut() {
            m.insert((q, label, class), result);
        }
        result
    }

    /// Covering matching of the sub-blocks of `label` onto the sub-classes of
    /// `class`, if one exists.
    fn sub_matching(&mut self, q: usize, label: u32, class: ClassId) -> Option<(Matching, Vec<ClassId>)> {
        let h = self.w.hierarchy();
        let subs = self.sub_blocks[q][label as usize].clone();
        let classes = h.children(q, class).to_vec();
        if subs.len() > classes.len() {
            return None;
        }
        let mut adj = Vec::with_capacity(subs.len());
        for &sub in &subs {
            let row: Vec<usize> = classes
                .iter()
                .enumerate()
                .filter(|&(_, &c)| self.fits(q + 1, sub, c))
                .map(|(j, _)| j)
                .collect();
            if row.is_empty() {
                return None;
            }
            adj.push(row);
        }
        let g = BipartiteGraph::from_adjacency(classes.len(), adj);
        let m = max_matching(&g);
        m.covers_left(&g).then_some((m, classes))
    }

    fn assign(&mut self, q: usize, label: u32, class: ClassId, plan: &mut PartialPlan) {
        if q == self.depth {
            for s in self.blocks[q][label as usize].iter() {
                plan.set(s, UserId(class));
            }
            return;
        }
        let (m, classes) = self
            .sub_matching(q, label, class)
            .expect("assign is only called on fitting pairs");
        let subs = self.sub_blocks[q][label as usize].clone();
        for (i, j) in m.pairs() {
            self.assign(q + 1, subs[i], classes[j], plan);
        }
    }

    /// A witness plan realizing the pattern, or `None`.
    pub fn realize(&mut self) -> Option<Plan> {
        if !self.fits(0, 1, 0) {
            return None;
        }
        let mut plan = PartialPlan::empty(self.w.num_steps());
        self.assign(0, 1, 0, &mut plan);
        plan.to_plan()
    }
}

/// Decides realizability of a complete, consistent joint pattern and returns
/// a witness plan when it is realizable.
pub fn realize(w: &Workflow, jp: &JointPattern) -> Result<Option<Plan>> {
    Ok(Realizer::new(w, jp)?.realize())
}
