//! Pattern backtracking over joint patterns.
//!
//! The search fills the finest (equality) level first, one step at a time,
//! then each coarser level one finer-level block at a time. New labels are
//! only ever `max + 1`, so every nested partition of the steps is reached by
//! exactly one path. Complete, eligible patterns are handed to the
//! realizability check, which also produces the witness plan.

use std::time::{Duration, Instant};

use crate::constraints::{ClassIndependent, ConstraintKind};
use crate::error::{Result, WspError};
use crate::model::{Plan, StepId, Workflow};
use crate::patterns::{JointPattern, LevelPattern};
use crate::realize::Realizer;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Pick the unassigned coordinate of largest weight instead of the lowest index.
    pub heuristic: bool,
    /// Weight of a same-class constraint relative to a different-class one.
    pub level_equiv_weight_factor: u64,
    pub timeout: Option<Duration>,
    /// Exhaust the search space, counting every complete pattern, instead of
    /// stopping at the first witness. The verdict is unaffected.
    pub count_patterns: bool,
    /// Prune partial patterns on eligibility and on the authorization check.
    /// Disabling it still checks eligibility on complete patterns.
    pub pruning: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            heuristic: true,
            level_equiv_weight_factor: 10,
            timeout: None,
            count_patterns: false,
            pruning: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Plan),
    Unsat,
    Timeout,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub complete_patterns: u64,
    pub realize_calls: u64,
    pub edge_queries: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub stats: SolveStats,
}

/// Static coordinate weights, `weights[q - 1][step]` for level `q`.
///
/// At the equality level a step weighs the total scope size of the
/// constraints on that level containing it. At a coarser level it weighs its
/// different-class constraints plus `factor` times its same-class ones.
pub fn compute_weights(w: &Workflow, factor: u64) -> Vec<Vec<u64>> {
    let depth = w.depth();
    let mut weights = vec![vec![0u64; w.num_steps()]; depth];
    for c in w.constraints() {
        let q = c.level(depth);
        let add = if q == depth {
            c.scope().len() as u64
        } else {
            match c.kind() {
                ConstraintKind::SameClass { .. } => factor,
                _ => 1,
            }
        };
        for s in c.scope() {
            weights[q - 1][s.0] += add;
        }
    }
    weights
}

pub fn solve(w: &Workflow, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_observed(w, cfg, None)
}

/// Like [`solve`], calling `observer` on every complete joint pattern the
/// search reaches (before eligibility and realizability are checked).
pub fn solve_observed(
    w: &Workflow,
    cfg: &SolverConfig,
    observer: Option<&mut dyn FnMut(&JointPattern)>,
) -> Result<SolveResult> {
    if cfg.level_equiv_weight_factor == 0 {
        return Err(WspError::Malformed("weight factor must be positive".into()));
    }
    let start = Instant::now();
    let mut search = Search::new(w, cfg, start, observer);
    let found = search.run();
    let mut stats = search.stats;
    stats.elapsed = start.elapsed();
    let verdict = match found {
        Some(plan) => Verdict::Sat(plan),
        None if search.timed_out => Verdict::Timeout,
        None => Verdict::Unsat,
    };
    Ok(SolveResult { verdict, stats })
}

struct Search<'a, 'o> {
    w: &'a Workflow,
    cfg: &'a SolverConfig,
    depth: usize,
    k: usize,
    /// `labels[q - 1][step]`.
    labels: Vec<Vec<u32>>,
    /// Constraint indices per level and step.
    watch: Vec<Vec<Vec<usize>>>,
    weights: Vec<Vec<u64>>,
    words: usize,
    /// Users authorized for each step, as bit masks.
    step_users: Vec<Vec<u64>>,
    /// Users authorized for every step carrying each finest-level label.
    label_users: Vec<Vec<u64>>,
    deadline: Option<Instant>,
    timed_out: bool,
    witness: Option<Plan>,
    stats: SolveStats,
    observer: Option<&'o mut dyn FnMut(&JointPattern)>,
}

impl<'a, 'o> Search<'a, 'o> {
    fn new(
        w: &'a Workflow,
        cfg: &'a SolverConfig,
        start: Instant,
        observer: Option<&'o mut dyn FnMut(&JointPattern)>,
    ) -> Self {
        let depth = w.depth();
        let k = w.num_steps();
        let mut watch = vec![vec![Vec::new(); k]; depth];
        for (i, c) in w.constraints().iter().enumerate() {
            let q = c.level(depth);
            for s in c.scope() {
                watch[q - 1][s.0].push(i);
            }
        }
        let words = w.num_users().div_ceil(64);
        let mut step_users = vec![vec![0u64; words]; k];
        for u in w.users() {
            for s in w.authorized_steps(u).iter() {
                step_users[s.0][u.0 / 64] |= 1u64 << (u.0 % 64);
            }
        }
        Search {
            w,
            cfg,
            depth,
            k,
            labels: vec![vec![0; k]; depth],
            watch,
            weights: compute_weights(w, cfg.level_equiv_weight_factor),
            words,
            step_users,
            label_users: vec![vec![0u64; words]; k + 2],
            deadline: cfg.timeout.map(|t| start + t),
            timed_out: false,
            witness: None,
            stats: SolveStats::default(),
            observer,
        }
    }

    fn run(&mut self) -> Option<Plan> {
        self.descend();
        self.witness.take()
    }

    /// Returns `true` when the search should stop.
    fn descend(&mut self) -> bool {
        self.stats.nodes += 1;
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.timed_out = true;
                return true;
            }
        }
        let Some(level) = (0..self.depth).rev().find(|&l| self.labels[l].contains(&0)) else {
            return self.leaf();
        };
        let j = self.choose(level);
        let finest = level + 1 == self.depth;
        let block: Vec<usize> = if finest {
            vec![j]
        } else {
            let x = self.labels[level + 1][j];
            (0..self.k).filter(|&i| self.labels[level + 1][i] == x).collect()
        };
        let max = self.labels[level].iter().copied().max().unwrap_or(0);
        let mut saved = vec![0u64; self.words];
        for a in 1..=max + 1 {
            if finest && self.cfg.pruning {
                saved.copy_from_slice(&self.label_users[a as usize]);
                let fresh = a == max + 1;
                let mut any = false;
                for (dst, (&prev, &users)) in self.label_users[a as usize]
                    .iter_mut()
                    .zip(saved.iter().zip(&self.step_users[j]))
                {
                    *dst = if fresh { users } else { prev & users };
                    any |= *dst != 0;
                }
                if !any {
                    self.label_users[a as usize].copy_from_slice(&saved);
                    continue;
                }
            }
            for &i in &block {
                self.labels[level][i] = a;
            }
            let stop = if !self.cfg.pruning || self.eligible_after(level, &block) {
                self.descend()
            } else {
                false
            };
            for &i in &block {
                self.labels[level][i] = 0;
            }
            if finest && self.cfg.pruning {
                self.label_users[a as usize].copy_from_slice(&saved);
            }
            if stop {
                return true;
            }
        }
        false
    }

    fn choose(&self, level: usize) -> usize {
        let zeros = (0..self.k).filter(|&i| self.labels[level][i] == 0);
        if self.cfg.heuristic {
            // max weight, lowest index on ties
            zeros
                .rev()
                .max_by_key(|&i| self.weights[level][i])
                .expect("level has a zero coordinate")
        } else {
            zeros.min().expect("level has a zero coordinate")
        }
    }

    fn eligible_after(&self, level: usize, block: &[usize]) -> bool {
        let labels = &self.labels[level];
        block.iter().all(|&s| {
            self.watch[level][s]
                .iter()
                .all(|&c| self.w.constraints()[c].pattern_eligible(labels))
        })
    }

    fn fully_eligible(&self) -> bool {
        let depth = self.depth;
        self.w
            .constraints()
            .iter()
            .all(|c| c.pattern_eligible(&self.labels[c.level(depth) - 1]))
    }

    fn leaf(&mut self) -> bool {
        self.stats.complete_patterns += 1;
        let jp = JointPattern::new(
            self.labels
                .iter()
                .map(|row| LevelPattern::new(row.clone()))
                .collect(),
        )
        .expect("search keeps levels the same length");
        if let Some(observer) = self.observer.as_mut() {
            observer(&jp);
        }
        if !self.cfg.pruning && !self.fully_eligible() {
            return false;
        }
        self.stats.realize_calls += 1;
        let mut realizer = Realizer::new(self.w, &jp).expect("search builds consistent patterns");
        let plan = realizer.realize();
        self.stats.edge_queries += realizer.edge_queries();
        if let Some(plan) = plan {
            debug_assert!(self.w.is_valid(&plan).unwrap_or(false));
            if self.witness.is_none() {
                self.witness = Some(plan);
            }
            return !self.cfg.count_patterns;
        }
        false
    }
}

/// Step ids with the largest weight at the given level, in choice order.
pub fn choice_order(w: &Workflow, cfg: &SolverConfig, level: usize) -> Vec<StepId> {
    let weights = compute_weights(w, cfg.level_equiv_weight_factor);
    let mut steps: Vec<usize> = (0..w.num_steps()).collect();
    if cfg.heuristic {
        steps.sort_by(|&a, &b| weights[level - 1][b].cmp(&weights[level - 1][a]).then(a.cmp(&b)));
    }
    steps.into_iter().map(StepId).collect()
}
