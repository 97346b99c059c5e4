//! Seeded random instances in the style of the published benchmark grid.
//!
//! All randomness comes from a ChaCha8 stream seeded with the 64-bit seed,
//! so an instance is a pure function of its parameters.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::Constraint;
use crate::error::{Result, WspError};
use crate::model::{EquivalenceHierarchy, StepId, Workflow};

pub const MIN_CLASS_SIZE: usize = 3;
pub const MAX_CLASS_SIZE: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub k: usize,
    /// Defaults to `10 k`.
    pub n: Option<usize>,
    /// Defaults to `2 k`; clamped to what sizes in 3..=7 allow.
    pub num_classes: Option<usize>,
    pub not_equals: usize,
    pub at_most: usize,
    pub same_class: usize,
    pub different_class: usize,
    pub at_most_limit: usize,
    pub at_most_size: usize,
    /// Largest authorization list; each user draws a size uniformly from
    /// `1..=max_auth`. Defaults to `max(1, k / 2)`.
    pub max_auth: Option<usize>,
    pub seed: u64,
}

impl GenParams {
    pub fn new(k: usize, seed: u64) -> Self {
        GenParams {
            k,
            n: None,
            num_classes: None,
            not_equals: 0,
            at_most: 0,
            same_class: 0,
            different_class: 0,
            at_most_limit: 3,
            at_most_size: 5,
            max_auth: None,
            seed,
        }
    }

    pub fn users(&self) -> usize {
        self.n.unwrap_or(10 * self.k)
    }

    pub fn classes(&self) -> usize {
        self.num_classes.unwrap_or(2 * self.k)
    }

    pub fn auth_bound(&self) -> usize {
        self.max_auth.unwrap_or((self.k / 2).max(1))
    }

    /// `a.b.c.d`: not-equals, at-most, same-class and different-class counts.
    pub fn label(&self) -> String {
        format!(
            "{}.{}.{}.{}",
            self.not_equals, self.at_most, self.same_class, self.different_class
        )
    }

    fn check(&self) -> Result<()> {
        let infeasible = |msg: String| Err(WspError::Infeasible(msg));
        let k = self.k;
        let n = self.users();
        let pairs = k * k.saturating_sub(1) / 2;
        if k == 0 {
            return infeasible("k must be positive".into());
        }
        if n < k {
            return infeasible(format!("n = {n} is smaller than k = {k}"));
        }
        if self.auth_bound() == 0 || self.auth_bound() > k {
            return infeasible(format!("max_auth must lie in 1..={k}"));
        }
        if self.not_equals > pairs {
            return infeasible(format!("{} not-equals constraints but only {pairs} step pairs", self.not_equals));
        }
        if self.same_class > pairs {
            return infeasible(format!("{} same-class constraints but only {pairs} step pairs", self.same_class));
        }
        if self.different_class > pairs - self.same_class {
            return infeasible(format!(
                "{} different-class constraints but only {} pairs free of same-class constraints",
                self.different_class,
                pairs - self.same_class
            ));
        }
        if self.at_most > 0 {
            if self.at_most_limit == 0 || self.at_most_limit > self.at_most_size {
                return infeasible(format!(
                    "at-most limit {} must lie in 1..={}",
                    self.at_most_limit, self.at_most_size
                ));
            }
            if self.at_most_size > k {
                return infeasible(format!("at-most scope of {} steps exceeds k = {k}", self.at_most_size));
            }
            if (self.at_most as u128) > binomial(k, self.at_most_size) {
                return infeasible(format!(
                    "{} distinct at-most scopes requested, only {} exist",
                    self.at_most,
                    binomial(k, self.at_most_size)
                ));
            }
        }
        Ok(())
    }
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Block sizes in `3..=7` summing to `n`, drawn uniformly and then adjusted
/// from the last block backwards.
pub fn class_sizes(n: usize, target: usize, rng: &mut impl Rng) -> Vec<usize> {
    if n < MIN_CLASS_SIZE {
        return vec![n];
    }
    let count = target.clamp(n.div_ceil(MAX_CLASS_SIZE), (n / MIN_CLASS_SIZE).max(1));
    let mut sizes: Vec<usize> = (0..count)
        .map(|_| rng.gen_range(MIN_CLASS_SIZE..=MAX_CLASS_SIZE))
        .collect();
    let mut diff = n as i64 - sizes.iter().sum::<usize>() as i64;
    for size in sizes.iter_mut().rev() {
        if diff > 0 {
            let add = diff.min((MAX_CLASS_SIZE - *size) as i64);
            *size += add as usize;
            diff -= add;
        } else if diff < 0 {
            let sub = (-diff).min((*size - MIN_CLASS_SIZE) as i64);
            *size -= sub as usize;
            diff += sub;
        }
    }
    debug_assert_eq!(diff, 0);
    sizes
}

pub fn generate(params: &GenParams) -> Result<Workflow> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let k = params.k;
    let n = params.users();

    let sizes = class_sizes(n, params.classes(), &mut rng);
    let mut labels = Vec::with_capacity(n);
    for (c, &size) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat_n(c, size));
    }
    let hierarchy = EquivalenceHierarchy::from_labels(n, vec![labels])?;

    let bound = params.auth_bound();
    let mut auth: Vec<Vec<StepId>> = (0..n)
        .map(|_| {
            let m = rng.gen_range(1..=bound);
            let mut steps: Vec<StepId> = sample(&mut rng, k, m).into_iter().map(StepId).collect();
            steps.sort();
            steps
        })
        .collect();
    for s in (0..k).map(StepId) {
        if !auth.iter().any(|a| a.contains(&s)) {
            let u = rng.gen_range(0..n);
            auth[u].push(s);
            auth[u].sort();
        }
    }

    let pairs: Vec<(StepId, StepId)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (StepId(i), StepId(j))))
        .collect();
    let mut constraints = Vec::new();

    for i in sample(&mut rng, pairs.len(), params.not_equals) {
        let (a, b) = pairs[i];
        constraints.push(Constraint::not_equals(a, b)?);
    }

    for scope in at_most_scopes(params, &mut rng) {
        constraints.push(Constraint::at_most(params.at_most_limit, scope)?);
    }

    let same: Vec<usize> = sample(&mut rng, pairs.len(), params.same_class).into_vec();
    for &i in &same {
        let (a, b) = pairs[i];
        constraints.push(Constraint::same_class(1, a, b)?);
    }
    let same: HashSet<usize> = same.into_iter().collect();
    let free: Vec<usize> = (0..pairs.len()).filter(|i| !same.contains(i)).collect();
    for i in sample(&mut rng, free.len(), params.different_class) {
        let (a, b) = pairs[free[i]];
        constraints.push(Constraint::different_class(1, a, b)?);
    }

    Workflow::new(k, auth, constraints, hierarchy)
}

fn at_most_scopes(params: &GenParams, rng: &mut ChaCha8Rng) -> Vec<Vec<StepId>> {
    let (k, size, count) = (params.k, params.at_most_size, params.at_most);
    if count == 0 {
        return Vec::new();
    }
    let mut seen = HashSet::new();
    let mut scopes = Vec::with_capacity(count);
    if binomial(k, size) <= 4 * count as u128 {
        // dense request: sample from the full list of subsets
        let all = subsets(k, size);
        for i in sample(rng, all.len(), count) {
            scopes.push(all[i].clone());
        }
        return scopes;
    }
    while scopes.len() < count {
        let mut scope: Vec<StepId> = sample(rng, k, size).into_iter().map(StepId).collect();
        scope.sort();
        if seen.insert(scope.clone()) {
            scopes.push(scope);
        }
    }
    scopes
}

fn subsets(k: usize, size: usize) -> Vec<Vec<StepId>> {
    fn go(start: usize, k: usize, size: usize, cur: &mut Vec<StepId>, out: &mut Vec<Vec<StepId>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(StepId(i));
            go(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, size, &mut Vec::new(), &mut out);
    out
}

/// Sizes of the level-1 classes.
pub fn class_size_histogram(w: &Workflow) -> Vec<usize> {
    let h = w.hierarchy();
    (0..h.num_classes(1)).map(|c| h.members(1, c).len()).collect()
}
