//! Brute-force reference answers by exhaustive enumeration.

use crate::error::{Result, WspError};
use crate::model::{Plan, UserId, Workflow};
use crate::patterns::JointPattern;
use crate::pb::PbDocument;

pub const DEFAULT_PLAN_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// First valid plan in enumeration order.
    pub witness: Option<Plan>,
    pub valid_plans: u64,
    pub plans_examined: u64,
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        self.witness.is_some()
    }
}

fn plan_count(w: &Workflow, cap: u64) -> Result<u64> {
    let n = w.num_users() as u64;
    let mut total: u64 = 1;
    for _ in 0..w.num_steps() {
        total = total.checked_mul(n).filter(|&t| t <= cap).ok_or_else(|| {
            WspError::Guard(format!(
                "{}^{} plans exceeds the cap of {cap}",
                w.num_users(),
                w.num_steps()
            ))
        })?;
    }
    Ok(total)
}

/// Visits all `n^k` plans in lexicographic order (step 1 most significant).
fn for_each_plan(w: &Workflow, mut visit: impl FnMut(&Plan)) {
    let k = w.num_steps();
    let n = w.num_users();
    let mut users = vec![0usize; k];
    loop {
        visit(&Plan::new(users.iter().map(|&u| UserId(u)).collect()));
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            users[i] += 1;
            if users[i] < n {
                break;
            }
            users[i] = 0;
        }
    }
}

pub fn brute_force_solve(w: &Workflow, cap: u64) -> Result<OracleResult> {
    let total = plan_count(w, cap)?;
    let mut result = OracleResult {
        witness: None,
        valid_plans: 0,
        plans_examined: 0,
    };
    for_each_plan(w, |plan| {
        result.plans_examined += 1;
        if w.is_valid(plan).expect("enumerated plans are well-formed") {
            result.valid_plans += 1;
            if result.witness.is_none() {
                result.witness = Some(plan.clone());
            }
        }
    });
    debug_assert_eq!(result.plans_examined, total);
    Ok(result)
}

/// Some authorized plan has canonical joint pattern equal to `jp`'s.
pub fn brute_force_realizable(w: &Workflow, jp: &JointPattern, cap: u64) -> Result<bool> {
    plan_count(w, cap)?;
    let target = jp.canonicalize();
    let mut found = false;
    for_each_plan(w, |plan| {
        if !found
            && w.is_authorized(plan).unwrap_or(false)
            && JointPattern::of_plan(w, plan).is_ok_and(|p| p == target)
        {
            found = true;
        }
    });
    Ok(found)
}

/// A partition of `{0..k}` as a restricted growth string: `rgs[0] = 0` and
/// each entry is at most one more than the maximum before it.
pub type Rgs = Vec<u8>;

/// All set partitions of a `k`-set, lexicographic in RGS order.
pub fn set_partitions(k: usize) -> Vec<Rgs> {
    fn go(prefix: &mut Rgs, max: u8, k: usize, out: &mut Vec<Rgs>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for x in 0..=limit {
            prefix.push(x);
            go(prefix, max.max(x), k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(k), 0, k, &mut out);
    out
}

/// `fine` refines `coarse`: equal fine blocks imply equal coarse blocks.
pub fn refines(fine: &Rgs, coarse: &Rgs) -> bool {
    (0..fine.len()).all(|i| (0..i).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}

/// Every chain `(P_1, ..., P_r)` of partitions of a `k`-set where each
/// `P_{i+1}` refines `P_i`.
pub fn enumerate_nested_partitions(k: usize, r: usize) -> Result<Vec<Vec<Rgs>>> {
    if k > 7 || r > 4 {
        return Err(WspError::Guard(format!("k = {k}, r = {r} exceeds k <= 7, r <= 4")));
    }
    if r == 0 {
        return Ok(vec![Vec::new()]);
    }
    let all = set_partitions(k);
    let mut chains: Vec<Vec<Rgs>> = all.iter().map(|p| vec![p.clone()]).collect();
    for _ in 1..r {
        let mut next = Vec::new();
        for chain in &chains {
            let last = chain.last().unwrap();
            for p in &all {
                if refines(p, last) {
                    let mut longer = chain.clone();
                    longer.push(p.clone());
                    next.push(longer);
                }
            }
        }
        chains = next;
    }
    Ok(chains)
}

/// Bell number `B(k)` by the Bell triangle.
pub fn bell(k: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            next.push(next.last().unwrap() + x);
        }
        row = next;
    }
    row[0]
}

/// `(r + 1)^(k - 1) * k^(k - 2)`, the tree-count bound on nested partitions.
pub fn nested_partition_bound(k: usize, r: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    ((r + 1) as f64).powi(k as i32 - 1) * (k as f64).powi(k as i32 - 2)
}

/// Exhaustive search for an assignment satisfying a PB document.
pub fn brute_force_pb_satisfiable(doc: &PbDocument, max_vars: usize) -> Result<Option<Vec<bool>>> {
    let n = doc.num_vars();
    if n > max_vars {
        return Err(WspError::Guard(format!("{n} PB variables exceeds {max_vars}")));
    }
    let mut assignment = vec![false; n];
    for bits in 0u64..(1u64 << n) {
        for (i, v) in assignment.iter_mut().enumerate() {
            *v = bits >> i & 1 == 1;
        }
        if doc.is_satisfied_by(&assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}
