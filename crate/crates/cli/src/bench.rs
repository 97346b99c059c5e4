//! Parameter grid runs: seven at-most counts by five different-class counts
//! per step count, one instance per cell and seed.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use wsp_core::generator::{generate, GenParams};
use wsp_core::{solve, SolveStats, SolverConfig, Verdict};

use crate::{stats_line, timeout_from_secs};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["20", "25", "30"]))]
    k: String,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Added to the seed index before deriving per-cell seeds.
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    /// Per-instance limit in seconds.
    #[arg(long, env = "WSP_TIMEOUT", default_value_t = 300.0)]
    timeout: f64,
    /// Comma-separated rows; the aligned table always goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 picks one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Grid cells for `k`: at-most counts `k-10, k-5, ..., k+20` crossed with
/// different-class counts `k-10, ..., k+10`.
pub fn grid(k: usize, seed: u64) -> Vec<GenParams> {
    let same_class = match k {
        20 => 0,
        25 => 1,
        _ => 2,
    };
    let mut cells = Vec::with_capacity(35);
    for a in 0..7 {
        for d in 0..5 {
            let cell = cells.len() as u64;
            let mut p = GenParams::new(k, seed * 1000 + cell);
            p.not_equals = k;
            p.at_most = k - 10 + 5 * a;
            p.same_class = same_class;
            p.different_class = k - 10 + 5 * d;
            cells.push(p);
        }
    }
    cells
}

struct Row {
    key: (usize, usize, usize, usize, u64),
    label: String,
    seed: u64,
    verdict: &'static str,
    time: f64,
    stats: SolveStats,
    stats_text: String,
}

fn verdict_mark(v: &Verdict) -> &'static str {
    match v {
        Verdict::Sat(_) => "Y",
        Verdict::Unsat => "N",
        Verdict::Timeout => "?",
    }
}

fn run_cell(p: &GenParams, cfg: &SolverConfig) -> Result<Row> {
    let w = generate(p).with_context(|| format!("generating {}", p.label()))?;
    let res = solve(&w, cfg)?;
    if let Verdict::Sat(plan) = &res.verdict {
        if !w.is_valid(plan)? {
            bail!("solver returned an invalid plan for {}", p.label());
        }
    }
    Ok(Row {
        key: (p.not_equals, p.at_most, p.same_class, p.different_class, p.seed),
        label: p.label(),
        seed: p.seed,
        verdict: verdict_mark(&res.verdict),
        time: res.stats.elapsed.as_secs_f64(),
        stats_text: stats_line(&res),
        stats: res.stats,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let k: usize = args.k.parse()?;
    let cfg = SolverConfig {
        timeout: timeout_from_secs(Some(args.timeout))?,
        ..SolverConfig::default()
    };
    let cells: Vec<GenParams> = (0..args.seeds)
        .flat_map(|i| grid(k, args.seed_base + i))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let mut rows = pool.install(|| {
        cells
            .par_iter()
            .map(|p| run_cell(p, &cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by_key(|r| r.key);

    let mut table = String::new();
    writeln!(table, "{:<14} {:>8} {:>3} {:>10}  stats", "instance", "seed", "", "time_s")?;
    for r in &rows {
        writeln!(table, "{:<14} {:>8} {:>3} {:>10.3}  {}", r.label, r.seed, r.verdict, r.time, r.stats_text)?;
    }
    let count = |v: &str| rows.iter().filter(|r| r.verdict == v).count();
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let mean = if times.is_empty() { 0.0 } else { times.iter().sum::<f64>() / times.len() as f64 };
    let max = times.iter().copied().fold(0.0, f64::max);
    writeln!(
        table,
        "instances={} Y={} N={} ?={} mean_time={:.3} median_time={:.3} max_time={:.3}",
        rows.len(),
        count("Y"),
        count("N"),
        count("?"),
        mean,
        median(times),
        max
    )?;
    print!("{table}");

    if let Some(out) = &args.out {
        let mut csv = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
        csv.write_record([
            "label", "seed", "verdict", "time_s", "nodes", "complete_patterns", "realize_calls", "edge_queries",
        ])?;
        for r in &rows {
            let s = &r.stats;
            csv.write_record([
                r.label.clone(),
                r.seed.to_string(),
                r.verdict.to_string(),
                format!("{:.6}", r.time),
                s.nodes.to_string(),
                s.complete_patterns.to_string(),
                s.realize_calls.to_string(),
                s.edge_queries.to_string(),
            ])?;
        }
        csv.flush()?;
    }
    Ok(())
}
