use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wsp_core::generator::{generate, GenParams};
use wsp_core::io::{parse_instance, parse_plan, write_instance, write_plan};
use wsp_core::oracle::{brute_force_solve, DEFAULT_PLAN_CAP};
use wsp_core::{pb, solve, SolveResult, SolverConfig, Verdict, Workflow};

mod bench;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_TIMEOUT: u8 = 30;
const EXIT_ERROR: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "wsp", version, about = "Workflow satisfiability solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide an instance; exit 10 SAT, 20 UNSAT, 30 timeout, 1 error.
    Solve(SolveArgs),
    /// Check a plan; exit 0 valid, 2 invalid, 1 malformed input.
    Validate { instance: PathBuf, plan: PathBuf },
    /// Write a random instance and print its a.b.c.d label.
    Generate(GenerateArgs),
    /// Write the pseudo-Boolean encoding in OPB format.
    Encode {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the parameter grid for one step count.
    Bench(bench::BenchArgs),
    /// Enumerate every plan (small instances only).
    #[command(hide = true)]
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PLAN_CAP)]
        cap: u64,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Wall-clock limit in seconds.
    #[arg(long, env = "WSP_TIMEOUT")]
    timeout: Option<f64>,
    #[arg(long)]
    no_heuristic: bool,
    /// Explore the whole pattern space and report how many complete patterns it holds.
    #[arg(long)]
    count_patterns: bool,
    /// Where to write the witness plan.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    not_equals: usize,
    #[arg(long, default_value_t = 0)]
    at_most: usize,
    #[arg(long, default_value_t = 0)]
    same_class: usize,
    #[arg(long, default_value_t = 0)]
    different_class: usize,
    #[arg(long, default_value_t = 3)]
    at_most_limit: usize,
    #[arg(long, default_value_t = 5)]
    at_most_size: usize,
    #[arg(long)]
    max_auth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance path; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GenerateArgs {
    fn params(&self) -> GenParams {
        GenParams {
            k: self.k,
            n: self.n,
            num_classes: self.classes,
            not_equals: self.not_equals,
            at_most: self.at_most,
            same_class: self.same_class,
            different_class: self.different_class,
            at_most_limit: self.at_most_limit,
            at_most_size: self.at_most_size,
            max_auth: self.max_auth,
            seed: self.seed,
        }
    }
}

fn read_instance(path: &Path) -> Result<Workflow> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(crate) fn timeout_from_secs(secs: Option<f64>) -> Result<Option<Duration>> {
    match secs {
        None => Ok(None),
        Some(s) if s.is_finite() && s >= 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => bail!("timeout must be a nonnegative number of seconds, got {s}"),
    }
}

pub(crate) fn stats_line(res: &SolveResult) -> String {
    let s = &res.stats;
    format!(
        "nodes={} complete_patterns={} realize_calls={} edge_queries={}",
        s.nodes, s.complete_patterns, s.realize_calls, s.edge_queries
    )
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let w = read_instance(&args.instance)?;
    let cfg = SolverConfig {
        heuristic: !args.no_heuristic,
        timeout: timeout_from_secs(args.timeout)?,
        count_patterns: args.count_patterns,
        ..SolverConfig::default()
    };
    let res = solve(&w, &cfg)?;
    println!("{}", res.verdict.name());
    println!("time {:.3}", res.stats.elapsed.as_secs_f64());
    println!("{}", stats_line(&res));
    Ok(match &res.verdict {
        Verdict::Sat(plan) => {
            println!("plan {plan}");
            if let Some(out) = &args.output {
                write_output(Some(out), &write_plan(plan))?;
            }
            EXIT_SAT
        }
        Verdict::Unsat => EXIT_UNSAT,
        Verdict::Timeout => EXIT_TIMEOUT,
    })
}

fn cmd_validate(instance: &Path, plan: &Path) -> Result<u8> {
    let w = read_instance(instance)?;
    let text = fs::read_to_string(plan).with_context(|| format!("reading {}", plan.display()))?;
    let plan = parse_plan(&text, w.num_steps()).with_context(|| format!("parsing {}", plan.display()))?;
    if plan.users().iter().any(|u| u.0 >= w.num_users()) {
        bail!("plan names a user outside 1..={}", w.num_users());
    }
    let mut ok = true;
    for s in w.unauthorized_steps(&plan) {
        ok = false;
        println!("unauthorized: {} -> {}", s, plan.get(s));
    }
    for i in w.violated_constraints(&plan) {
        ok = false;
        println!("violated: {}", w.constraints()[i]);
    }
    if ok {
        println!("valid");
        Ok(0)
    } else {
        println!("invalid");
        Ok(EXIT_INVALID)
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let params = args.params();
    let w = generate(&params)?;
    let text = write_instance(&w);
    match &args.out {
        Some(out) => {
            write_output(Some(out), &text)?;
            println!("{}", params.label());
        }
        None => {
            print!("{text}");
            eprintln!("{}", params.label());
        }
    }
    Ok(0)
}

fn cmd_encode(instance: &Path, out: Option<&Path>) -> Result<u8> {
    let w = read_instance(instance)?;
    let doc = pb::encode(&w)?;
    write_output(out, &doc.to_opb())?;
    if out.is_some() {
        println!("variables={} constraints={}", doc.num_vars(), doc.num_constraints());
    }
    Ok(0)
}

fn cmd_oracle(instance: &Path, cap: u64) -> Result<u8> {
    let w = read_instance(instance)?;
    let res = brute_force_solve(&w, cap)?;
    println!("{}", if res.is_sat() { "SAT" } else { "UNSAT" });
    println!("valid_plans={} plans_examined={}", res.valid_plans, res.plans_examined);
    Ok(match &res.witness {
        Some(plan) => {
            println!("plan {plan}");
            EXIT_SAT
        }
        None => EXIT_UNSAT,
    })
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Validate { instance, plan } => cmd_validate(instance, plan),
        Command::Generate(args) => cmd_generate(args),
        Command::Encode { instance, out } => cmd_encode(instance, out.as_deref()),
        Command::Bench(args) => bench::run(args).map(|_| 0),
        Command::Oracle { instance, cap } => cmd_oracle(instance, *cap),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
