//! `lidarp`: solve, verify, generate and benchmark line-based dial-a-ride instances.
//!
//! Exit codes: 0 ok, 1 input error, 2 not applicable or budget/limits hit,
//! 3 verification failed.

mod bench;
mod solve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use lidarp::feasibility::{verify_solution, ViolationKind};
use lidarp::model::{Instance, Solution, ThreePartitionInstance};
use lidarp::reductions::{
    gen_gap, gen_service_time, gen_shortcut, gen_time_windows, solve_3partition, witness_solution,
    ReductionKind,
};
use serde_json::json;

use solve::{budget_from_env, Algo, Refused};

#[derive(Parser)]
#[command(name = "lidarp", version, about = "Exact turn minimization for line-based dial-a-ride")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance: serve as many requests as possible with the fewest turns.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        algo: Algo,
        /// Print a single-line JSON report.
        #[arg(long)]
        json: bool,
        /// Write the witness solution here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a hardness instance from a 3-Partition input.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Comma-separated values, e.g. 4,4,4,4,4,6.
        #[arg(long)]
        set: String,
        #[arg(long)]
        m: usize,
        #[arg(long = "T")]
        target: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        c: usize,
        /// Construction underneath the gap instance.
        #[arg(long, value_enum, default_value = "servicetime")]
        base: GapBase,
        /// Instance file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sidecar file with role tags and expected values.
        #[arg(long)]
        meta: Option<PathBuf>,
        /// For yes-inputs, also write the partition witness solution.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Solve every *.json instance in a directory and print a CSV summary.
    Bench {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        algo: Algo,
        /// Per-instance limit in seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        /// Print one JSON document with rows and reports instead of CSV.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    #[value(name = "3p-servicetime")]
    ServiceTime,
    #[value(name = "3p-shortcut")]
    Shortcut,
    #[value(name = "3p-timewindows")]
    TimeWindows,
    #[value(name = "3p-gap")]
    Gap,
}

#[derive(Clone, Copy, ValueEnum)]
enum GapBase {
    Servicetime,
    Shortcut,
}

/// An error with an exit code other than 1.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let Some(Exit(code)) = e.downcast_ref::<Exit>() {
                return ExitCode::from(*code);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Refused>().is_some() { 2 } else { 1 })
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<u8> {
    match cmd {
        Cmd::Solve { file, algo, json, out } => cmd_solve(&file, algo, json, out.as_deref()),
        Cmd::Verify { instance, solution, json } => cmd_verify(&instance, &solution, json),
        Cmd::Gen { kind, set, m, target, k, c, base, out, meta, witness } => {
            cmd_gen(kind, &set, m, target, k, c, base, out.as_deref(), meta.as_deref(), witness.as_deref())
        }
        Cmd::Bench { dir, algo, timeout, json } => cmd_bench(&dir, algo, timeout, json),
    }
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("invalid instance {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(file: &Path, algo: Algo, json: bool, out: Option<&Path>) -> anyhow::Result<u8> {
    let failed = |status: &str, msg: String, code: u8| -> anyhow::Result<u8> {
        if json {
            println!("{}", json!({ "status": status, "algorithm": algo, "error": msg }));
        }
        eprintln!("error: {msg}");
        Err(Exit(code).into())
    };
    let inst = match read_instance(file) {
        Ok(i) => i,
        Err(e) => return failed("invalid", format!("{e:#}"), 1),
    };
    let cap = match budget_from_env() {
        Ok(c) => c,
        Err(e) => return failed("invalid", format!("{e:#}"), 1),
    };
    let outcome = match solve::solve(algo, &inst, cap) {
        Ok(o) => o,
        Err(r) => {
            let status = serde_json::to_value(&r.kind)?;
            return failed(status.as_str().unwrap_or("not_applicable"), r.to_string(), 2);
        }
    };
    if let Some(p) = out {
        std::fs::write(p, outcome.solution.to_json()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let r = &outcome.report;
    if json {
        println!("{}", serde_json::to_string(r)?);
    } else {
        println!("algorithm   {}", r.algorithm.name());
        println!("served      {} / {}", r.max_served, r.requests);
        println!("max turns   {}", r.tau);
        println!("time        {:.3} ms", r.wall_ms);
        if let Some(n) = r.routes_explored {
            println!("routes      {n}");
        }
        if let Some(n) = r.collections_explored {
            println!("collections {n}");
        }
        if let Some(d) = &r.detail {
            println!("note        {d}");
        }
    }
    Ok(0)
}

fn cmd_verify(instance: &Path, solution: &Path, json: bool) -> anyhow::Result<u8> {
    let inst = read_instance(instance)?;
    let text = std::fs::read_to_string(solution).with_context(|| format!("cannot read {}", solution.display()))?;
    let sol = Solution::from_json(&text).with_context(|| format!("invalid solution {}", solution.display()))?;
    let report = verify_solution(&sol, &inst);
    if report.has(ViolationKind::UnknownRequest) {
        let v = report.violations.iter().find(|v| v.kind == ViolationKind::UnknownRequest).unwrap();
        bail!("solution does not match the instance: {v}");
    }
    if json {
        let mut doc = serde_json::to_value(&report)?;
        doc["clean"] = json!(report.is_clean());
        println!("{doc}");
    } else {
        println!("served {} of {}, max turns {}", report.served, inst.len(), report.max_turns);
        for v in &report.violations {
            println!("violation: {v}");
        }
        if report.is_clean() {
            println!("clean");
        }
    }
    Ok(if report.is_clean() { 0 } else { 3 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    kind: GenKind,
    set: &str,
    m: usize,
    target: u64,
    k: usize,
    c: usize,
    base: GapBase,
    out: Option<&Path>,
    meta: Option<&Path>,
    witness: Option<&Path>,
) -> anyhow::Result<u8> {
    let values = set
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| anyhow!("--set: {s:?} is not a non-negative integer")))
        .collect::<anyhow::Result<Vec<u64>>>()?;
    let tp = ThreePartitionInstance::new(values, m, target)?;
    let red = match kind {
        GenKind::ServiceTime => gen_service_time(&tp, k, c),
        GenKind::Shortcut => gen_shortcut(&tp, k, c),
        GenKind::TimeWindows => gen_time_windows(&tp, k, c),
        GenKind::Gap => gen_gap(
            &tp,
            c,
            match base {
                GapBase::Servicetime => ReductionKind::ServiceTime,
                GapBase::Shortcut => ReductionKind::Shortcut,
            },
        ),
    }?;
    write_or_print(out, &red.instance.to_json())?;
    if let Some(p) = meta {
        std::fs::write(p, red.meta_json()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let partition = solve_3partition(&tp);
    if let Some(p) = witness {
        let Some(part) = &partition else {
            bail!("--witness: the 3-Partition input has no solution");
        };
        std::fs::write(p, witness_solution(&red, part)?.to_json())
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    eprintln!(
        "{} requests on {} stops, {} vehicles; partition {}; tau {} if yes",
        red.total_requests(),
        red.instance.line.stops(),
        red.instance.vehicles,
        if partition.is_some() { "exists" } else { "does not exist" },
        red.expected_tau_yes
    );
    Ok(0)
}

fn cmd_bench(dir: &Path, algo: Algo, timeout: f64, json: bool) -> anyhow::Result<u8> {
    if !(timeout.is_finite() && timeout > 0.0) {
        bail!("--timeout must be a positive number of seconds");
    }
    let timeout = Duration::from_secs_f64(timeout);
    let files = bench::instance_files(dir)?;
    let mut rows = Vec::with_capacity(files.len());
    for f in &files {
        rows.push(bench::bench_file(f, algo, timeout)?);
    }
    if json {
        println!("{}", json!({ "columns": bench::CSV_HEADER.split(',').collect::<Vec<_>>(), "rows": rows }));
    } else {
        print!("{}", bench::render_csv(&rows));
    }
    if rows.is_empty() || rows.iter().any(bench::Row::ok) {
        Ok(0)
    } else if rows.iter().all(|r| r.status == "invalid") {
        Ok(1)
    } else {
        Ok(2)
    }
}
