use std::time::Instant;

use lidarp::exact::{solve_fpt_capped, SolveError, DEFAULT_ROUTE_CAP};
use lidarp::model::{Instance, Solution};
use lidarp::multicover::solve_xp_capped;
use lidarp::oracle::{brute_solve, OracleError, OracleLimits};
use lidarp::polycase::{poly_case, solve_minturn_poly, PolyError};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Auto,
    Poly,
    Fpt,
    Xp,
    Brute,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Poly => "poly",
            Algo::Fpt => "fpt",
            Algo::Xp => "xp",
            Algo::Brute => "brute",
        }
    }
}

/// Why a solver produced no answer. All of these map to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refusal {
    NotApplicable,
    BudgetExceeded,
    LimitsExceeded,
}

#[derive(Debug)]
pub struct Refused {
    pub algo: Algo,
    pub kind: Refusal,
    pub reason: String,
}

impl std::fmt::Display for Refused {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.algo.name(), self.reason)
    }
}

impl std::error::Error for Refused {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algo,
    pub requests: usize,
    pub max_served: usize,
    pub tau: usize,
    pub wall_ms: f64,
    /// Feasible routes (fpt), covers (xp) or routes checked (brute).
    pub routes_explored: Option<u64>,
    pub collections_explored: Option<u64>,
    pub budget_cap: Option<u64>,
    pub budget_exceeded: bool,
    pub detail: Option<String>,
}

pub struct Outcome {
    pub report: RunReport,
    pub solution: Solution,
}

/// Route-prefix cap from `LIDARP_BUDGET`, or the library default.
pub fn budget_from_env() -> anyhow::Result<u64> {
    match std::env::var("LIDARP_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("LIDARP_BUDGET must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_ROUTE_CAP),
    }
}

fn refused(algo: Algo, kind: Refusal, reason: impl ToString) -> Refused {
    Refused { algo, kind, reason: reason.to_string() }
}

fn from_solve(algo: Algo, e: SolveError) -> Refused {
    match e {
        SolveError::BudgetExceeded { .. } => refused(algo, Refusal::BudgetExceeded, e),
        _ => refused(algo, Refusal::NotApplicable, e),
    }
}

fn base(algo: Algo, inst: &Instance) -> RunReport {
    RunReport {
        algorithm: algo,
        requests: inst.len(),
        max_served: 0,
        tau: 0,
        wall_ms: 0.0,
        routes_explored: None,
        collections_explored: None,
        budget_cap: None,
        budget_exceeded: false,
        detail: None,
    }
}

fn run_one(algo: Algo, inst: &Instance, cap: u64) -> Result<Outcome, Refused> {
    let mut report = base(algo, inst);
    let solution = match algo {
        Algo::Poly => {
            let r = solve_minturn_poly(inst).map_err(|e| match e {
                PolyError::Windowed | PolyError::NotPolyCase => refused(algo, Refusal::NotApplicable, e),
            })?;
            report.max_served = inst.len();
            report.tau = r.tau;
            report.detail = Some(format!(
                "{:?}; {} ascending and {} descending subroutes",
                r.case, r.ascending_subroutes, r.descending_subroutes
            ));
            r.solution
        }
        Algo::Xp => {
            report.budget_cap = Some(cap);
            let r = solve_xp_capped(inst, cap).map_err(|e| from_solve(algo, e))?;
            report.max_served = r.max_served;
            report.tau = r.tau;
            report.routes_explored = Some(r.covers as u64);
            report.detail = Some(format!(
                "{} ascending and {} descending subroutes",
                r.ascending_subroutes, r.descending_subroutes
            ));
            r.solution
        }
        Algo::Fpt => {
            report.budget_cap = Some(cap);
            let r = solve_fpt_capped(inst, cap).map_err(|e| from_solve(algo, e))?;
            report.max_served = r.max_served;
            report.tau = r.tau;
            report.routes_explored = Some(r.stats.routes as u64);
            report.collections_explored = Some(r.stats.collections);
            report.detail = Some(format!(
                "{} route prefixes, {} duplicate requests dropped by the kernel",
                r.stats.nodes, r.stats.kernel_dropped
            ));
            r.solution
        }
        Algo::Brute => {
            let r = brute_solve(inst, &OracleLimits::default()).map_err(|e| match e {
                OracleError::LimitsExceeded(_) => refused(algo, Refusal::LimitsExceeded, e),
            })?;
            report.max_served = r.max_served;
            report.tau = r.tau;
            report.routes_explored = Some(r.routes_checked);
            r.solution
        }
        Algo::Auto => unreachable!("auto is dispatched by solve"),
    };
    Ok(Outcome { report, solution })
}

/// Runs `algo`; `auto` tries the polynomial cases, then xp without windows,
/// then fpt with a finite horizon, then the brute-force oracle.
pub fn solve(algo: Algo, inst: &Instance, cap: u64) -> Result<Outcome, Refused> {
    let start = Instant::now();
    let mut out = if algo == Algo::Auto {
        auto(inst, cap)
    } else {
        run_one(algo, inst, cap)
    }?;
    out.report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(out)
}

fn auto(inst: &Instance, cap: u64) -> Result<Outcome, Refused> {
    if poly_case(inst).is_some() {
        return run_one(Algo::Poly, inst, cap);
    }
    let first = if !inst.has_time_windows() {
        Some(Algo::Xp)
    } else if inst.horizon().is_some() {
        Some(Algo::Fpt)
    } else {
        None
    };
    let mut budget_hit = None;
    if let Some(a) = first {
        match run_one(a, inst, cap) {
            Ok(o) => return Ok(o),
            Err(r) if r.kind == Refusal::BudgetExceeded => budget_hit = Some(r),
            Err(r) => return Err(r),
        }
    }
    match run_one(Algo::Brute, inst, cap) {
        Ok(mut o) => {
            if let Some(b) = budget_hit {
                o.report.budget_exceeded = true;
                o.report.detail = Some(format!("fell back to brute force after {b}"));
            }
            Ok(o)
        }
        // report the budget failure rather than the oracle limits
        Err(r) => Err(budget_hit.unwrap_or(r)),
    }
}
