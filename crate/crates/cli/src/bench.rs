//! Median wall time of every (problem, solver) cell of a suite.
//!
//! A suite is a JSON array of problems, or an object
//! `{"solvers": [..], "problems": [..]}` whose solver list applies to every
//! problem that does not carry its own. A problem looks like
//!
//! ```json
//! {"name": "heat", "operator": "heat.mtx", "rhs": "heat_rhs.json",
//!  "tags": ["symmetric"], "mode": "none", "solvers": ["lu", "auto"]}
//! ```
//!
//! `operator` is a path (relative to the suite file), an inline JSON
//! operator, or `{"generate": {"kind": "tridiagonal", "n": 512, "seed": 0}}`.
//! `rhs` is a path or an inline JSON tree and defaults to all ones.
//! Without any solver list every solver plus `auto` is timed. Cells whose
//! solver cannot handle the operator are reported as `incompatible`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Value};
use unisolve_core::io::tree_from_json;
use unisolve_core::structure::TreeStructure;
use unisolve_core::{
    check_compatibility, linear_solve, AnySolver, Error, IterativeOptions, LinearSolver, Operator,
    Result, TagSet, TreeVector, WellPosedMode,
};

use crate::problem::{
    generate_operator, make_solver, operator_from_json, read_operator, read_tree, residual_norm,
};
use crate::Outcome;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON suite file.
    #[arg(long)]
    pub suite: PathBuf,
    /// Timed runs per cell.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Worker threads; cells are independent and run in parallel.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
}

struct BenchProblem {
    name: String,
    operator: Operator,
    rhs: TreeVector,
    mode: WellPosedMode,
    solvers: Vec<String>,
}

fn default_solvers() -> Vec<String> {
    AnySolver::NAMES
        .iter()
        .copied()
        .chain(["auto"])
        .map(String::from)
        .collect()
}

fn solver_list(value: &Value, at: &str) -> Result<Vec<String>> {
    let names = value
        .as_array()
        .ok_or_else(|| Error::Format(format!("`solvers` of {at} must be an array of names")))?;
    names
        .iter()
        .map(|v| {
            let name = v
                .as_str()
                .ok_or_else(|| Error::Format(format!("`solvers` of {at} must be an array of names")))?;
            crate::problem::parse_solver_name(name)
        })
        .collect()
}

fn parse_problem(index: usize, value: &Value, base: &Path, solvers: &[String]) -> Result<BenchProblem> {
    let at = format!("problem {index}");
    let field = |key: &str| value.get(key);
    let name = match field("name") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::Format(format!("`name` of {at} must be a string")))?
            .to_string(),
        None => at.clone(),
    };
    let tags = match field("tags") {
        None => TagSet::empty(),
        Some(Value::String(list)) => TagSet::parse_list(list)?,
        Some(Value::Array(items)) => items.iter().try_fold(TagSet::empty(), |acc, t| {
            let t = t
                .as_str()
                .ok_or_else(|| Error::Format(format!("`tags` of {at} must hold strings")))?;
            Ok::<_, Error>(acc | t.parse::<TagSet>()?)
        })?,
        Some(_) => return Err(Error::Format(format!("`tags` of {at} must be a list"))),
    };
    let mode = match field("mode") {
        None => WellPosedMode::default(),
        Some(Value::String(s)) => s.parse()?,
        Some(Value::Bool(true)) => WellPosedMode::WellPosed,
        Some(Value::Bool(false)) => WellPosedMode::Pseudoinverse,
        Some(Value::Null) => WellPosedMode::LeastSquares,
        Some(_) => return Err(Error::Format(format!("`mode` of {at} must be true, false or none"))),
    };
    let (data, file_tags) = match field("operator") {
        Some(Value::String(path)) => read_operator(&base.join(path))?,
        Some(Value::Object(o)) if o.contains_key("generate") => {
            let g = &o["generate"];
            let kind = g.get("kind").and_then(Value::as_str).unwrap_or("dense");
            let n = g
                .get("n")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Format(format!("generated operator of {at} needs a size `n`")))?;
            let seed = g.get("seed").and_then(Value::as_u64).unwrap_or(0);
            generate_operator(kind, n as usize, seed)?
        }
        Some(inline) => (operator_from_json(inline)?, TagSet::empty()),
        None => return Err(Error::Format(format!("{at} has no `operator`"))),
    };
    let rhs = match field("rhs") {
        Some(Value::String(path)) => read_tree(&base.join(path))?,
        Some(inline) => tree_from_json(inline)?,
        None => TreeVector::unflatten(&TreeStructure::flat(data.rows()), vec![1.0; data.rows()])?,
    };
    let solvers = match field("solvers") {
        Some(list) => solver_list(list, &at)?,
        None => solvers.to_vec(),
    };
    let operator = data.build(tags | file_tags, rhs.structure())?;
    Ok(BenchProblem { name, operator, rhs, mode, solvers })
}

fn parse_suite(value: &Value, base: &Path) -> Result<Vec<BenchProblem>> {
    let (problems, solvers) = match value {
        Value::Array(items) => (items.as_slice(), default_solvers()),
        Value::Object(o) => {
            let solvers = match o.get("solvers") {
                Some(list) => solver_list(list, "the suite")?,
                None => default_solvers(),
            };
            let problems = match o.get("problems") {
                Some(Value::Array(items)) => items.as_slice(),
                None => &[],
                Some(_) => return Err(Error::Format("`problems` must be an array".into())),
            };
            (problems, solvers)
        }
        _ => return Err(Error::Format("a suite is an array of problems or an object".into())),
    };
    problems
        .iter()
        .enumerate()
        .map(|(i, p)| parse_problem(i, p, base, &solvers))
        .collect()
}

fn median(samples: &mut [u64]) -> u64 {
    samples.sort_unstable();
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    }
}

fn run_cell(problem: &BenchProblem, name: &str, repeats: u64) -> Result<Value> {
    let incompatible = |reason: String| {
        json!({
            "problem": problem.name,
            "solver": name,
            "status": "incompatible",
            "reason": reason,
            "samples": 0,
            "median_wall_time_ns": null,
            "residual": null,
        })
    };
    let solver = match make_solver(name, problem.mode, IterativeOptions::default(), &*problem.operator) {
        Ok(s) => s,
        Err(Error::Contract(reason)) => return Ok(incompatible(reason)),
        Err(e) => return Err(e),
    };
    if let Err(err) = check_compatibility(&solver, &*problem.operator) {
        return match err {
            Error::Contract(reason) => Ok(incompatible(reason)),
            other => Err(other),
        };
    }
    let mut samples = Vec::with_capacity(repeats as usize);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let solution = linear_solve(&problem.operator, &problem.rhs, &solver)?;
        samples.push(start.elapsed().as_nanos() as u64);
        last = Some(solution);
    }
    let solution = last.expect("at least one repeat");
    let residual = residual_norm(&*problem.operator, &solution.value, &problem.rhs)?;
    Ok(json!({
        "problem": problem.name,
        "solver": name,
        "solver_selected": solver.name(),
        "status": solution.result.as_str(),
        "samples": samples.len(),
        "median_wall_time_ns": median(&mut samples),
        "residual": residual,
    }))
}

pub fn run(args: &BenchArgs) -> Result<Outcome> {
    let suite = crate::problem::read_json(&args.suite)?;
    let base = args.suite.parent().unwrap_or(Path::new("."));
    let problems = parse_suite(&suite, base)?;
    let cells: Vec<(&BenchProblem, &str)> = problems
        .iter()
        .flat_map(|p| p.solvers.iter().map(move |s| (p, s.as_str())))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs as usize)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|(p, s)| run_cell(p, s, args.repeats))
            .collect::<Result<Vec<Value>>>()
    })?;
    Ok(Outcome { report: Value::Array(rows), success: true })
}
