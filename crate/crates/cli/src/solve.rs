use std::time::Instant;

use clap::Args;
use serde_json::json;
use unisolve_core::io::tree_to_json;
use unisolve_core::{linear_solve, LinearSolver, Result};

use crate::problem::{residual_norm, ProblemArgs};
use crate::Outcome;

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}

pub fn run(args: &SolveArgs) -> Result<Outcome> {
    let problem = args.problem.load()?;
    let solver = args.problem.solver(&*problem.operator)?;
    let start = Instant::now();
    let solution = linear_solve(&problem.operator, &problem.rhs, &solver)?;
    let wall_time_ns = start.elapsed().as_nanos() as u64;
    let residual = residual_norm(&*problem.operator, &solution.value, &problem.rhs)?;
    Ok(Outcome {
        report: json!({
            "solution": tree_to_json(&solution.value),
            "result": solution.result.as_str(),
            "residual_norm": residual,
            "iterations": solution.diagnostics.iterations,
            "wall_time_ns": wall_time_ns,
            "solver_selected": solver.name(),
        }),
        success: solution.result.is_success(),
    })
}
