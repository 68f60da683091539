//! Random-direction derivative checks of a single solve.
//!
//! Each trial draws a tangent `(V, v)` and a cotangent `x̄`, then measures
//! the forward derivative against a central finite difference and the
//! reverse derivative against the forward one through
//! `⟨x̄, ẋ⟩ = ⟨V̄, V⟩_F + ⟨b̄, v⟩`. When the operator is rank deficient the
//! tangent operator is drawn from the directions that keep the rank fixed,
//! since the pseudoinverse is not differentiable across rank changes.

use clap::Args;
use serde_json::json;
use unisolve_core::random::Sampler;
use unisolve_core::solver::{default_rtol, svd};
use unisolve_core::{
    check_compatibility, finite_difference_jvp, jvp_case, jvp_solve_with_case, linear_solve,
    vjp_solve_with_case, JvpCase, LinearSolver, Matrix, MatrixOperator, Result, SolveResult,
    SolveTangent, TreeVector,
};

use crate::problem::ProblemArgs;
use crate::Outcome;

const FD_STEP: f64 = 1e-6;
const FD_TOLERANCE: f64 = 1e-5;
const PAIRING_TOLERANCE: f64 = 1e-9;

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Seed of the random tangents and cotangents.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random directions to check.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Use this derivative formula instead of the one the solver implies.
    #[arg(long)]
    pub force_case: Option<JvpCase>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Perturbation directions along which `A` keeps its rank: with
/// `A = B Cᵀ` of rank `r`, either `B′ Cᵀ` or `B C′ᵀ`.
struct Directions {
    /// `None` when `A` has full rank and any direction will do.
    factors: Option<(Matrix, Matrix)>,
}

impl Directions {
    fn new(a: &Matrix) -> (Self, usize) {
        let (m, n) = a.shape();
        let f = svd(a);
        let rank = f.rank(default_rtol(m, n));
        if rank == m.min(n) {
            return (Directions { factors: None }, rank);
        }
        let left = Matrix::from_fn(m, rank, |i, k| f.u[(i, k)] * f.sigma[k]);
        let right = Matrix::from_fn(n, rank, |j, k| f.v[(j, k)]);
        (Directions { factors: Some((left, right)) }, rank)
    }

    fn draw(&self, trial: u64, m: usize, n: usize, rng: &mut Sampler) -> Matrix {
        match &self.factors {
            None => rng.matrix(m, n),
            Some((left, right)) => {
                let r = left.cols();
                if trial.is_multiple_of(2) {
                    rng.matrix(m, r).matmul(&right.transpose())
                } else {
                    left.matmul(&rng.matrix(n, r).transpose())
                }
            }
        }
    }
}

pub fn run(args: &GradcheckArgs) -> Result<Outcome> {
    let problem = args.problem.load()?;
    let op = &problem.operator;
    let b = &problem.rhs;
    let solver = args.problem.solver(&**op)?;
    check_compatibility(&solver, &**op)?;
    let case = args.force_case.unwrap_or_else(|| jvp_case(&solver, &**op));

    let a = op.as_matrix()?;
    let (m, n) = a.shape();
    let (directions, rank) = Directions::new(&a);
    let mut rng = Sampler::new(args.seed);

    let mut max_fd = 0.0f64;
    let mut max_pairing = 0.0f64;
    let mut failure = None;
    let primal = linear_solve(op, b, &solver)?;
    if !primal.result.is_success() {
        failure = Some(primal.result);
    }
    for trial in 0..args.trials {
        if failure.is_some() {
            break;
        }
        let v_mat = directions.draw(trial, m, n, &mut rng);
        let v = rng.vector(m);
        let x_bar = TreeVector::unflatten(op.in_structure(), rng.vector(n))?;
        let tangent = SolveTangent::new(
            MatrixOperator::new(v_mat.clone())
                .with_structures(op.in_structure().clone(), op.out_structure().clone())?
                .into_operator(),
            TreeVector::unflatten(op.out_structure(), v.clone())?,
        );

        let jvp = jvp_solve_with_case(&solver, op, b, &tangent, case)?;
        let Some(x_dot) = jvp.tangent else {
            failure = Some(jvp.result);
            break;
        };
        let fd = finite_difference_jvp(&a, b.as_slice(), &v_mat, &v, FD_STEP)?;
        let diff: Vec<f64> = x_dot.as_slice().iter().zip(&fd).map(|(x, y)| x - y).collect();
        let fd_norm = norm(&fd);
        let fd_err = if fd_norm > 1e-8 { norm(&diff) / fd_norm } else { norm(&diff) };
        max_fd = max_fd.max(fd_err);

        let vjp = vjp_solve_with_case(&solver, op, b, &x_bar, case)?;
        let Some(cotangent) = vjp.cotangent else {
            failure = Some(vjp.result);
            break;
        };
        let lhs = x_bar.dot(&x_dot)?;
        let rhs = cotangent.pair(&tangent)?;
        let scale = x_bar.norm() * x_dot.norm()
            + cotangent.operator.frobenius_norm() * v_mat.frobenius_norm()
            + cotangent.vector.norm() * norm(&v);
        let pairing_err = if scale > 0.0 { (lhs - rhs).abs() / scale } else { (lhs - rhs).abs() };
        max_pairing = max_pairing.max(pairing_err);
    }

    let pass = failure.is_none()
        && max_fd.is_finite()
        && max_pairing.is_finite()
        && max_fd <= FD_TOLERANCE
        && max_pairing <= PAIRING_TOLERANCE;
    let result = failure.unwrap_or(SolveResult::Success);
    Ok(Outcome {
        report: json!({
            "max_jvp_fd_error": if failure.is_none() { json!(max_fd) } else { json!(null) },
            "max_pairing_error": if failure.is_none() { json!(max_pairing) } else { json!(null) },
            "pass": pass,
            "result": result.as_str(),
            "case": case.as_str(),
            "rank": rank,
            "solver_selected": solver.name(),
            "seed": args.seed,
            "trials": args.trials,
        }),
        success: pass,
    })
}
