use std::sync::Arc;

use super::{require_square, require_tag, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::TreeVector;

/// `A = L Lᵀ` for symmetric positive definite operators. Only the lower
/// triangle of the materialized operator is read.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cholesky;

#[derive(Clone, Debug)]
struct Factors {
    l: Matrix,
    singular: bool,
    a: Matrix,
}

#[derive(Clone, Debug)]
pub struct CholeskyState {
    factors: Arc<Factors>,
    spaces: Spaces,
}

impl CholeskyState {
    pub fn is_singular(&self) -> bool {
        self.factors.singular
    }
}

fn factor(a: Matrix) -> Factors {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    let mut singular = false;
    'outer: for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(d > 0.0) {
            singular = true;
            break 'outer;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let s = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / ljj;
        }
    }
    Factors { l, singular, a }
}

impl LinearSolver for Cholesky {
    type State = CholeskyState;

    fn name(&self) -> &'static str {
        "cholesky"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("cholesky", info)?;
        require_tag("cholesky", info.tags.is_symmetric(), "symmetric")?;
        require_tag(
            "cholesky",
            info.tags.is_positive_semidefinite(),
            "positive_semidefinite",
        )
    }

    fn init(&self, op: &Operator) -> Result<CholeskyState> {
        self.check(&OperatorInfo::of(&**op))?;
        Ok(CholeskyState {
            factors: Arc::new(factor(op.as_matrix()?)),
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &CholeskyState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        let f = &state.factors;
        if f.singular {
            return Ok(Solution::failed(&state.spaces.input, SolveResult::Singular));
        }
        let n = b.len();
        let l = &f.l;
        let mut x = b.flatten();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * x[k]).sum();
            x[i] = (x[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[(k, i)] * x[k]).sum();
            x[i] = (x[i] - s) / l[(i, i)];
        }
        Ok(state.spaces.finish(x, b, |x| f.a.matvec(x)))
    }

    /// The operator is symmetric, so only the structures swap.
    fn transpose(&self, state: &CholeskyState) -> CholeskyState {
        CholeskyState {
            factors: Arc::clone(&state.factors),
            spaces: state.spaces.swapped(),
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        false
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        false
    }
}
