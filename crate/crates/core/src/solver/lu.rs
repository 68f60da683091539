//! LU factorization with partial (row) pivoting.

use std::sync::Arc;

use super::{require_square, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::TreeVector;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Lu;

#[derive(Clone, Debug)]
struct Factors {
    /// Unit lower factor below the diagonal, upper factor on and above it.
    lu: Matrix,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    singular: bool,
    a: Matrix,
}

#[derive(Clone, Debug)]
pub struct LuState {
    factors: Arc<Factors>,
    transposed: bool,
    spaces: Spaces,
}

impl LuState {
    pub fn is_singular(&self) -> bool {
        self.factors.singular
    }
}

fn factor(a: Matrix) -> Factors {
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let tol = n as f64 * f64::EPSILON * a.max_abs();
    let mut singular = false;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
            .expect("nonempty range");
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        if !(pivot.abs() > tol) {
            singular = true;
            break;
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
    }
    Factors {
        lu,
        perm,
        singular,
        a,
    }
}

impl Factors {
    /// Solves `A x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let lu = &self.lu;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / lu[(i, i)];
        }
        x
    }

    /// Solves `Aᵀ x = c` with the same factors: `Aᵀ = Uᵀ Lᵀ P`.
    fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let n = c.len();
        let lu = &self.lu;
        let mut w = c.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| lu[(j, i)] * w[j]).sum();
            w[i] = (w[i] - s) / lu[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| lu[(j, i)] * w[j]).sum();
            w[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }
}

impl LinearSolver for Lu {
    type State = LuState;

    fn name(&self) -> &'static str {
        "lu"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("lu", info)
    }

    fn init(&self, op: &Operator) -> Result<LuState> {
        self.check(&OperatorInfo::of(&**op))?;
        Ok(LuState {
            factors: Arc::new(factor(op.as_matrix()?)),
            transposed: false,
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &LuState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        let f = &state.factors;
        if f.singular {
            return Ok(Solution::failed(&state.spaces.input, SolveResult::Singular));
        }
        Ok(if state.transposed {
            let x = f.solve_transpose(b.as_slice());
            state.spaces.finish(x, b, |x| f.a.matvec_t(x))
        } else {
            let x = f.solve(b.as_slice());
            state.spaces.finish(x, b, |x| f.a.matvec(x))
        })
    }

    fn transpose(&self, state: &LuState) -> LuState {
        LuState {
            factors: Arc::clone(&state.factors),
            transposed: !state.transposed,
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
