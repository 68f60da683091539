use std::sync::Arc;

use super::{
    krylov_finish, require_square, require_tag, IterativeOptions, KrylovState, LinearSolver,
    Solution, SolveResult,
};
use crate::error::Result;
use crate::operator::{transpose, Operator, OperatorInfo};
use crate::structure::{dot, TreeVector};

/// Conjugate gradient for symmetric positive definite operators. Only
/// applies the operator; never materializes it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cg {
    pub options: IterativeOptions,
}

impl Cg {
    pub fn new(options: IterativeOptions) -> Self {
        Cg { options }
    }
}

impl LinearSolver for Cg {
    type State = KrylovState;

    fn name(&self) -> &'static str {
        "cg"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("cg", info)?;
        require_tag("cg", info.tags.is_symmetric(), "symmetric")?;
        require_tag("cg", info.tags.is_positive_semidefinite(), "positive_semidefinite")
    }

    fn init(&self, op: &Operator) -> Result<KrylovState> {
        self.options.validate()?;
        self.check(&OperatorInfo::of(&**op))?;
        Ok(KrylovState { op: Arc::clone(op) })
    }

    fn compute(&self, state: &KrylovState, b: &TreeVector) -> Result<Solution> {
        let op = &state.op;
        op.out_structure().expect_eq(b.structure(), "right-hand side")?;
        let n = b.len();
        let threshold = self.options.threshold(b.norm());
        let max_steps = self.options.max_steps_for(n);

        let mut x = vec![0.0; n];
        let mut r = b.flatten();
        let mut rr = dot(&r, &r);
        if rr.sqrt() <= threshold {
            return krylov_finish(op, b, x, SolveResult::Success, 0);
        }
        let mut p = r.clone();
        for k in 1..=max_steps {
            let ap = op.apply(&p)?;
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return krylov_finish(op, b, x, SolveResult::Breakdown, k);
            }
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_next = dot(&r, &r);
            if rr_next.sqrt() <= threshold {
                return krylov_finish(op, b, x, SolveResult::Success, k);
            }
            let beta = rr_next / rr;
            rr = rr_next;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        krylov_finish(op, b, x, SolveResult::MaxStepsReached, max_steps)
    }

    /// Symmetric operator: the transpose is the operator itself.
    fn transpose(&self, state: &KrylovState) -> KrylovState {
        if state.op.in_structure() == state.op.out_structure() {
            state.clone()
        } else {
            KrylovState {
                op: transpose(&state.op),
            }
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        false
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        false
    }
}
