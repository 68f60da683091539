use super::{
    krylov_finish, require_square, IterativeOptions, KrylovState, LinearSolver, Solution,
    SolveResult,
};
use crate::error::Result;
use crate::operator::{transpose, Operator, OperatorInfo};
use crate::structure::{dot, norm, TreeVector};

/// Magnitude below which `ρ`, `ω` or `r̂ᵀv` count as a breakdown.
const BREAKDOWN: f64 = 1e-30;

/// BiCGStab for general square operators.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BiCgStab {
    pub options: IterativeOptions,
}

impl BiCgStab {
    pub fn new(options: IterativeOptions) -> Self {
        BiCgStab { options }
    }
}

impl LinearSolver for BiCgStab {
    type State = KrylovState;

    fn name(&self) -> &'static str {
        "bicgstab"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("bicgstab", info)
    }

    fn init(&self, op: &Operator) -> Result<KrylovState> {
        self.options.validate()?;
        self.check(&OperatorInfo::of(&**op))?;
        Ok(KrylovState { op: op.clone() })
    }

    fn compute(&self, state: &KrylovState, b: &TreeVector) -> Result<Solution> {
        let op = &state.op;
        op.out_structure().expect_eq(b.structure(), "right-hand side")?;
        let n = b.len();
        let threshold = self.options.threshold(b.norm());
        let max_steps = self.options.max_steps_for(n);

        let mut x = vec![0.0; n];
        let mut r = b.flatten();
        if norm(&r) <= threshold {
            return krylov_finish(op, b, x, SolveResult::Success, 0);
        }
        let r_hat = r.clone();
        let mut p = vec![0.0; n];
        let mut v = vec![0.0; n];
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        for k in 1..=max_steps {
            let rho_next = dot(&r_hat, &r);
            if rho_next.abs() < BREAKDOWN {
                return krylov_finish(op, b, x, SolveResult::Breakdown, k);
            }
            let beta = (rho_next / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            rho = rho_next;
            v = op.apply(&p)?;
            let rv = dot(&r_hat, &v);
            if rv.abs() < BREAKDOWN {
                return krylov_finish(op, b, x, SolveResult::Breakdown, k);
            }
            alpha = rho / rv;
            let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
            if norm(&s) <= threshold {
                for i in 0..n {
                    x[i] += alpha * p[i];
                }
                return krylov_finish(op, b, x, SolveResult::Success, k);
            }
            let t = op.apply(&s)?;
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            if omega.abs() < BREAKDOWN {
                return krylov_finish(op, b, x, SolveResult::Breakdown, k);
            }
            for i in 0..n {
                x[i] += alpha * p[i] + omega * s[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm(&r) <= threshold {
                return krylov_finish(op, b, x, SolveResult::Success, k);
            }
        }
        krylov_finish(op, b, x, SolveResult::MaxStepsReached, max_steps)
    }

    fn transpose(&self, state: &KrylovState) -> KrylovState {
        KrylovState {
            op: transpose(&state.op),
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        false
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        false
    }
}
