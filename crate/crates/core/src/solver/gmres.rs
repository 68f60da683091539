//! Restarted GMRES with modified Gram–Schmidt Arnoldi and Givens rotations.

use super::{
    krylov_finish, require_square, IterativeOptions, KrylovState, LinearSolver, Solution,
    SolveResult,
};
use crate::error::Result;
use crate::operator::{transpose, Operator, OperatorInfo};
use crate::structure::{dot, norm, TreeVector};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Gmres {
    pub options: IterativeOptions,
}

impl Gmres {
    pub fn new(options: IterativeOptions) -> Self {
        Gmres { options }
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let h = a.hypot(b);
        (a / h, b / h)
    }
}

impl LinearSolver for Gmres {
    type State = KrylovState;

    fn name(&self) -> &'static str {
        "gmres"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("gmres", info)
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
        let restart = self.options.restart.min(n.max(1));

        let mut x = vec![0.0; n];
        let mut r = b.flatten();
        let mut iterations = 0;
        loop {
            let beta = norm(&r);
            if beta <= threshold {
                return krylov_finish(op, b, x, SolveResult::Success, iterations);
            }
            if iterations >= max_steps {
                return krylov_finish(op, b, x, SolveResult::MaxStepsReached, iterations);
            }

            let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
            // Column j of the (rotated) Hessenberg matrix, length j + 2.
            let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
            let mut rotations: Vec<(f64, f64)> = Vec::with_capacity(restart);
            let mut g = vec![beta];

            for j in 0..restart {
                if iterations >= max_steps {
                    break;
                }
                let mut w = op.apply(&basis[j])?;
                iterations += 1;
                let w_norm = norm(&w);
                let mut col = vec![0.0; j + 2];
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(&w, v);
                    col[i] = hij;
                    for (wk, vk) in w.iter_mut().zip(v) {
                        *wk -= hij * vk;
                    }
                }
                let h_next = norm(&w);
                col[j + 1] = h_next;
                for (i, &(c, s)) in rotations.iter().enumerate() {
                    let (a, bb) = (col[i], col[i + 1]);
                    col[i] = c * a + s * bb;
                    col[i + 1] = -s * a + c * bb;
                }
                let (c, s) = givens(col[j], col[j + 1]);
                col[j] = c * col[j] + s * col[j + 1];
                col[j + 1] = 0.0;
                rotations.push((c, s));
                let gj = g[j];
                g[j] = c * gj;
                g.push(-s * gj);
                h.push(col);

                // The Krylov space is invariant: the exact solution is in it.
                let happy = h_next <= f64::EPSILON * w_norm.max(f64::MIN_POSITIVE);
                if happy || g[j + 1].abs() <= threshold {
                    break;
                }
                basis.push(w.iter().map(|v| v / h_next).collect());
            }

            // Back-substitute the triangular least-squares system.
            let k = h.len();
            let mut y = vec![0.0; k];
            for i in (0..k).rev() {
                let s: f64 = (i + 1..k).map(|l| h[l][i] * y[l]).sum();
                y[i] = (g[i] - s) / h[i][i];
            }
            if y.iter().any(|v| !v.is_finite()) {
                return krylov_finish(op, b, x, SolveResult::Breakdown, iterations);
            }
            for (yi, v) in y.iter().zip(&basis) {
                for (xk, vk) in x.iter_mut().zip(v) {
                    *xk += yi * vk;
                }
            }
            let ax = op.apply(&x)?;
            r = b.as_slice().iter().zip(&ax).map(|(b, a)| b - a).collect();
        }
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
