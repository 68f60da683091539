//! Householder QR for least-squares and minimum-norm solves.
//!
//! A tall (or square) matrix `M = QR` is factored once. Solving with `M`
//! gives the least-squares solution `R⁻¹ Qᵀ b`; solving with `Mᵀ = Rᵀ Qᵀ`
//! gives the minimum-norm solution `Q R⁻ᵀ c`. A wide operator is handled
//! by factoring its transpose, so transposing a state only flips which of
//! the two regimes is used.

use std::sync::Arc;

use super::{default_rtol, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::TreeVector;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Qr;

/// Householder factorization of an `m × n` matrix with `m ≥ n`.
#[derive(Clone, Debug)]
pub(crate) struct Householder {
    m: usize,
    n: usize,
    /// Reflector `k` acts on rows `k..m`; `H = I − β v vᵀ`.
    vectors: Vec<Vec<f64>>,
    betas: Vec<f64>,
    /// Upper triangular `n × n`.
    r: Matrix,
}

impl Householder {
    pub(crate) fn new(a: &Matrix) -> Self {
        let (m, n) = a.shape();
        assert!(m >= n, "householder QR expects rows >= cols");
        let mut work = a.clone();
        let mut vectors = Vec::with_capacity(n);
        let mut betas = Vec::with_capacity(n);
        for k in 0..n {
            let mut v: Vec<f64> = (k..m).map(|i| work[(i, k)]).collect();
            let norm_x = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let alpha = if v[0] >= 0.0 { -norm_x } else { norm_x };
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            if beta != 0.0 {
                for j in k..n {
                    let s: f64 = (k..m).map(|i| v[i - k] * work[(i, j)]).sum::<f64>() * beta;
                    for i in k..m {
                        work[(i, j)] -= s * v[i - k];
                    }
                }
            }
            vectors.push(v);
            betas.push(beta);
        }
        let r = Matrix::from_fn(n, n, |i, j| if j >= i { work[(i, j)] } else { 0.0 });
        Householder {
            m,
            n,
            vectors,
            betas,
            r,
        }
    }

    /// `Qᵀ b` for `b` of length `m`.
    fn apply_qt(&self, b: &mut [f64]) {
        for (k, (v, &beta)) in self.vectors.iter().zip(&self.betas).enumerate() {
            reflect(&mut b[k..], v, beta);
        }
    }

    /// `Q y` for `y` of length `m`.
    fn apply_q(&self, y: &mut [f64]) {
        for (k, (v, &beta)) in self.vectors.iter().zip(&self.betas).enumerate().rev() {
            reflect(&mut y[k..], v, beta);
        }
    }

    fn is_rank_deficient(&self, rtol: f64) -> bool {
        let d = self.r.diagonal();
        let max = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        d.iter().any(|x| !(x.abs() > rtol * max))
    }

    /// `argmin ‖M x − b‖₂`.
    fn least_squares(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        let mut x = y[..self.n].to_vec();
        for i in (0..self.n).rev() {
            let s: f64 = (i + 1..self.n).map(|j| self.r[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.r[(i, i)];
        }
        x
    }

    /// Minimum-norm solution of `Mᵀ x = c`.
    fn min_norm(&self, c: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.m];
        for i in 0..self.n {
            let s: f64 = (0..i).map(|j| self.r[(j, i)] * z[j]).sum();
            z[i] = (c[i] - s) / self.r[(i, i)];
        }
        self.apply_q(&mut z);
        z
    }
}

fn reflect(x: &mut [f64], v: &[f64], beta: f64) {
    if beta == 0.0 {
        return;
    }
    let s = beta * v.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

/// The full orthogonal factor `Q` of a square matrix.
pub(crate) fn householder_q(a: &Matrix) -> Matrix {
    let h = Householder::new(a);
    let mut q = Matrix::identity(h.m);
    for j in 0..h.m {
        let mut col = q.column(j);
        h.apply_q(&mut col);
        q.set_column(j, &col);
    }
    q
}

#[derive(Clone, Debug)]
struct Factors {
    /// Factorization of the tall orientation `M` (either `A` or `Aᵀ`).
    qr: Householder,
    tall: Matrix,
    singular: bool,
}

#[derive(Clone, Debug)]
pub struct QrState {
    factors: Arc<Factors>,
    /// Solve with `Mᵀ` (minimum norm) instead of `M` (least squares).
    use_transpose: bool,
    spaces: Spaces,
}

impl QrState {
    pub fn is_singular(&self) -> bool {
        self.factors.singular
    }
}

impl LinearSolver for Qr {
    type State = QrState;

    fn name(&self) -> &'static str {
        "qr"
    }

    fn check(&self, _: &OperatorInfo) -> Result<()> {
        Ok(())
    }

    fn init(&self, op: &Operator) -> Result<QrState> {
        let a = op.as_matrix()?;
        let (m, n) = a.shape();
        let (tall, use_transpose) = if m >= n { (a, false) } else { (a.transpose(), true) };
        let qr = Householder::new(&tall);
        let singular = qr.is_rank_deficient(default_rtol(m, n));
        Ok(QrState {
            factors: Arc::new(Factors {
                qr,
                tall,
                singular,
            }),
            use_transpose,
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &QrState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        let f = &state.factors;
        if f.singular {
            return Ok(Solution::failed(&state.spaces.input, SolveResult::Singular));
        }
        Ok(if state.use_transpose {
            let x = f.qr.min_norm(b.as_slice());
            state.spaces.finish(x, b, |x| f.tall.matvec_t(x))
        } else {
            let x = f.qr.least_squares(b.as_slice());
            state.spaces.finish(x, b, |x| f.tall.matvec(x))
        })
    }

    fn transpose(&self, state: &QrState) -> QrState {
        QrState {
            factors: Arc::clone(&state.factors),
            use_transpose: !state.use_transpose,
            spaces: state.spaces.swapped(),
        }
    }

    fn allow_dependent_rows(&self, info: &OperatorInfo) -> bool {
        info.rows > info.cols
    }

    fn allow_dependent_columns(&self, info: &OperatorInfo) -> bool {
        info.cols > info.rows
    }
}
