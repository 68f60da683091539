//! The two-stage solver contract and the built-in solvers.
//!
//! [`LinearSolver::init`] does all right-hand-side independent work (usually
//! a factorization) and [`LinearSolver::compute`] solves for one right-hand
//! side. [`LinearSolver::transpose`] turns a state for `A` into a state for
//! `Aᵀ` without refactorizing. The two capability flags tell the derivative
//! rules which pseudoinverse identities the solver can be trusted with.

use std::fmt;

use crate::error::Result;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::{norm, TreeStructure, TreeVector};

mod bicgstab;
mod cg;
mod cholesky;
mod diagonal;
mod gmres;
mod lu;
pub(crate) mod qr;
mod svd;
mod triangular;
mod tridiagonal;

pub use bicgstab::BiCgStab;
pub use cg::Cg;
pub use cholesky::{Cholesky, CholeskyState};
pub use diagonal::{Diagonal, DiagonalState};
pub use gmres::Gmres;
pub use lu::{Lu, LuState};
pub use qr::{Qr, QrState};
pub use svd::{svd, Svd, SvdFactors, SvdState};
pub use triangular::{Triangular, TriangularState};
pub use tridiagonal::{Tridiagonal, TridiagonalState};

/// Outcome of a solve. Anything but `Success` means the returned value
/// must not be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveResult {
    Success,
    Singular,
    MaxStepsReached,
    Breakdown,
}

impl SolveResult {
    pub fn is_success(self) -> bool {
        self == SolveResult::Success
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveResult::Success => "success",
            SolveResult::Singular => "singular",
            SolveResult::MaxStepsReached => "max_steps_reached",
            SolveResult::Breakdown => "breakdown",
        }
    }
}

impl fmt::Display for SolveResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `‖b − A x‖₂` of the returned value.
    pub residual_norm: f64,
    /// Krylov iterations; zero for direct solvers.
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub value: TreeVector,
    pub result: SolveResult,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub(crate) fn new(
        value: TreeVector,
        result: SolveResult,
        residual_norm: f64,
        iterations: usize,
    ) -> Self {
        Solution {
            value,
            result,
            diagnostics: Diagnostics {
                residual_norm,
                iterations,
            },
        }
    }

    /// A NaN-filled value flagged with `result`.
    pub(crate) fn failed(structure: &TreeStructure, result: SolveResult) -> Self {
        let nan = TreeVector::unflatten(structure, vec![f64::NAN; structure.total_dim()])
            .expect("length matches structure");
        Solution::new(nan, result, f64::NAN, 0)
    }

    pub fn is_success(&self) -> bool {
        self.result.is_success()
    }
}

pub trait LinearSolver: Send + Sync {
    /// Right-hand-side independent data produced by `init`.
    type State: Clone + Send + Sync + fmt::Debug;

    fn name(&self) -> &'static str;

    /// Rejects operators whose shape or tags this solver cannot handle.
    /// Only the shape and tags are consulted, never the entries.
    fn check(&self, info: &OperatorInfo) -> Result<()>;

    fn init(&self, op: &Operator) -> Result<Self::State>;

    fn compute(&self, state: &Self::State, b: &TreeVector) -> Result<Solution>;

    /// State for `Aᵀ` derived from the state for `A`.
    fn transpose(&self, state: &Self::State) -> Self::State;

    fn allow_dependent_rows(&self, info: &OperatorInfo) -> bool;

    fn allow_dependent_columns(&self, info: &OperatorInfo) -> bool;
}

/// Input/output structures of the system a state solves. `input` is the
/// structure of the solution, `output` the structure of the right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct Spaces {
    pub input: TreeStructure,
    pub output: TreeStructure,
}

impl Spaces {
    pub(crate) fn of(op: &Operator) -> Self {
        Spaces {
            input: op.in_structure().clone(),
            output: op.out_structure().clone(),
        }
    }

    pub(crate) fn swapped(&self) -> Self {
        Spaces {
            input: self.output.clone(),
            output: self.input.clone(),
        }
    }

    pub(crate) fn check_rhs(&self, b: &TreeVector) -> Result<()> {
        self.output.expect_eq(b.structure(), "right-hand side")
    }

    /// Packs a flat direct-solver solution, recomputing the residual with
    /// `apply`.
    pub(crate) fn finish(
        &self,
        x: Vec<f64>,
        b: &TreeVector,
        apply: impl FnOnce(&[f64]) -> Vec<f64>,
    ) -> Solution {
        if x.iter().any(|v| !v.is_finite()) {
            return Solution::failed(&self.input, SolveResult::Singular);
        }
        let ax = apply(&x);
        let r: Vec<f64> = b.as_slice().iter().zip(&ax).map(|(b, a)| b - a).collect();
        let value = TreeVector::unflatten(&self.input, x).expect("solution length matches");
        Solution::new(value, SolveResult::Success, norm(&r), 0)
    }
}

/// Relative rank cutoff used by the SVD, QR and pseudoinverse-diagonal
/// solvers: `max(m, n) · ε · 2⁶`.
pub fn default_rtol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON * 64.0
}

pub(crate) fn require_square(name: &str, info: &OperatorInfo) -> Result<()> {
    if info.is_square() {
        Ok(())
    } else {
        Err(crate::Error::Contract(format!(
            "{name} requires a square operator, got {}x{}",
            info.rows, info.cols
        )))
    }
}

pub(crate) fn require_tag(name: &str, has: bool, tag: &str) -> Result<()> {
    if has {
        Ok(())
    } else {
        Err(crate::Error::Contract(format!(
            "{name} requires the `{tag}` tag"
        )))
    }
}

/// Options shared by the Krylov solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterativeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// `None` means `10 · n`.
    pub max_steps: Option<usize>,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            rtol: 1e-8,
            atol: 0.0,
            max_steps: None,
            restart: 20,
        }
    }
}

impl IterativeOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(crate::Error::Contract(msg.to_string()));
        if !(self.rtol >= 0.0) || !(self.atol >= 0.0) {
            return bad("rtol and atol must be nonnegative");
        }
        if self.max_steps == Some(0) {
            return bad("max_steps must be at least 1");
        }
        if self.restart == 0 {
            return bad("restart must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn max_steps_for(&self, n: usize) -> usize {
        self.max_steps.unwrap_or(10 * n.max(1))
    }

    pub(crate) fn threshold(&self, b_norm: f64) -> f64 {
        (self.rtol * b_norm).max(self.atol)
    }
}

/// State of a matrix-free solver: just the operator.
#[derive(Clone, Debug)]
pub struct KrylovState {
    pub(crate) op: Operator,
}

impl KrylovState {
    pub fn operator(&self) -> &Operator {
        &self.op
    }
}

/// Final bookkeeping for the Krylov solvers: recomputes `‖b − A x‖₂`
/// with one extra application of the operator.
pub(crate) fn krylov_finish(
    op: &Operator,
    b: &TreeVector,
    x: Vec<f64>,
    result: SolveResult,
    iterations: usize,
) -> Result<Solution> {
    let ax = op.apply(&x)?;
    let r: Vec<f64> = b.as_slice().iter().zip(&ax).map(|(b, a)| b - a).collect();
    let value = TreeVector::unflatten(op.in_structure(), x)?;
    Ok(Solution::new(value, result, norm(&r), iterations))
}
