//! Forward and reverse derivatives of `x = A†b`.
//!
//! With `r = b − A x`, a tangent `(V, v)` of `(A, b)` maps to
//!
//! ```text
//! ẋ = A†(−V x + (A†)ᵀ Vᵀ r − A z + v) + z,     z = Vᵀ (A†)ᵀ x
//! ```
//!
//! When the solver promises independent columns the `z` terms vanish, when
//! it promises independent rows the residual term vanishes, and for a
//! well-posed square system only `A⁻¹(−V x + v)` is left. The reverse mode
//! is the exact transpose of the same formula.
//!
//! Every derivative reuses the primal factorization: one `init`, plus the
//! solver's own `transpose` of that state for the `(A†)ᵀ` applications.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::{Bands, LinearOperator, MatrixOperator, Operator, OperatorInfo};
use crate::solver::{LinearSolver, Solution, SolveResult, Svd};
use crate::structure::TreeVector;

/// Which simplification of the derivative formula applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JvpCase {
    /// Square and nonsingular.
    WellPosed,
    /// Full column rank; rows may be dependent (least squares).
    IndependentColumns,
    /// Full row rank; columns may be dependent (minimum norm).
    IndependentRows,
    /// Arbitrary rank.
    General,
}

impl JvpCase {
    pub const ALL: [JvpCase; 4] = [
        JvpCase::WellPosed,
        JvpCase::IndependentColumns,
        JvpCase::IndependentRows,
        JvpCase::General,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JvpCase::WellPosed => "well_posed",
            JvpCase::IndependentColumns => "independent_columns",
            JvpCase::IndependentRows => "independent_rows",
            JvpCase::General => "general",
        }
    }

    fn has_residual_term(self) -> bool {
        matches!(self, JvpCase::IndependentColumns | JvpCase::General)
    }

    fn has_nullspace_term(self) -> bool {
        matches!(self, JvpCase::IndependentRows | JvpCase::General)
    }
}

impl std::str::FromStr for JvpCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        JvpCase::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Contract(format!("unknown derivative case `{s}`")))
    }
}

impl fmt::Display for JvpCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The case implied by the solver's capability flags for this operator.
pub fn jvp_case<S: LinearSolver + ?Sized>(solver: &S, op: &dyn LinearOperator) -> JvpCase {
    let info = OperatorInfo::of(op);
    match (
        solver.allow_dependent_rows(&info),
        solver.allow_dependent_columns(&info),
    ) {
        (false, false) => JvpCase::WellPosed,
        (true, false) => JvpCase::IndependentColumns,
        (false, true) => JvpCase::IndependentRows,
        (true, true) => JvpCase::General,
    }
}

/// Tangent of the solve inputs. `None` stands for a symbolic zero and
/// skips the corresponding work.
#[derive(Clone, Debug, Default)]
pub struct SolveTangent {
    /// `V`, with the same structures as `A`.
    pub operator: Option<Operator>,
    /// `v`, with the structure of `b`.
    pub vector: Option<TreeVector>,
}

impl SolveTangent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(operator: Operator, vector: TreeVector) -> Self {
        SolveTangent {
            operator: Some(operator),
            vector: Some(vector),
        }
    }

    pub fn operator(operator: Operator) -> Self {
        SolveTangent {
            operator: Some(operator),
            vector: None,
        }
    }

    pub fn vector(vector: TreeVector) -> Self {
        SolveTangent {
            operator: None,
            vector: Some(vector),
        }
    }
}

/// Cotangent of the solve inputs.
///
/// `operator` is the dense Frobenius-dual cotangent of `A` in the flat
/// layout `(out_dim × in_dim)`. For operators parameterized by fewer
/// numbers, project it with [`SolveCotangent::diagonal`] or
/// [`SolveCotangent::tridiagonal`], or take Frobenius products against the
/// parameter directions.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveCotangent {
    pub operator: Matrix,
    pub vector: TreeVector,
}

impl SolveCotangent {
    /// Cotangent of the entries of a diagonal operator.
    pub fn diagonal(&self) -> Vec<f64> {
        self.operator.diagonal()
    }

    /// Cotangent of the bands of a tridiagonal operator.
    pub fn tridiagonal(&self) -> Bands {
        Bands::from_matrix(&self.operator)
    }

    /// `⟨V̄, V⟩_F + ⟨b̄, v⟩`, the pairing with a tangent.
    pub fn pair(&self, tangent: &SolveTangent) -> Result<f64> {
        let mut total = 0.0;
        if let Some(v_op) = &tangent.operator {
            total += self.operator.frobenius_dot(&v_op.as_matrix()?);
        }
        if let Some(v) = &tangent.vector {
            total += self.vector.dot(v)?;
        }
        Ok(total)
    }
}

/// Primal solution together with its tangent.
#[derive(Clone, Debug)]
pub struct Jvp {
    pub solution: Solution,
    /// `None` when `result` is not a success.
    pub tangent: Option<TreeVector>,
    /// The primal result, or the first failure among the auxiliary solves.
    pub result: SolveResult,
}

/// Primal solution together with the cotangent of the inputs.
#[derive(Clone, Debug)]
pub struct Vjp {
    pub solution: Solution,
    /// `None` when `result` is not a success.
    pub cotangent: Option<SolveCotangent>,
    pub result: SolveResult,
}

/// A solve that has succeeded so far; carries the state and the lazily
/// built transposed state.
struct Context<'a, S: LinearSolver + ?Sized> {
    solver: &'a S,
    state: S::State,
    transposed: Option<S::State>,
}

impl<S: LinearSolver + ?Sized> Context<'_, S> {
    fn pinv(&self, rhs: &TreeVector) -> Result<std::result::Result<TreeVector, SolveResult>> {
        let sol = self.solver.compute(&self.state, rhs)?;
        Ok(if sol.is_success() { Ok(sol.value) } else { Err(sol.result) })
    }

    fn pinv_t(&mut self, rhs: &TreeVector) -> Result<std::result::Result<TreeVector, SolveResult>> {
        let state = self
            .transposed
            .get_or_insert_with(|| self.solver.transpose(&self.state));
        let sol = self.solver.compute(state, rhs)?;
        Ok(if sol.is_success() { Ok(sol.value) } else { Err(sol.result) })
    }
}

/// Unwraps an auxiliary solve or returns its failure from the enclosing
/// function.
macro_rules! try_solve {
    ($e:expr, $fail:expr) => {
        match $e? {
            Ok(v) => v,
            Err(result) => return Ok($fail(result)),
        }
    };
}

fn check_tangent(op: &Operator, tangent: &SolveTangent) -> Result<()> {
    if let Some(v_op) = &tangent.operator {
        op.in_structure()
            .expect_eq(v_op.in_structure(), "tangent operator input")?;
        op.out_structure()
            .expect_eq(v_op.out_structure(), "tangent operator output")?;
    }
    if let Some(v) = &tangent.vector {
        op.out_structure()
            .expect_eq(v.structure(), "tangent right-hand side")?;
    }
    Ok(())
}

/// Solves and differentiates in forward mode, choosing the case from the
/// solver's capabilities.
pub fn jvp_solve<S: LinearSolver + ?Sized>(
    solver: &S,
    op: &Operator,
    b: &TreeVector,
    tangent: &SolveTangent,
) -> Result<Jvp> {
    jvp_solve_with_case(solver, op, b, tangent, jvp_case(solver, &**op))
}

/// [`jvp_solve`] with an explicit case. Using a more specialized case than
/// the operator's rank allows gives a wrong tangent; [`JvpCase::General`]
/// is always valid.
pub fn jvp_solve_with_case<S: LinearSolver + ?Sized>(
    solver: &S,
    op: &Operator,
    b: &TreeVector,
    tangent: &SolveTangent,
    case: JvpCase,
) -> Result<Jvp> {
    op.out_structure().expect_eq(b.structure(), "right-hand side")?;
    check_tangent(op, tangent)?;
    solver.check(&OperatorInfo::of(&**op))?;
    let state = solver.init(op)?;
    let solution = solver.compute(&state, b)?;
    if !solution.is_success() {
        let result = solution.result;
        return Ok(Jvp { solution, tangent: None, result });
    }
    let fail = |result| Jvp {
        solution: solution.clone(),
        tangent: None,
        result,
    };
    let mut cx = Context { solver, state, transposed: None };
    let x = &solution.value;

    let Some(v_op) = &tangent.operator else {
        // Only the right-hand side moves: ẋ = A†v.
        let tangent = match &tangent.vector {
            Some(v) => try_solve!(cx.pinv(v), fail),
            None => x.zeros_like(),
        };
        return Ok(Jvp { result: solution.result, tangent: Some(tangent), solution });
    };

    let mut rhs = v_op.mv(x)?.scale(-1.0);
    if let Some(v) = &tangent.vector {
        rhs = rhs.add(v)?;
    }
    if case.has_residual_term() {
        let r = b.sub(&op.mv(x)?)?;
        let term = try_solve!(cx.pinv_t(&v_op.mv_transpose(&r)?), fail);
        rhs = rhs.add(&term)?;
    }
    let z = if case.has_nullspace_term() {
        let w = try_solve!(cx.pinv_t(x), fail);
        let z = v_op.mv_transpose(&w)?;
        rhs = rhs.sub(&op.mv(&z)?)?;
        Some(z)
    } else {
        None
    };
    let mut x_dot = try_solve!(cx.pinv(&rhs), fail);
    if let Some(z) = z {
        x_dot = x_dot.add(&z)?;
    }
    Ok(Jvp { result: solution.result, tangent: Some(x_dot), solution })
}

/// Solves and differentiates in reverse mode, choosing the case from the
/// solver's capabilities.
pub fn vjp_solve<S: LinearSolver + ?Sized>(
    solver: &S,
    op: &Operator,
    b: &TreeVector,
    x_bar: &TreeVector,
) -> Result<Vjp> {
    vjp_solve_with_case(solver, op, b, x_bar, jvp_case(solver, &**op))
}

/// [`vjp_solve`] with an explicit case.
pub fn vjp_solve_with_case<S: LinearSolver + ?Sized>(
    solver: &S,
    op: &Operator,
    b: &TreeVector,
    x_bar: &TreeVector,
    case: JvpCase,
) -> Result<Vjp> {
    op.out_structure().expect_eq(b.structure(), "right-hand side")?;
    op.in_structure().expect_eq(x_bar.structure(), "solution cotangent")?;
    solver.check(&OperatorInfo::of(&**op))?;
    let state = solver.init(op)?;
    let solution = solver.compute(&state, b)?;
    if !solution.is_success() {
        let result = solution.result;
        return Ok(Vjp { solution, cotangent: None, result });
    }
    let fail = |result| Vjp {
        solution: solution.clone(),
        cotangent: None,
        result,
    };
    let mut cx = Context { solver, state, transposed: None };
    let x = &solution.value;

    let y = try_solve!(cx.pinv_t(x_bar), fail);
    let mut v_bar = Matrix::outer(y.as_slice(), x.as_slice()).scale(-1.0);
    if case.has_residual_term() {
        let r = b.sub(&op.mv(x)?)?;
        let q = try_solve!(cx.pinv(&y), fail);
        v_bar = v_bar.add(&Matrix::outer(r.as_slice(), q.as_slice()));
    }
    if case.has_nullspace_term() {
        let w = try_solve!(cx.pinv_t(x), fail);
        let g = x_bar.sub(&op.mv_transpose(&y)?)?;
        v_bar = v_bar.add(&Matrix::outer(w.as_slice(), g.as_slice()));
    }
    Ok(Vjp {
        result: solution.result,
        cotangent: Some(SolveCotangent { operator: v_bar, vector: y }),
        solution,
    })
}

fn pinv_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let op = MatrixOperator::new(a.clone()).into_operator();
    let svd = Svd::default();
    let sol = svd.compute(&svd.init(&op)?, &TreeVector::from_vec(b.to_vec()))?;
    if !sol.is_success() {
        return Err(Error::Evaluation(format!(
            "reference pseudoinverse solve failed: {}",
            sol.result
        )));
    }
    Ok(sol.value.into_flat())
}

/// Central finite difference of `x(A, b) = A†b` along `(V, v)`, computed
/// with an SVD solve. Only meaningful when the perturbation does not change
/// the rank of `A`.
pub fn finite_difference_jvp(
    a: &Matrix,
    b: &[f64],
    v_mat: &Matrix,
    v: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if a.shape() != v_mat.shape() || a.rows() != b.len() || b.len() != v.len() {
        return Err(Error::Structure(
            "finite difference inputs have inconsistent shapes".into(),
        ));
    }
    let shifted = |sign: f64| -> Result<Vec<f64>> {
        let ah = a.add(&v_mat.scale(sign * h));
        let bh: Vec<f64> = b.iter().zip(v).map(|(b, v)| b + sign * h * v).collect();
        pinv_solve(&ah, &bh)
    };
    let plus = shifted(1.0)?;
    let minus = shifted(-1.0)?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect())
}
