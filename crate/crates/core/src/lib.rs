//! Differentiable linear solves over general linear operators.
//!
//! [`linear_solve`] returns the Moore–Penrose solution `x = A†b` for any
//! operator: the ordinary solution of a well-posed square system, the
//! least-squares solution of an overdetermined system, or the minimum-norm
//! solution of an underdetermined one. Which algorithm runs is decided by the
//! [`LinearSolver`] passed in, or chosen from the operator's shape and
//! [`TagSet`] by [`AutoLinearSolver`].
//!
//! Derivatives of a solve with respect to both the operator and the
//! right-hand side are provided by [`jvp_solve`] and [`vjp_solve`]. They reuse
//! the factorization of the primal solve and pick the cheapest valid formula
//! from the solver's capabilities.
//!
//! ```
//! use unisolve_core::{linear_solve, AutoLinearSolver, Matrix, MatrixOperator, TreeVector};
//!
//! let a = MatrixOperator::new(Matrix::from_rows(&[[1.0], [1.0]])).into_operator();
//! let b = TreeVector::from_vec(vec![1.0, 3.0]);
//! let sol = linear_solve(&a, &b, &AutoLinearSolver::least_squares()).unwrap();
//! assert!((sol.value.as_slice()[0] - 2.0).abs() < 1e-12);
//! ```

// Negated comparisons are how NaN inputs are rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod autoselect;
pub mod error;
pub mod io;
pub mod matrix;
pub mod operator;
pub mod random;
pub mod solver;
pub mod structure;
pub mod tags;

pub use autodiff::{
    finite_difference_jvp, jvp_case, jvp_solve, jvp_solve_with_case, vjp_solve,
    vjp_solve_with_case, Jvp, JvpCase, SolveCotangent, SolveTangent, Vjp,
};
pub use autoselect::{auto_select, check_compatibility, linear_solve, AnySolver, AutoLinearSolver, WellPosedMode};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use operator::{
    DiagonalOperator, FunctionOperator, IdentityOperator, JacobianOperator, LinearOperator,
    MatrixOperator, Operator, OperatorInfo, TridiagonalOperator,
};
pub use solver::{
    BiCgStab, Cg, Cholesky, Diagnostics, Diagonal, Gmres, IterativeOptions, LinearSolver, Lu, Qr,
    Solution, SolveResult, Svd, Triangular, Tridiagonal,
};
pub use structure::{flatten, unflatten, TreeStructure, TreeVector};
pub use tags::TagSet;
