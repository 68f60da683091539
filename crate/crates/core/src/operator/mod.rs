//! Linear operators `A: X → Y` between tree-structured vector spaces.
//!
//! Every operator can apply itself, apply its transpose, and materialize
//! itself as a dense matrix in the canonical flat layout of its input and
//! output structures. Operators are shared as [`Operator`] handles and are
//! immutable once built.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::structure::{TreeStructure, TreeVector};
use crate::tags::TagSet;

pub mod ad;
mod algebra;
mod banded;
mod dense;
mod function;

pub use algebra::{add, compose, scale, transpose, AddedOperator, ComposedOperator, ScaledOperator};
pub use banded::{Bands, DiagonalOperator, TridiagonalOperator};
pub use dense::{IdentityOperator, MatrixOperator};
pub use function::{
    jacobian_mv, FunctionOperator, JacobianOperator, LinearFn, TransposedOperator,
};

/// Shared handle to an operator.
pub type Operator = Arc<dyn LinearOperator>;

pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn in_structure(&self) -> &TreeStructure;

    fn out_structure(&self) -> &TreeStructure;

    fn tags(&self) -> TagSet;

    /// `A x` on flat vectors. `x.len()` is the input dimension.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `Aᵀ y` on flat vectors. The default materializes the operator.
    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.as_matrix()?.matvec_t(y))
    }

    /// Dense `(out_dim × in_dim)` matrix. The default probes the operator
    /// with every basis vector of the input space, one column at a time.
    fn as_matrix(&self) -> Result<Matrix> {
        probe_columns(self)
    }

    fn transpose(self: Arc<Self>) -> Operator;

    /// Main diagonal of the materialized matrix.
    fn diagonal(&self) -> Result<Vec<f64>> {
        Ok(self.as_matrix()?.diagonal())
    }

    /// The three central bands of the materialized matrix.
    fn tridiagonal(&self) -> Result<Bands> {
        Ok(Bands::from_matrix(&self.as_matrix()?))
    }

    fn in_dim(&self) -> usize {
        self.in_structure().total_dim()
    }

    fn out_dim(&self) -> usize {
        self.out_structure().total_dim()
    }

    fn is_square(&self) -> bool {
        self.in_dim() == self.out_dim()
    }

    /// `A x` on tree vectors.
    fn mv(&self, x: &TreeVector) -> Result<TreeVector> {
        self.in_structure().expect_eq(x.structure(), "operator input")?;
        let y = self.apply(x.as_slice())?;
        TreeVector::unflatten(self.out_structure(), y)
    }

    /// `Aᵀ y` on tree vectors.
    fn mv_transpose(&self, y: &TreeVector) -> Result<TreeVector> {
        self.out_structure()
            .expect_eq(y.structure(), "transpose operator input")?;
        let x = self.apply_transpose(y.as_slice())?;
        TreeVector::unflatten(self.in_structure(), x)
    }
}

pub(crate) fn probe_columns<A: LinearOperator + ?Sized>(op: &A) -> Result<Matrix> {
    let n = op.in_dim();
    let mut out = Matrix::zeros(op.out_dim(), n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let column = op.apply(&e)?;
        if column.len() != out.rows() {
            return Err(Error::Evaluation(format!(
                "operator produced {} outputs, expected {}",
                column.len(),
                out.rows()
            )));
        }
        out.set_column(j, &column);
        e[j] = 0.0;
    }
    Ok(out)
}

/// A plain-data view of an operator: its shape and tags. Solver selection
/// and compatibility checks only ever see this view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OperatorInfo {
    pub rows: usize,
    pub cols: usize,
    pub tags: TagSet,
}

impl OperatorInfo {
    pub fn of(op: &dyn LinearOperator) -> Self {
        OperatorInfo {
            rows: op.out_dim(),
            cols: op.in_dim(),
            tags: op.tags(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

#[cfg(test)]
mod tests;
