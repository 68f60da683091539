use std::sync::Arc;

use super::{LinearOperator, Operator};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::structure::TreeStructure;
use crate::tags::TagSet;

/// An operator backed by a dense matrix.
#[derive(Clone, Debug)]
pub struct MatrixOperator {
    matrix: Arc<Matrix>,
    in_structure: TreeStructure,
    out_structure: TreeStructure,
    tags: TagSet,
}

impl MatrixOperator {
    /// Flat input and output structures, no tags.
    pub fn new(matrix: Matrix) -> Self {
        let (m, n) = matrix.shape();
        MatrixOperator {
            matrix: Arc::new(matrix),
            in_structure: TreeStructure::flat(n),
            out_structure: TreeStructure::flat(m),
            tags: TagSet::empty(),
        }
    }

    pub fn with_tags(mut self, tags: TagSet) -> Self {
        self.tags = tags;
        self
    }

    /// Reinterprets the columns and rows against tree structures of the
    /// matching dimensions.
    pub fn with_structures(
        mut self,
        in_structure: TreeStructure,
        out_structure: TreeStructure,
    ) -> Result<Self> {
        if in_structure.total_dim() != self.matrix.cols()
            || out_structure.total_dim() != self.matrix.rows()
        {
            return Err(Error::Structure(format!(
                "{}x{} matrix cannot map {} to {}",
                self.matrix.rows(),
                self.matrix.cols(),
                in_structure,
                out_structure
            )));
        }
        self.in_structure = in_structure;
        self.out_structure = out_structure;
        Ok(self)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_operator(self) -> Operator {
        Arc::new(self)
    }
}

impl LinearOperator for MatrixOperator {
    fn in_structure(&self) -> &TreeStructure {
        &self.in_structure
    }

    fn out_structure(&self) -> &TreeStructure {
        &self.out_structure
    }

    fn tags(&self) -> TagSet {
        self.tags
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.matrix.matvec(x))
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.matrix.matvec_t(y))
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok((*self.matrix).clone())
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::new(MatrixOperator {
            matrix: Arc::new(self.matrix.transpose()),
            in_structure: self.out_structure.clone(),
            out_structure: self.in_structure.clone(),
            tags: self.tags.transposed(),
        })
    }
}

/// The identity map on a structure.
#[derive(Clone, Debug)]
pub struct IdentityOperator {
    structure: TreeStructure,
}

impl IdentityOperator {
    pub fn new(structure: TreeStructure) -> Self {
        IdentityOperator { structure }
    }

    pub fn into_operator(self) -> Operator {
        Arc::new(self)
    }
}

impl LinearOperator for IdentityOperator {
    fn in_structure(&self) -> &TreeStructure {
        &self.structure
    }

    fn out_structure(&self) -> &TreeStructure {
        &self.structure
    }

    fn tags(&self) -> TagSet {
        (TagSet::DIAGONAL | TagSet::UNIT_DIAGONAL | TagSet::POSITIVE_SEMIDEFINITE).normalized()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(x.to_vec())
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(y.to_vec())
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(Matrix::identity(self.structure.total_dim()))
    }

    fn transpose(self: Arc<Self>) -> Operator {
        self
    }

    fn diagonal(&self) -> Result<Vec<f64>> {
        Ok(vec![1.0; self.structure.total_dim()])
    }
}
