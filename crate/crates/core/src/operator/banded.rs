use std::sync::Arc;

use super::{LinearOperator, Operator};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::structure::TreeStructure;
use crate::tags::TagSet;

/// Sub-, main and super-diagonal of a square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Bands {
    /// `A[i+1][i]`, length `n - 1`.
    pub lower: Vec<f64>,
    /// `A[i][i]`, length `n`.
    pub main: Vec<f64>,
    /// `A[i][i+1]`, length `n - 1`.
    pub upper: Vec<f64>,
}

impl Bands {
    pub fn new(lower: Vec<f64>, main: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let off = main.len().saturating_sub(1);
        if lower.len() != off || upper.len() != off {
            return Err(Error::Structure(format!(
                "tridiagonal bands need lengths ({off}, {}, {off}), got ({}, {}, {})",
                main.len(),
                lower.len(),
                main.len(),
                upper.len()
            )));
        }
        Ok(Bands { lower, main, upper })
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        let n = m.rows().min(m.cols());
        Bands {
            lower: (1..n).map(|i| m[(i, i - 1)]).collect(),
            main: (0..n).map(|i| m[(i, i)]).collect(),
            upper: (1..n).map(|i| m[(i - 1, i)]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.main.len()
    }

    pub fn is_empty(&self) -> bool {
        self.main.is_empty()
    }

    pub fn transposed(&self) -> Bands {
        Bands {
            lower: self.upper.clone(),
            main: self.main.clone(),
            upper: self.lower.clone(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.main.len();
        (0..n)
            .map(|i| {
                let mut s = self.main[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.main.len();
        let mut m = Matrix::from_diagonal(&self.main);
        for i in 1..n {
            m[(i, i - 1)] = self.lower[i - 1];
            m[(i - 1, i)] = self.upper[i - 1];
        }
        m
    }
}

/// `diag(d)`; always carries the diagonal tag.
#[derive(Clone, Debug)]
pub struct DiagonalOperator {
    diagonal: Arc<[f64]>,
    structure: TreeStructure,
    tags: TagSet,
}

impl DiagonalOperator {
    pub fn new(diagonal: Vec<f64>) -> Self {
        let structure = TreeStructure::flat(diagonal.len());
        DiagonalOperator {
            diagonal: diagonal.into(),
            structure,
            tags: TagSet::DIAGONAL.normalized(),
        }
    }

    /// Adds extra tags such as `positive_semidefinite`; the diagonal tag is
    /// kept regardless.
    pub fn with_tags(mut self, tags: TagSet) -> Self {
        self.tags = (tags | TagSet::DIAGONAL).normalized();
        self
    }

    pub fn with_structure(mut self, structure: TreeStructure) -> Result<Self> {
        if structure.total_dim() != self.diagonal.len() {
            return Err(Error::Structure(format!(
                "diagonal of length {} cannot act on {}",
                self.diagonal.len(),
                structure
            )));
        }
        self.structure = structure;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn into_operator(self) -> Operator {
        Arc::new(self)
    }
}

impl LinearOperator for DiagonalOperator {
    fn in_structure(&self) -> &TreeStructure {
        &self.structure
    }

    fn out_structure(&self) -> &TreeStructure {
        &self.structure
    }

    fn tags(&self) -> TagSet {
        self.tags
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.diagonal.iter().zip(x).map(|(d, x)| d * x).collect())
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.apply(y)
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(Matrix::from_diagonal(&self.diagonal))
    }

    fn transpose(self: Arc<Self>) -> Operator {
        self
    }

    fn diagonal(&self) -> Result<Vec<f64>> {
        Ok(self.diagonal.to_vec())
    }

    fn tridiagonal(&self) -> Result<Bands> {
        let off = self.diagonal.len().saturating_sub(1);
        Ok(Bands {
            lower: vec![0.0; off],
            main: self.diagonal.to_vec(),
            upper: vec![0.0; off],
        })
    }
}

/// A square tridiagonal operator; always carries the tridiagonal tag.
#[derive(Clone, Debug)]
pub struct TridiagonalOperator {
    bands: Arc<Bands>,
    structure: TreeStructure,
    tags: TagSet,
}

impl TridiagonalOperator {
    pub fn new(lower: Vec<f64>, main: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let bands = Bands::new(lower, main, upper)?;
        Ok(Self::from_bands(bands))
    }

    pub fn from_bands(bands: Bands) -> Self {
        TridiagonalOperator {
            structure: TreeStructure::flat(bands.len()),
            bands: Arc::new(bands),
            tags: TagSet::TRIDIAGONAL,
        }
    }

    pub fn with_tags(mut self, tags: TagSet) -> Self {
        self.tags = (tags | TagSet::TRIDIAGONAL).normalized();
        self
    }

    pub fn with_structure(mut self, structure: TreeStructure) -> Result<Self> {
        if structure.total_dim() != self.bands.len() {
            return Err(Error::Structure(format!(
                "tridiagonal operator of size {} cannot act on {}",
                self.bands.len(),
                structure
            )));
        }
        self.structure = structure;
        Ok(self)
    }

    pub fn bands(&self) -> &Bands {
        &self.bands
    }

    pub fn into_operator(self) -> Operator {
        Arc::new(self)
    }
}

impl LinearOperator for TridiagonalOperator {
    fn in_structure(&self) -> &TreeStructure {
        &self.structure
    }

    fn out_structure(&self) -> &TreeStructure {
        &self.structure
    }

    fn tags(&self) -> TagSet {
        self.tags
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.bands.matvec(x))
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.bands.transposed().matvec(y))
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(self.bands.to_matrix())
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::new(TridiagonalOperator {
            bands: Arc::new(self.bands.transposed()),
            structure: self.structure.clone(),
            tags: self.tags.transposed(),
        })
    }

    fn diagonal(&self) -> Result<Vec<f64>> {
        Ok(self.bands.main.clone())
    }

    fn tridiagonal(&self) -> Result<Bands> {
        Ok((*self.bands).clone())
    }
}
