use std::fmt;
use std::sync::Arc;

use super::ad::{forward_derivative, reverse_derivative, Differentiable};
use super::{LinearOperator, MatrixOperator, Operator};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::structure::{TreeStructure, TreeVector};
use crate::tags::TagSet;

/// A user-supplied linear map on tree vectors.
pub type LinearFn = Arc<dyn Fn(&TreeVector) -> TreeVector + Send + Sync>;

/// An operator defined by a closure asserted to be linear.
#[derive(Clone)]
pub struct FunctionOperator {
    f: LinearFn,
    f_transpose: Option<LinearFn>,
    in_structure: TreeStructure,
    out_structure: TreeStructure,
    tags: TagSet,
}

const ZERO_MAP_TOL: f64 = 1e-12;

impl FunctionOperator {
    /// Discovers the output structure by evaluating `f` once on the zero
    /// vector, which must map to zero.
    pub fn new(f: LinearFn, in_structure: TreeStructure) -> Result<Self> {
        let zero = f(&TreeVector::zeros(&in_structure));
        if let Some(bad) = zero.as_slice().iter().find(|v| !(v.abs() <= ZERO_MAP_TOL)) {
            return Err(Error::Evaluation(format!(
                "function operator is not linear: f(0) has entry {bad}"
            )));
        }
        Ok(FunctionOperator {
            f,
            f_transpose: None,
            in_structure,
            out_structure: zero.structure().clone(),
            tags: TagSet::empty(),
        })
    }

    pub fn from_fn(
        f: impl Fn(&TreeVector) -> TreeVector + Send + Sync + 'static,
        in_structure: TreeStructure,
    ) -> Result<Self> {
        Self::new(Arc::new(f), in_structure)
    }

    /// Supplies `Aᵀ` explicitly; without it the transpose is materialized.
    pub fn with_transpose(mut self, f_transpose: LinearFn) -> Self {
        self.f_transpose = Some(f_transpose);
        self
    }

    pub fn with_tags(mut self, tags: TagSet) -> Self {
        self.tags = tags;
        self
    }

    pub fn into_operator(self) -> Operator {
        Arc::new(self)
    }

    fn call(f: &LinearFn, x: &[f64], input: &TreeStructure, output: &TreeStructure) -> Result<Vec<f64>> {
        let y = f(&TreeVector::unflatten(input, x.to_vec())?);
        output.expect_eq(y.structure(), "function operator output")?;
        Ok(y.into_flat())
    }
}

impl fmt::Debug for FunctionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOperator")
            .field("in_structure", &self.in_structure)
            .field("out_structure", &self.out_structure)
            .field("tags", &self.tags)
            .field("has_transpose", &self.f_transpose.is_some())
            .finish()
    }
}

impl LinearOperator for FunctionOperator {
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
        Self::call(&self.f, x, &self.in_structure, &self.out_structure)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.f_transpose {
            Some(ft) => Self::call(ft, y, &self.out_structure, &self.in_structure),
            None => Ok(self.as_matrix()?.matvec_t(y)),
        }
    }

    fn transpose(self: Arc<Self>) -> Operator {
        match &self.f_transpose {
            Some(ft) => Arc::new(FunctionOperator {
                f: Arc::clone(ft),
                f_transpose: Some(Arc::clone(&self.f)),
                in_structure: self.out_structure.clone(),
                out_structure: self.in_structure.clone(),
                tags: self.tags.transposed(),
            }),
            // Basis probing. A failing closure cannot be reported from
            // here, so it surfaces as a deferred error on first use.
            None => match self.as_matrix() {
                Ok(m) => Arc::new(
                    MatrixOperator::new(m.transpose())
                        .with_tags(self.tags.transposed())
                        .with_structures(self.out_structure.clone(), self.in_structure.clone())
                        .expect("materialized transpose has matching dimensions"),
                ),
                Err(_) => Arc::new(TransposedOperator::new(self)),
            },
        }
    }
}

/// The Jacobian of a nonlinear map at a fixed point.
///
/// `mv` propagates dual numbers through the map; the transpose runs a
/// reverse sweep over a recorded tape.
pub struct JacobianOperator<G> {
    g: Arc<G>,
    x0: TreeVector,
    out_structure: TreeStructure,
    tags: TagSet,
}

impl<G: Differentiable + 'static> JacobianOperator<G> {
    /// Evaluates `g(x0)` once to fix the output dimension. The output is a
    /// single flat leaf unless [`with_out_structure`](Self::with_out_structure)
    /// says otherwise.
    pub fn new(g: G, x0: TreeVector) -> Result<Self> {
        let y0 = g.eval::<f64>(x0.as_slice())?;
        Ok(JacobianOperator {
            g: Arc::new(g),
            x0,
            out_structure: TreeStructure::flat(y0.len()),
            tags: TagSet::empty(),
        })
    }

    pub fn with_out_structure(mut self, structure: TreeStructure) -> Result<Self> {
        if structure.total_dim() != self.out_structure.total_dim() {
            return Err(Error::Structure(format!(
                "jacobian output has dimension {} but {} was given",
                self.out_structure.total_dim(),
                structure
            )));
        }
        self.out_structure = structure;
        Ok(self)
    }

    pub fn with_tags(mut self, tags: TagSet) -> Self {
        self.tags = tags;
        self
    }

    pub fn point(&self) -> &TreeVector {
        &self.x0
    }

    pub fn into_operator(self) -> Operator {
        Arc::new(self)
    }
}

impl<G> fmt::Debug for JacobianOperator<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JacobianOperator")
            .field("x0", &self.x0)
            .field("out_structure", &self.out_structure)
            .field("tags", &self.tags)
            .finish()
    }
}

impl<G: Differentiable + 'static> LinearOperator for JacobianOperator<G> {
    fn in_structure(&self) -> &TreeStructure {
        self.x0.structure()
    }

    fn out_structure(&self) -> &TreeStructure {
        &self.out_structure
    }

    fn tags(&self) -> TagSet {
        self.tags
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let (_, tangent) = forward_derivative(&*self.g, self.x0.as_slice(), v)?;
        Ok(tangent)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        reverse_derivative(&*self.g, self.x0.as_slice(), y)
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::new(TransposedOperator::new(self))
    }
}

/// `Aᵀ` for an operator whose transpose action is only available through
/// [`LinearOperator::apply_transpose`].
#[derive(Debug)]
pub struct TransposedOperator {
    inner: Operator,
}

impl TransposedOperator {
    pub fn new(inner: Operator) -> Self {
        TransposedOperator { inner }
    }
}

impl LinearOperator for TransposedOperator {
    fn in_structure(&self) -> &TreeStructure {
        self.inner.out_structure()
    }

    fn out_structure(&self) -> &TreeStructure {
        self.inner.in_structure()
    }

    fn tags(&self) -> TagSet {
        self.inner.tags().transposed()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply_transpose(x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply(y)
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(self.inner.as_matrix()?.transpose())
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::clone(&self.inner)
    }
}

/// Directional derivative of `g` at `x0` along `v`, by forward-mode
/// propagation. The result has a flat structure.
pub fn jacobian_mv<G: Differentiable + ?Sized>(
    g: &G,
    x0: &TreeVector,
    v: &TreeVector,
) -> Result<TreeVector> {
    x0.structure().expect_eq(v.structure(), "tangent")?;
    let (_, tangent) = forward_derivative(g, x0.as_slice(), v.as_slice())?;
    Ok(TreeVector::from_vec(tangent))
}
