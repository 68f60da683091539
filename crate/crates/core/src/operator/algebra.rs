//! Operators form a vector space closed under composition.

use std::sync::Arc;

use super::{LinearOperator, Operator};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::structure::TreeStructure;
use crate::tags::TagSet;

pub fn transpose(op: &Operator) -> Operator {
    Arc::clone(op).transpose()
}

/// `outer ∘ inner`, i.e. `x ↦ outer(inner(x))`.
pub fn compose(outer: &Operator, inner: &Operator) -> Result<Operator> {
    inner
        .out_structure()
        .expect_eq(outer.in_structure(), "compose")?;
    Ok(Arc::new(ComposedOperator {
        outer: Arc::clone(outer),
        inner: Arc::clone(inner),
    }))
}

pub fn add(a: &Operator, b: &Operator) -> Result<Operator> {
    a.in_structure().expect_eq(b.in_structure(), "add (input)")?;
    a.out_structure().expect_eq(b.out_structure(), "add (output)")?;
    Ok(Arc::new(AddedOperator {
        a: Arc::clone(a),
        b: Arc::clone(b),
    }))
}

pub fn scale(c: f64, a: &Operator) -> Operator {
    Arc::new(ScaledOperator {
        c,
        a: Arc::clone(a),
    })
}

#[derive(Debug)]
pub struct ComposedOperator {
    outer: Operator,
    inner: Operator,
}

impl LinearOperator for ComposedOperator {
    fn in_structure(&self) -> &TreeStructure {
        self.inner.in_structure()
    }

    fn out_structure(&self) -> &TreeStructure {
        self.outer.out_structure()
    }

    fn tags(&self) -> TagSet {
        TagSet::for_compose(self.outer.tags(), self.inner.tags())
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.outer.apply(&self.inner.apply(x)?)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply_transpose(&self.outer.apply_transpose(y)?)
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(self.outer.as_matrix()?.matmul(&self.inner.as_matrix()?))
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::new(ComposedOperator {
            outer: transpose(&self.inner),
            inner: transpose(&self.outer),
        })
    }
}

#[derive(Debug)]
pub struct AddedOperator {
    a: Operator,
    b: Operator,
}

impl LinearOperator for AddedOperator {
    fn in_structure(&self) -> &TreeStructure {
        self.a.in_structure()
    }

    fn out_structure(&self) -> &TreeStructure {
        self.a.out_structure()
    }

    fn tags(&self) -> TagSet {
        TagSet::for_sum(self.a.tags(), self.b.tags())
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.a.apply(x)?;
        for (yi, zi) in y.iter_mut().zip(self.b.apply(x)?) {
            *yi += zi;
        }
        Ok(y)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.a.apply_transpose(y)?;
        for (xi, zi) in x.iter_mut().zip(self.b.apply_transpose(y)?) {
            *xi += zi;
        }
        Ok(x)
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(self.a.as_matrix()?.add(&self.b.as_matrix()?))
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::new(AddedOperator {
            a: transpose(&self.a),
            b: transpose(&self.b),
        })
    }
}

#[derive(Debug)]
pub struct ScaledOperator {
    c: f64,
    a: Operator,
}

impl LinearOperator for ScaledOperator {
    fn in_structure(&self) -> &TreeStructure {
        self.a.in_structure()
    }

    fn out_structure(&self) -> &TreeStructure {
        self.a.out_structure()
    }

    fn tags(&self) -> TagSet {
        TagSet::for_scale(self.c, self.a.tags())
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.a.apply(x)?.into_iter().map(|v| self.c * v).collect())
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .a
            .apply_transpose(y)?
            .into_iter()
            .map(|v| self.c * v)
            .collect())
    }

    fn as_matrix(&self) -> Result<Matrix> {
        Ok(self.a.as_matrix()?.scale(self.c))
    }

    fn transpose(self: Arc<Self>) -> Operator {
        Arc::new(ScaledOperator {
            c: self.c,
            a: transpose(&self.a),
        })
    }
}
