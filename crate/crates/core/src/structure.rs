//! Tree-structured vector spaces.
//!
//! A [`TreeStructure`] is an ordered tree whose leaves are real arrays of a
//! fixed shape. A [`TreeVector`] is an element of that space. Internally the
//! values are always kept in their canonical flat layout: leaves in
//! depth-first order, children in declaration order, and each leaf in
//! row-major order. Flattening is therefore free and unflattening is a
//! length check.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// One node of a tree structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// A real array with the given shape. An empty shape is a scalar.
    Leaf(Vec<usize>),
    /// Ordered, unnamed children.
    List(Vec<Node>),
    /// Ordered, named children. Order is declaration order, not sorted.
    Dict(Vec<(String, Node)>),
}

impl Node {
    fn visit_leaves<'a>(&'a self, out: &mut Vec<&'a [usize]>) {
        match self {
            Node::Leaf(shape) => out.push(shape),
            Node::List(children) => children.iter().for_each(|c| c.visit_leaves(out)),
            Node::Dict(entries) => entries.iter().for_each(|(_, c)| c.visit_leaves(out)),
        }
    }
}

#[derive(Debug)]
struct Inner {
    root: Node,
    /// (shape, offset into the flat layout) for each leaf, in flattening order.
    leaves: Vec<(Vec<usize>, usize)>,
    total_dim: usize,
}

/// The shape of a vector space of trees of arrays.
///
/// Cloning is cheap. Two structures are equal when they have the same
/// topology, the same keys, and the same leaf shapes in the same order.
#[derive(Clone)]
pub struct TreeStructure {
    inner: Arc<Inner>,
}

impl TreeStructure {
    pub fn new(root: Node) -> Self {
        let mut shapes = Vec::new();
        root.visit_leaves(&mut shapes);
        let mut offset = 0;
        let leaves = shapes
            .into_iter()
            .map(|shape| {
                let start = offset;
                offset += shape.iter().product::<usize>();
                (shape.to_vec(), start)
            })
            .collect();
        TreeStructure {
            inner: Arc::new(Inner {
                root,
                leaves,
                total_dim: offset,
            }),
        }
    }

    /// A single one-dimensional leaf of length `n`.
    pub fn flat(n: usize) -> Self {
        Self::new(Node::Leaf(vec![n]))
    }

    pub fn leaf(shape: impl Into<Vec<usize>>) -> Self {
        Self::new(Node::Leaf(shape.into()))
    }

    pub fn scalar() -> Self {
        Self::new(Node::Leaf(Vec::new()))
    }

    pub fn list(children: impl IntoIterator<Item = TreeStructure>) -> Self {
        Self::new(Node::List(
            children.into_iter().map(|c| c.inner.root.clone()).collect(),
        ))
    }

    pub fn dict<K: Into<String>>(entries: impl IntoIterator<Item = (K, TreeStructure)>) -> Self {
        Self::new(Node::Dict(
            entries
                .into_iter()
                .map(|(k, c)| (k.into(), c.inner.root.clone()))
                .collect(),
        ))
    }

    pub fn root(&self) -> &Node {
        &self.inner.root
    }

    /// Sum over leaves of the product of each leaf's shape.
    pub fn total_dim(&self) -> usize {
        self.inner.total_dim
    }

    pub fn num_leaves(&self) -> usize {
        self.inner.leaves.len()
    }

    /// Leaf shapes with their offsets into the flat layout.
    pub fn leaves(&self) -> impl Iterator<Item = (&[usize], usize)> {
        self.inner.leaves.iter().map(|(s, o)| (s.as_slice(), *o))
    }

    /// Errors unless `other` is the same structure. `what` names the
    /// argument in the message.
    pub fn expect_eq(&self, other: &TreeStructure, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "{what}: expected {self}, found {other}"
            )))
        }
    }
}

impl PartialEq for TreeStructure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.root == other.inner.root
    }
}

impl Eq for TreeStructure {}

impl fmt::Debug for TreeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeStructure({self})")
    }
}

impl fmt::Display for TreeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match node {
                Node::Leaf(shape) => write!(f, "f64{shape:?}"),
                Node::List(children) => {
                    f.write_str("[")?;
                    for (i, c) in children.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write_node(c, f)?;
                    }
                    f.write_str("]")
                }
                Node::Dict(entries) => {
                    f.write_str("{")?;
                    for (i, (k, c)) in entries.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{k}: ")?;
                        write_node(c, f)?;
                    }
                    f.write_str("}")
                }
            }
        }
        write_node(&self.inner.root, f)
    }
}

/// An element of the vector space described by a [`TreeStructure`].
#[derive(Clone, Debug, PartialEq)]
pub struct TreeVector {
    structure: TreeStructure,
    data: Vec<f64>,
}

impl TreeVector {
    /// Builds a vector from its flat representation.
    pub fn unflatten(structure: &TreeStructure, flat: impl Into<Vec<f64>>) -> Result<Self> {
        let data = flat.into();
        if data.len() != structure.total_dim() {
            return Err(Error::Structure(format!(
                "flat vector has length {} but {} has dimension {}",
                data.len(),
                structure,
                structure.total_dim()
            )));
        }
        Ok(TreeVector {
            structure: structure.clone(),
            data,
        })
    }

    /// A single one-dimensional leaf holding `values`.
    pub fn from_vec(values: Vec<f64>) -> Self {
        TreeVector {
            structure: TreeStructure::flat(values.len()),
            data: values,
        }
    }

    pub fn zeros(structure: &TreeStructure) -> Self {
        TreeVector {
            structure: structure.clone(),
            data: vec![0.0; structure.total_dim()],
        }
    }

    /// The `index`-th standard basis vector of `structure`'s flat layout.
    pub fn basis(structure: &TreeStructure, index: usize) -> Self {
        let mut v = Self::zeros(structure);
        v.data[index] = 1.0;
        v
    }

    pub fn structure(&self) -> &TreeStructure {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Leaves concatenated depth-first, each leaf row-major.
    pub fn flatten(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    /// Values of the `index`-th leaf in row-major order.
    pub fn leaf(&self, index: usize) -> &[f64] {
        let (shape, offset) = &self.structure.inner.leaves[index];
        let size: usize = shape.iter().product();
        &self.data[*offset..*offset + size]
    }

    /// Same values, reinterpreted against a structure of equal dimension.
    pub fn restructure(self, structure: &TreeStructure) -> Result<Self> {
        Self::unflatten(structure, self.data)
    }

    pub fn dot(&self, other: &TreeVector) -> Result<f64> {
        self.structure.expect_eq(&other.structure, "dot")?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    /// `alpha * self + y`, leafwise.
    pub fn axpy(&self, alpha: f64, y: &TreeVector) -> Result<TreeVector> {
        self.structure.expect_eq(&y.structure, "axpy")?;
        let data = self
            .data
            .iter()
            .zip(&y.data)
            .map(|(x, y)| alpha * x + y)
            .collect();
        Ok(TreeVector {
            structure: self.structure.clone(),
            data,
        })
    }

    pub fn add(&self, other: &TreeVector) -> Result<TreeVector> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &TreeVector) -> Result<TreeVector> {
        other.axpy(-1.0, self)
    }

    pub fn scale(&self, alpha: f64) -> TreeVector {
        self.map(|x| alpha * x)
    }

    pub fn zeros_like(&self) -> TreeVector {
        TreeVector::zeros(&self.structure)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TreeVector {
        TreeVector {
            structure: self.structure.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Flat representation of `vec`.
pub fn flatten(vec: &TreeVector) -> Vec<f64> {
    vec.flatten()
}

/// Inverse of [`flatten`].
pub fn unflatten(structure: &TreeStructure, flat: &[f64]) -> Result<TreeVector> {
    TreeVector::unflatten(structure, flat.to_vec())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
