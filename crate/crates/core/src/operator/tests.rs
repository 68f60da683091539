use std::sync::Arc;

use proptest::prelude::*;

use super::ad::{Differentiable, Scalar};
use super::*;
use crate::random::Sampler;
use crate::structure::{flatten, unflatten, Node};

fn tv(v: Vec<f64>) -> TreeVector {
    TreeVector::from_vec(v)
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol * (1.0 + y.abs()), "{a:?} vs {b:?}");
    }
}

#[test]
fn tridiagonal_example() {
    let op = TridiagonalOperator::new(vec![1., 1.], vec![2., 2., 2.], vec![1., 1.])
        .unwrap()
        .into_operator();
    assert_eq!(op.mv(&tv(vec![1., 2., 3.])).unwrap().as_slice(), &[4., 8., 8.]);
    assert!(op.tags().is_tridiagonal());
}

#[test]
fn function_operator_materializes() {
    let op = FunctionOperator::from_fn(
        |x| {
            let x = x.as_slice();
            tv(vec![x[0] + x[1], x[1]])
        },
        TreeStructure::flat(2),
    )
    .unwrap()
    .into_operator();
    assert_eq!(op.as_matrix().unwrap(), Matrix::from_rows(&[[1., 1.], [0., 1.]]));
    let t = transpose(&op);
    assert_eq!(t.as_matrix().unwrap(), Matrix::from_rows(&[[1., 0.], [1., 1.]]));
}

#[test]
fn function_operator_rejects_affine() {
    let err = FunctionOperator::from_fn(|x| x.map(|v| v + 1.0), TreeStructure::flat(2)).unwrap_err();
    assert!(matches!(err, Error::Evaluation(_)));
}

#[test]
fn sum_of_diagonals() {
    let a = DiagonalOperator::new(vec![1., 2.]).into_operator();
    let b = DiagonalOperator::new(vec![3., 4.]).into_operator();
    let sum = add(&a, &b).unwrap();
    assert_eq!(sum.as_matrix().unwrap(), Matrix::from_rows(&[[4., 0.], [0., 6.]]));
    assert!(sum.tags().is_diagonal());
}

#[test]
fn scale_by_zero() {
    let a = MatrixOperator::new(Matrix::from_rows(&[[1., 2.], [3., 4.]])).into_operator();
    let z = scale(0.0, &a);
    assert_eq!(z.as_matrix().unwrap(), Matrix::zeros(2, 2));
    assert_eq!(z.mv(&tv(vec![5., 6.])).unwrap().as_slice(), &[0., 0.]);
}

#[test]
fn compose_checks_structures() {
    let a = MatrixOperator::new(Matrix::zeros(2, 3)).into_operator();
    let b = MatrixOperator::new(Matrix::zeros(2, 3)).into_operator();
    assert!(matches!(compose(&a, &b).unwrap_err(), Error::Structure(_)));
    assert!(matches!(add(&a, &transpose(&b)).unwrap_err(), Error::Structure(_)));
}

#[test]
fn structured_operator_spaces() {
    let s = TreeStructure::dict([("u", TreeStructure::leaf([2])), ("p", TreeStructure::scalar())]);
    let op = DiagonalOperator::new(vec![1., 2., 3.])
        .with_structure(s.clone())
        .unwrap()
        .into_operator();
    let x = TreeVector::unflatten(&s, vec![1., 1., 1.]).unwrap();
    let y = op.mv(&x).unwrap();
    assert_eq!(y.structure(), &s);
    assert_eq!(y.leaf(1), &[3.]);
    assert!(op.mv(&tv(vec![1., 1., 1.])).is_err());
}

struct Quad;

impl Differentiable for Quad {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(vec![x[0].clone() * x[0].clone(), x[0].clone() * x[1].clone()])
    }
}

#[test]
fn jacobian_example() {
    let x0 = tv(vec![1., 2.]);
    assert_eq!(jacobian_mv(&Quad, &x0, &tv(vec![1., 0.])).unwrap().as_slice(), &[2., 2.]);
    let op = JacobianOperator::new(Quad, x0).unwrap().into_operator();
    assert_eq!(op.as_matrix().unwrap(), Matrix::from_rows(&[[2., 0.], [2., 1.]]));
    assert_eq!(op.mv_transpose(&tv(vec![1., 1.])).unwrap().as_slice(), &[4., 1.]);
}

/// `y_i = sin(Σ_j a_ij x_j) + x_{i mod n}²`
struct Wave {
    a: Matrix,
}

impl Differentiable for Wave {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let n = x.len();
        Ok((0..self.a.rows())
            .map(|i| {
                let mut acc = S::constant(0.0);
                for (j, xj) in x.iter().enumerate() {
                    acc = acc + xj.clone() * self.a[(i, j)];
                }
                acc.sin() + x[i % n].clone().powi(2)
            })
            .collect())
    }
}

fn wave_fd(g: &Wave, x0: &[f64], v: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let at = |s: f64| {
        let x: Vec<f64> = x0.iter().zip(v).map(|(x, v)| x + s * h * v).collect();
        g.eval::<f64>(&x).unwrap()
    };
    at(1.0).iter().zip(at(-1.0)).map(|(p, m)| (p - m) / (2.0 * h)).collect()
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = Sampler::new(7);
    for (m, n) in [(3, 3), (5, 2), (2, 5)] {
        let g = Wave { a: rng.matrix(m, n) };
        let x0 = rng.vector(n);
        let v = rng.vector(n);
        let fd = wave_fd(&g, &x0, &v);
        let jv = jacobian_mv(&g, &tv(x0), &tv(v)).unwrap();
        assert_close(jv.as_slice(), &fd, 1e-7);
    }
}

struct Linear {
    a: Matrix,
}

impl Differentiable for Linear {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok((0..self.a.rows())
            .map(|i| {
                x.iter()
                    .enumerate()
                    .fold(S::constant(0.0), |acc, (j, xj)| acc + xj.clone() * self.a[(i, j)])
            })
            .collect())
    }
}

#[test]
fn jacobian_of_linear_map_is_the_map() {
    let mut rng = Sampler::new(8);
    let a = rng.matrix(4, 3);
    let op = JacobianOperator::new(Linear { a: a.clone() }, tv(rng.vector(3)))
        .unwrap()
        .into_operator();
    assert_close(op.as_matrix().unwrap().as_slice(), a.as_slice(), 1e-15);
    let x = rng.vector(3);
    assert_close(op.apply(&x).unwrap().as_slice(), &a.matvec(&x), 1e-15);
}

/// One operator of each kind, built from a seed, with its dense matrix as
/// computed independently of the operator.
fn operator_zoo(kind: usize, m: usize, n: usize, seed: u64) -> (Operator, Matrix) {
    let mut rng = Sampler::new(seed);
    let dense = rng.matrix(m, n);
    match kind {
        0 => (MatrixOperator::new(dense.clone()).into_operator(), dense),
        1 => (
            IdentityOperator::new(TreeStructure::flat(n)).into_operator(),
            Matrix::identity(n),
        ),
        2 => {
            let d = rng.vector(n);
            (DiagonalOperator::new(d.clone()).into_operator(), Matrix::from_diagonal(&d))
        }
        3 => {
            let (l, d, u) = (rng.vector(n - 1), rng.vector(n), rng.vector(n - 1));
            let bands = Bands::new(l.clone(), d.clone(), u.clone()).unwrap();
            let full = Matrix::from_fn(n, n, |i, j| {
                if i == j {
                    d[i]
                } else if i == j + 1 {
                    l[j]
                } else if j == i + 1 {
                    u[i]
                } else {
                    0.0
                }
            });
            (TridiagonalOperator::from_bands(bands).into_operator(), full)
        }
        4 | 5 => {
            let a = Arc::new(dense.clone());
            let fwd = Arc::clone(&a);
            let mut op = FunctionOperator::from_fn(
                move |x| tv(fwd.matvec(x.as_slice())),
                TreeStructure::flat(n),
            )
            .unwrap();
            if kind == 5 {
                let bwd = Arc::clone(&a);
                op = op.with_transpose(Arc::new(move |y: &TreeVector| tv(bwd.matvec_t(y.as_slice()))));
            }
            (op.into_operator(), dense)
        }
        6 => {
            let g = Linear { a: dense.clone() };
            (JacobianOperator::new(g, tv(rng.vector(n))).unwrap().into_operator(), dense)
        }
        7 => {
            let inner = rng.matrix(n, n);
            let outer = MatrixOperator::new(dense.clone()).into_operator();
            let op = compose(&outer, &MatrixOperator::new(inner.clone()).into_operator()).unwrap();
            (op, dense.matmul(&inner))
        }
        8 => {
            let other = rng.matrix(m, n);
            let op = add(
                &MatrixOperator::new(dense.clone()).into_operator(),
                &MatrixOperator::new(other.clone()).into_operator(),
            )
            .unwrap();
            (op, dense.add(&other))
        }
        9 => {
            let c = rng.uniform(-3.0, 3.0);
            (scale(c, &MatrixOperator::new(dense.clone()).into_operator()), dense.scale(c))
        }
        _ => {
            let inner = MatrixOperator::new(dense.transpose()).into_operator();
            (Arc::new(TransposedOperator::new(inner)) as Operator, dense)
        }
    }
}

const KINDS: usize = 11;

proptest! {
    #[test]
    fn adjoint_identity(kind in 0..KINDS, m in 1usize..7, n in 2usize..7, seed: u64) {
        let (op, dense) = operator_zoo(kind, m, n, seed);
        let (rows, cols) = dense.shape();
        let mut rng = Sampler::new(seed ^ 0x5eed);
        let x = rng.vector(cols);
        let y = rng.vector(rows);
        let ax = op.apply(&x).unwrap();
        let aty = op.apply_transpose(&y).unwrap();
        let lhs: f64 = y.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let rhs: f64 = aty.iter().zip(&x).map(|(a, b)| a * b).sum();
        let scale: f64 = 1.0 + ax.iter().chain(&aty).map(|v| v.abs()).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");

        // The transposed operator agrees with the transpose action.
        let t = transpose(&op);
        let ty = t.apply(&y).unwrap();
        for (a, b) in ty.iter().zip(&aty) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        // Materialization matches the independently built matrix.
        let mat = op.as_matrix().unwrap();
        prop_assert_eq!(mat.shape(), dense.shape());
        for (a, b) in mat.as_slice().iter().zip(dense.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn vector_space_laws(
        kind in 0..KINDS, m in 1usize..6, n in 2usize..6, seed: u64,
        alpha in -5.0f64..5.0, beta in -5.0f64..5.0,
    ) {
        let (op, _) = operator_zoo(kind, m, n, seed);
        let mut rng = Sampler::new(seed.wrapping_add(1));
        let x = tv(rng.vector(op.in_dim()));
        let y = tv(rng.vector(op.in_dim()));
        let lhs = op.mv(&x.scale(alpha).add(&y.scale(beta)).unwrap()).unwrap();
        let rhs = op.mv(&x).unwrap().scale(alpha).add(&op.mv(&y).unwrap().scale(beta)).unwrap();
        for (a, b) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }

        // (A + B) x = A x + B x, (cA) x = c (A x), (AB)ᵀ = BᵀAᵀ.
        let (other, _) = operator_zoo(0, op.out_dim(), op.in_dim(), seed.wrapping_add(2));
        let other = if other.in_structure() == op.in_structure() {
            other
        } else {
            MatrixOperator::new(other.as_matrix().unwrap()).into_operator()
        };
        let sum = add(&op, &other).unwrap().mv(&x).unwrap();
        let parts = op.mv(&x).unwrap().add(&other.mv(&x).unwrap()).unwrap();
        for (a, b) in sum.as_slice().iter().zip(parts.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
        let scaled = scale(alpha, &op).mv(&x).unwrap();
        for (a, b) in scaled.as_slice().iter().zip(op.mv(&x).unwrap().scale(alpha).as_slice()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
        let inner = MatrixOperator::new(rng.matrix(op.in_dim(), 3)).into_operator();
        let ab_t = transpose(&compose(&op, &inner).unwrap()).as_matrix().unwrap();
        let bt_at = compose(&transpose(&inner), &transpose(&op)).unwrap().as_matrix().unwrap();
        for (a, b) in ab_t.as_slice().iter().zip(bt_at.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }
}

fn count_leaves(node: &Node) -> usize {
    match node {
        Node::Leaf(_) => 1,
        Node::List(c) => c.iter().map(count_leaves).sum(),
        Node::Dict(c) => c.iter().map(|(_, n)| count_leaves(n)).sum(),
    }
}

fn depth(node: &Node) -> usize {
    match node {
        Node::Leaf(_) => 1,
        Node::List(c) => 1 + c.iter().map(depth).max().unwrap_or(0),
        Node::Dict(c) => 1 + c.iter().map(|(_, n)| depth(n)).max().unwrap_or(0),
    }
}

fn structure_strategy() -> impl Strategy<Value = TreeStructure> {
    // Leaves of up to 16 entries: at most two axes of length at most 4.
    let leaf = prop::collection::vec(0usize..=4, 0..=2).prop_map(Node::Leaf);
    leaf.prop_recursive(3, 8, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Node::List),
            prop::collection::vec(inner, 0..4).prop_map(|children| {
                Node::Dict(
                    children
                        .into_iter()
                        .enumerate()
                        .map(|(i, n)| (format!("k{i}"), n))
                        .collect(),
                )
            }),
        ]
    })
    .prop_filter("at most 8 leaves and depth 4", |n| count_leaves(n) <= 8 && depth(n) <= 4)
    .prop_map(TreeStructure::new)
}

fn vector_strategy() -> impl Strategy<Value = (TreeStructure, Vec<f64>, Vec<f64>)> {
    structure_strategy().prop_flat_map(|s| {
        let n = s.total_dim();
        (
            Just(s),
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

proptest! {
    #[test]
    fn flatten_round_trip((s, data, _) in vector_strategy()) {
        let v = unflatten(&s, &data).unwrap();
        prop_assert_eq!(flatten(&v), data.clone());
        prop_assert_eq!(unflatten(&s, &flatten(&v)).unwrap(), v);
        let offsets: usize = s.leaves().map(|(shape, _)| shape.iter().product::<usize>()).sum();
        prop_assert_eq!(offsets, s.total_dim());
    }

    #[test]
    fn dot_and_axpy_bilinear((s, a, b) in vector_strategy(), alpha in -4.0f64..4.0) {
        let x = unflatten(&s, &a).unwrap();
        let y = unflatten(&s, &b).unwrap();
        let dot_xy = x.dot(&y).unwrap();
        prop_assert!((dot_xy - y.dot(&x).unwrap()).abs() <= 1e-12 * (1.0 + dot_xy.abs()));
        let z = x.axpy(alpha, &y).unwrap();
        for ((zi, xi), yi) in z.as_slice().iter().zip(&a).zip(&b) {
            prop_assert!((zi - (alpha * xi + yi)).abs() <= 1e-12 * (1.0 + zi.abs()));
        }
        let lhs = z.dot(&y).unwrap();
        let rhs = alpha * dot_xy + y.dot(&y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        prop_assert!(x.norm() >= 0.0);
        prop_assert!((x.norm().powi(2) - x.dot(&x).unwrap()).abs() <= 1e-10 * (1.0 + x.norm().powi(2)));
    }
}
