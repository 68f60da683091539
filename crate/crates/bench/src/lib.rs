//! Reproducible workloads shared by the benchmarks.

use unisolve_core::random::Sampler;
use unisolve_core::{
    DiagonalOperator, Matrix, MatrixOperator, Operator, TagSet, TreeVector, TridiagonalOperator,
};

/// An operator, a right-hand side, and a tangent direction for derivative
/// benchmarks.
pub struct Workload {
    pub operator: Operator,
    pub rhs: TreeVector,
    pub tangent: Matrix,
}

impl Workload {
    fn new(operator: Operator, rng: &mut Sampler) -> Self {
        let (m, n) = (operator.out_dim(), operator.in_dim());
        Workload {
            rhs: TreeVector::from_vec(rng.vector(m)),
            tangent: rng.matrix(m, n),
            operator,
        }
    }

    /// The same entries as a plain dense operator without tags.
    pub fn densified(&self) -> Operator {
        MatrixOperator::new(self.operator.as_matrix().expect("workloads materialize")).into_operator()
    }
}

/// Diagonally dominant tridiagonal system.
pub fn tridiagonal(n: usize, seed: u64) -> Workload {
    let mut rng = Sampler::new(seed);
    let (lower, main, upper) = rng.dominant_bands(n);
    let op = TridiagonalOperator::new(lower, main, upper)
        .expect("bands have matching lengths")
        .into_operator();
    Workload::new(op, &mut rng)
}

/// Diagonal system with entries in `[0.5, 2]`.
pub fn diagonal(n: usize, seed: u64) -> Workload {
    let mut rng = Sampler::new(seed);
    let d = (0..n).map(|_| rng.uniform(0.5, 2.0)).collect();
    Workload::new(DiagonalOperator::new(d).into_operator(), &mut rng)
}

/// Symmetric positive definite system, tagged as such.
pub fn spd(n: usize, seed: u64) -> Workload {
    let mut rng = Sampler::new(seed);
    let op = MatrixOperator::new(rng.spd(n))
        .with_tags(TagSet::SYMMETRIC | TagSet::POSITIVE_SEMIDEFINITE)
        .into_operator();
    Workload::new(op, &mut rng)
}

/// Full-rank `rows × cols` system without tags.
pub fn dense(rows: usize, cols: usize, seed: u64) -> Workload {
    let mut rng = Sampler::new(seed);
    let op = MatrixOperator::new(rng.well_conditioned(rows, cols)).into_operator();
    Workload::new(op, &mut rng)
}
