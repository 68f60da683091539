use std::sync::Arc;

use super::{require_square, require_tag, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::TreeVector;

/// Forward or back substitution for triangular-tagged operators. With the
/// `unit_diagonal` tag the diagonal is taken to be one and never read.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Triangular;

#[derive(Clone, Debug)]
pub struct TriangularState {
    a: Arc<Matrix>,
    /// Orientation of the stored matrix.
    lower: bool,
    unit: bool,
    singular: bool,
    transposed: bool,
    spaces: Spaces,
}

impl TriangularState {
    /// Whether the system currently solved is lower triangular.
    pub fn solves_lower(&self) -> bool {
        self.lower != self.transposed
    }
}

impl LinearSolver for Triangular {
    type State = TriangularState;

    fn name(&self) -> &'static str {
        "triangular"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("triangular", info)?;
        require_tag(
            "triangular",
            info.tags.is_triangular(),
            "lower_triangular` or `upper_triangular",
        )
    }

    fn init(&self, op: &Operator) -> Result<TriangularState> {
        let info = OperatorInfo::of(&**op);
        self.check(&info)?;
        let a = op.as_matrix()?;
        let unit = info.tags.is_unit_diagonal();
        let singular = !unit && a.diagonal().contains(&0.0);
        Ok(TriangularState {
            a: Arc::new(a),
            lower: info.tags.is_lower_triangular(),
            unit,
            singular,
            transposed: false,
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &TriangularState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        if state.singular {
            return Ok(Solution::failed(&state.spaces.input, SolveResult::Singular));
        }
        let a = &*state.a;
        // Entry (i, j) of the system matrix, which is `a` or `aᵀ`.
        let at = |i: usize, j: usize| if state.transposed { a[(j, i)] } else { a[(i, j)] };
        let diag = |i: usize| if state.unit { 1.0 } else { a[(i, i)] };
        let n = b.len();
        let mut x = b.flatten();
        if state.solves_lower() {
            for i in 0..n {
                let s: f64 = (0..i).map(|j| at(i, j) * x[j]).sum();
                x[i] = (x[i] - s) / diag(i);
            }
        } else {
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|j| at(i, j) * x[j]).sum();
                x[i] = (x[i] - s) / diag(i);
            }
        }
        // Residual against the triangular matrix actually used.
        Ok(state.spaces.finish(x, b, |x| {
            (0..n)
                .map(|i| {
                    let range = if state.solves_lower() { 0..i } else { i + 1..n };
                    diag(i) * x[i] + range.map(|j| at(i, j) * x[j]).sum::<f64>()
                })
                .collect()
        }))
    }

    fn transpose(&self, state: &TriangularState) -> TriangularState {
        TriangularState {
            a: Arc::clone(&state.a),
            transposed: !state.transposed,
            spaces: state.spaces.swapped(),
            ..*state
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        false
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::MatrixOperator;
    use crate::random::Sampler;
    use crate::solver::test_util::{assert_close, dense_solve};
    use crate::tags::TagSet;

    fn op(a: Matrix, tags: TagSet) -> Operator {
        MatrixOperator::new(a).with_tags(tags).into_operator()
    }

    #[test]
    fn unit_lower_by_hand() {
        let a = op(
            Matrix::from_rows(&[[1., 0.], [2., 1.]]),
            TagSet::LOWER_TRIANGULAR | TagSet::UNIT_DIAGONAL,
        );
        let sol = Triangular
            .compute(&Triangular.init(&a).unwrap(), &TreeVector::from_vec(vec![1., 4.]))
            .unwrap();
        assert_eq!(sol.value.as_slice(), &[1., 2.]);
    }

    #[test]
    fn unit_flag_ignores_stored_diagonal() {
        let a = op(
            Matrix::from_rows(&[[7., 0.], [2., 9.]]),
            TagSet::LOWER_TRIANGULAR | TagSet::UNIT_DIAGONAL,
        );
        let sol = Triangular
            .compute(&Triangular.init(&a).unwrap(), &TreeVector::from_vec(vec![1., 4.]))
            .unwrap();
        assert_eq!(sol.value.as_slice(), &[1., 2.]);
    }

    #[test]
    fn upper_identity() {
        let a = op(Matrix::identity(3), TagSet::UPPER_TRIANGULAR);
        let b = TreeVector::from_vec(vec![1., 2., 3.]);
        let sol = Triangular.compute(&Triangular.init(&a).unwrap(), &b).unwrap();
        assert_eq!(sol.value, b);
    }

    #[test]
    fn zero_diagonal_singular() {
        let a = op(Matrix::from_rows(&[[1., 0.], [2., 0.]]), TagSet::LOWER_TRIANGULAR);
        let sol = Triangular
            .compute(&Triangular.init(&a).unwrap(), &TreeVector::from_vec(vec![1., 4.]))
            .unwrap();
        assert_eq!(sol.result, SolveResult::Singular);
    }

    fn random_triangular(rng: &mut Sampler, n: usize, lower: bool) -> Matrix {
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                rng.uniform(1.0, 2.0)
            } else if (lower && j < i) || (!lower && j > i) {
                rng.uniform(-1.0, 1.0)
            } else {
                0.0
            }
        })
    }

    #[test]
    fn random_against_elimination_both_orientations() {
        let mut rng = Sampler::new(51);
        for lower in [true, false] {
            let a = random_triangular(&mut rng, 7, lower);
            let b = rng.vector(7);
            let tag = if lower { TagSet::LOWER_TRIANGULAR } else { TagSet::UPPER_TRIANGULAR };
            let st = Triangular.init(&op(a.clone(), tag)).unwrap();
            let x = Triangular.compute(&st, &TreeVector::from_vec(b.clone())).unwrap();
            assert_close(x.value.as_slice(), &dense_solve(&a, &b), 1e-12);
            let xt = Triangular
                .compute(&Triangular.transpose(&st), &TreeVector::from_vec(b.clone()))
                .unwrap();
            assert_close(xt.value.as_slice(), &dense_solve(&a.transpose(), &b), 1e-12);
        }
    }
}
