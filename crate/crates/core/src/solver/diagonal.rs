use std::sync::Arc;

use super::{default_rtol, require_square, require_tag, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::TreeVector;

/// `xᵢ = bᵢ / dᵢ` for diagonal-tagged operators.
///
/// With `pseudoinverse` set, (numerically) zero diagonal entries map to a
/// zero solution component instead of failing, which is exactly the
/// pseudoinverse of a diagonal matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagonal {
    pub pseudoinverse: bool,
}

impl Diagonal {
    pub fn pseudoinverse() -> Self {
        Diagonal {
            pseudoinverse: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagonalState {
    diagonal: Arc<[f64]>,
    /// `1/dᵢ`, or 0 for entries dropped by the pseudoinverse.
    inverse: Arc<[f64]>,
    singular: bool,
    spaces: Spaces,
}

impl LinearSolver for Diagonal {
    type State = DiagonalState;

    fn name(&self) -> &'static str {
        if self.pseudoinverse {
            "diagonal_pinv"
        } else {
            "diagonal"
        }
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("diagonal", info)?;
        require_tag("diagonal", info.tags.is_diagonal(), "diagonal")
    }

    fn init(&self, op: &Operator) -> Result<DiagonalState> {
        self.check(&OperatorInfo::of(&**op))?;
        let d = op.diagonal()?;
        let max = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let cutoff = default_rtol(d.len(), d.len()) * max;
        let mut singular = false;
        let inverse = d
            .iter()
            .map(|&v| {
                if self.pseudoinverse {
                    if v.abs() > cutoff && v != 0.0 {
                        1.0 / v
                    } else {
                        0.0
                    }
                } else {
                    if v == 0.0 {
                        singular = true;
                    }
                    1.0 / v
                }
            })
            .collect();
        Ok(DiagonalState {
            diagonal: d.into(),
            inverse,
            singular,
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &DiagonalState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        if state.singular {
            return Ok(Solution::failed(&state.spaces.input, SolveResult::Singular));
        }
        let x = b
            .as_slice()
            .iter()
            .zip(state.inverse.iter())
            .map(|(b, inv)| b * inv)
            .collect();
        Ok(state.spaces.finish(x, b, |x| {
            x.iter().zip(state.diagonal.iter()).map(|(x, d)| x * d).collect()
        }))
    }

    fn transpose(&self, state: &DiagonalState) -> DiagonalState {
        DiagonalState {
            spaces: state.spaces.swapped(),
            ..state.clone()
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        self.pseudoinverse
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        self.pseudoinverse
    }
}
