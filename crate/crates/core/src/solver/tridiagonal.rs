//! Thomas algorithm. No pivoting: a zero pivot during elimination is
//! reported as singular even if the matrix is nonsingular. Use LU on the
//! materialized operator when pivoting is needed.

use std::sync::Arc;

use super::{require_square, require_tag, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::operator::{Bands, Operator, OperatorInfo};
use crate::structure::TreeVector;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tridiagonal;

#[derive(Clone, Debug)]
pub struct TridiagonalState {
    bands: Arc<Bands>,
    transposed: bool,
    spaces: Spaces,
}

/// Solves the tridiagonal system in `O(n)`. `None` on a zero pivot.
fn thomas(lower: &[f64], main: &[f64], upper: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = main.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = main[0];
    if pivot == 0.0 {
        return None;
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = b[0] / pivot;
    for i in 1..n {
        pivot = main[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 {
            return None;
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (b[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

impl LinearSolver for Tridiagonal {
    type State = TridiagonalState;

    fn name(&self) -> &'static str {
        "tridiagonal"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        require_square("tridiagonal", info)?;
        require_tag("tridiagonal", info.tags.is_tridiagonal(), "tridiagonal")
    }

    fn init(&self, op: &Operator) -> Result<TridiagonalState> {
        self.check(&OperatorInfo::of(&**op))?;
        Ok(TridiagonalState {
            bands: Arc::new(op.tridiagonal()?),
            transposed: false,
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &TridiagonalState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        let bands = &*state.bands;
        let (lower, upper) = if state.transposed {
            (&bands.upper, &bands.lower)
        } else {
            (&bands.lower, &bands.upper)
        };
        match thomas(lower, &bands.main, upper, b.as_slice()) {
            None => Ok(Solution::failed(&state.spaces.input, SolveResult::Singular)),
            Some(x) => Ok(state.spaces.finish(x, b, |x| {
                if state.transposed {
                    bands.transposed().matvec(x)
                } else {
                    bands.matvec(x)
                }
            })),
        }
    }

    fn transpose(&self, state: &TridiagonalState) -> TridiagonalState {
        TridiagonalState {
            bands: Arc::clone(&state.bands),
            transposed: !state.transposed,
            spaces: state.spaces.swapped(),
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        false
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        false
    }
}
