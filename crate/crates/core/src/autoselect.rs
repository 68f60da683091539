//! The unified `linear_solve` entry point and the automatic solver choice.
//!
//! Selection looks only at the operator's shape and tags (an
//! [`OperatorInfo`]), never at its entries, so the choice is fixed as soon
//! as the operator is built.
//!
//! | mode                        | shape      | tags (first match wins)            | solver           |
//! |-----------------------------|------------|------------------------------------|------------------|
//! | `WellPosed`                 | non-square | any                                | error            |
//! | `WellPosed` / `LeastSquares`| square     | diagonal                           | diagonal         |
//! |                             |            | tridiagonal                        | tridiagonal      |
//! |                             |            | lower or upper triangular          | triangular       |
//! |                             |            | symmetric + positive semidefinite  | cholesky         |
//! |                             |            | none of the above                  | lu               |
//! | `LeastSquares`              | non-square | any                                | qr               |
//! | `Pseudoinverse`             | square     | diagonal                           | diagonal (pinv)  |
//! |                             | otherwise  | any                                | svd              |

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Operator, OperatorInfo};
use crate::solver::{
    BiCgStab, Cg, Cholesky, CholeskyState, Diagonal, DiagonalState, Gmres, IterativeOptions,
    KrylovState, LinearSolver, Lu, LuState, Qr, QrState, Solution, Svd, SvdState, Triangular,
    TriangularState, Tridiagonal, TridiagonalState,
};
use crate::structure::TreeVector;

/// How much the caller promises about the system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum WellPosedMode {
    /// `well_posed=true`: square and nonsingular. Anything else is an error.
    #[default]
    WellPosed,
    /// `well_posed=none`: solve least-squares problems when that is cheap
    /// (full-rank QR), otherwise behave as `WellPosed`.
    LeastSquares,
    /// `well_posed=false`: full pseudoinverse semantics for any rank.
    Pseudoinverse,
}

impl WellPosedMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WellPosedMode::WellPosed => "true",
            WellPosedMode::LeastSquares => "none",
            WellPosedMode::Pseudoinverse => "false",
        }
    }
}

impl FromStr for WellPosedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(WellPosedMode::WellPosed),
            "none" => Ok(WellPosedMode::LeastSquares),
            "false" => Ok(WellPosedMode::Pseudoinverse),
            other => Err(Error::Contract(format!(
                "unknown well_posed mode `{other}` (expected true, false or none)"
            ))),
        }
    }
}

impl fmt::Display for WellPosedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any built-in solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnySolver {
    Lu(Lu),
    Qr(Qr),
    Svd(Svd),
    Cholesky(Cholesky),
    Diagonal(Diagonal),
    Triangular(Triangular),
    Tridiagonal(Tridiagonal),
    Cg(Cg),
    Gmres(Gmres),
    BiCgStab(BiCgStab),
}

/// State of whichever solver an [`AnySolver`] holds.
#[derive(Clone, Debug)]
pub enum AnyState {
    Lu(LuState),
    Qr(QrState),
    Svd(SvdState),
    Cholesky(CholeskyState),
    Diagonal(DiagonalState),
    Triangular(TriangularState),
    Tridiagonal(TridiagonalState),
    Krylov(KrylovState),
}

impl AnySolver {
    pub const NAMES: [&'static str; 10] = [
        "lu",
        "qr",
        "svd",
        "cholesky",
        "diagonal",
        "triangular",
        "tridiagonal",
        "cg",
        "gmres",
        "bicgstab",
    ];

    /// Looks a solver up by name. `options` only affects the Krylov solvers.
    pub fn from_name(name: &str, options: IterativeOptions) -> Result<Self> {
        Ok(match name {
            "lu" => AnySolver::Lu(Lu),
            "qr" => AnySolver::Qr(Qr),
            "svd" => AnySolver::Svd(Svd::default()),
            "cholesky" => AnySolver::Cholesky(Cholesky),
            "diagonal" => AnySolver::Diagonal(Diagonal::default()),
            "diagonal_pinv" => AnySolver::Diagonal(Diagonal::pseudoinverse()),
            "triangular" => AnySolver::Triangular(Triangular),
            "tridiagonal" => AnySolver::Tridiagonal(Tridiagonal),
            "cg" => AnySolver::Cg(Cg::new(options)),
            "gmres" => AnySolver::Gmres(Gmres::new(options)),
            "bicgstab" => AnySolver::BiCgStab(BiCgStab::new(options)),
            other => {
                return Err(Error::Contract(format!(
                    "unknown solver `{other}` (expected auto or one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

macro_rules! dispatch {
    ($self:expr, $s:ident => $body:expr) => {
        match $self {
            AnySolver::Lu($s) => $body,
            AnySolver::Qr($s) => $body,
            AnySolver::Svd($s) => $body,
            AnySolver::Cholesky($s) => $body,
            AnySolver::Diagonal($s) => $body,
            AnySolver::Triangular($s) => $body,
            AnySolver::Tridiagonal($s) => $body,
            AnySolver::Cg($s) => $body,
            AnySolver::Gmres($s) => $body,
            AnySolver::BiCgStab($s) => $body,
        }
    };
}

macro_rules! with_state {
    ($self:expr, $state:expr, $s:ident, $st:ident => $body:expr) => {
        match ($self, $state) {
            (AnySolver::Lu($s), AnyState::Lu($st)) => $body,
            (AnySolver::Qr($s), AnyState::Qr($st)) => $body,
            (AnySolver::Svd($s), AnyState::Svd($st)) => $body,
            (AnySolver::Cholesky($s), AnyState::Cholesky($st)) => $body,
            (AnySolver::Diagonal($s), AnyState::Diagonal($st)) => $body,
            (AnySolver::Triangular($s), AnyState::Triangular($st)) => $body,
            (AnySolver::Tridiagonal($s), AnyState::Tridiagonal($st)) => $body,
            (AnySolver::Cg($s), AnyState::Krylov($st)) => $body,
            (AnySolver::Gmres($s), AnyState::Krylov($st)) => $body,
            (AnySolver::BiCgStab($s), AnyState::Krylov($st)) => $body,
            (solver, _) => panic!("state does not belong to solver {}", solver.name()),
        }
    };
}

impl LinearSolver for AnySolver {
    type State = AnyState;

    fn name(&self) -> &'static str {
        dispatch!(self, s => s.name())
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        dispatch!(self, s => s.check(info))
    }

    fn init(&self, op: &Operator) -> Result<AnyState> {
        Ok(match self {
            AnySolver::Lu(s) => AnyState::Lu(s.init(op)?),
            AnySolver::Qr(s) => AnyState::Qr(s.init(op)?),
            AnySolver::Svd(s) => AnyState::Svd(s.init(op)?),
            AnySolver::Cholesky(s) => AnyState::Cholesky(s.init(op)?),
            AnySolver::Diagonal(s) => AnyState::Diagonal(s.init(op)?),
            AnySolver::Triangular(s) => AnyState::Triangular(s.init(op)?),
            AnySolver::Tridiagonal(s) => AnyState::Tridiagonal(s.init(op)?),
            AnySolver::Cg(s) => AnyState::Krylov(s.init(op)?),
            AnySolver::Gmres(s) => AnyState::Krylov(s.init(op)?),
            AnySolver::BiCgStab(s) => AnyState::Krylov(s.init(op)?),
        })
    }

    fn compute(&self, state: &AnyState, b: &TreeVector) -> Result<Solution> {
        with_state!(self, state, s, st => s.compute(st, b))
    }

    fn transpose(&self, state: &AnyState) -> AnyState {
        match (self, state) {
            (AnySolver::Lu(s), AnyState::Lu(st)) => AnyState::Lu(s.transpose(st)),
            (AnySolver::Qr(s), AnyState::Qr(st)) => AnyState::Qr(s.transpose(st)),
            (AnySolver::Svd(s), AnyState::Svd(st)) => AnyState::Svd(s.transpose(st)),
            (AnySolver::Cholesky(s), AnyState::Cholesky(st)) => {
                AnyState::Cholesky(s.transpose(st))
            }
            (AnySolver::Diagonal(s), AnyState::Diagonal(st)) => {
                AnyState::Diagonal(s.transpose(st))
            }
            (AnySolver::Triangular(s), AnyState::Triangular(st)) => {
                AnyState::Triangular(s.transpose(st))
            }
            (AnySolver::Tridiagonal(s), AnyState::Tridiagonal(st)) => {
                AnyState::Tridiagonal(s.transpose(st))
            }
            (AnySolver::Cg(s), AnyState::Krylov(st)) => AnyState::Krylov(s.transpose(st)),
            (AnySolver::Gmres(s), AnyState::Krylov(st)) => AnyState::Krylov(s.transpose(st)),
            (AnySolver::BiCgStab(s), AnyState::Krylov(st)) => AnyState::Krylov(s.transpose(st)),
            (solver, _) => panic!("state does not belong to solver {}", solver.name()),
        }
    }

    fn allow_dependent_rows(&self, info: &OperatorInfo) -> bool {
        dispatch!(self, s => s.allow_dependent_rows(info))
    }

    fn allow_dependent_columns(&self, info: &OperatorInfo) -> bool {
        dispatch!(self, s => s.allow_dependent_columns(info))
    }
}

/// Chooses a solver from shape, tags and mode. See the module table.
pub fn auto_select(info: &OperatorInfo, mode: WellPosedMode) -> Result<AnySolver> {
    let square_chain = |tags: crate::TagSet| {
        if tags.is_diagonal() {
            AnySolver::Diagonal(Diagonal::default())
        } else if tags.is_tridiagonal() {
            AnySolver::Tridiagonal(Tridiagonal)
        } else if tags.is_triangular() {
            AnySolver::Triangular(Triangular)
        } else if tags.is_symmetric() && tags.is_positive_semidefinite() {
            AnySolver::Cholesky(Cholesky)
        } else {
            AnySolver::Lu(Lu)
        }
    };
    match mode {
        WellPosedMode::WellPosed => {
            if !info.is_square() {
                return Err(Error::Contract(format!(
                    "well_posed=true requires a square operator, got {}x{} \
                     (use well_posed=none or false for least-squares problems)",
                    info.rows, info.cols
                )));
            }
            Ok(square_chain(info.tags))
        }
        WellPosedMode::LeastSquares => Ok(if info.is_square() {
            square_chain(info.tags)
        } else {
            AnySolver::Qr(Qr)
        }),
        WellPosedMode::Pseudoinverse => Ok(if info.is_square() && info.tags.is_diagonal() {
            AnySolver::Diagonal(Diagonal::pseudoinverse())
        } else {
            AnySolver::Svd(Svd::default())
        }),
    }
}

/// The default solver: picks a concrete solver when it is initialized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AutoLinearSolver {
    pub well_posed: WellPosedMode,
}

impl AutoLinearSolver {
    pub fn new(well_posed: WellPosedMode) -> Self {
        AutoLinearSolver { well_posed }
    }

    pub fn well_posed() -> Self {
        Self::new(WellPosedMode::WellPosed)
    }

    pub fn least_squares() -> Self {
        Self::new(WellPosedMode::LeastSquares)
    }

    pub fn pseudoinverse() -> Self {
        Self::new(WellPosedMode::Pseudoinverse)
    }

    pub fn select(&self, op: &dyn LinearOperator) -> Result<AnySolver> {
        auto_select(&OperatorInfo::of(op), self.well_posed)
    }
}

#[derive(Clone, Debug)]
pub struct AutoState {
    pub selected: AnySolver,
    pub inner: AnyState,
}

impl LinearSolver for AutoLinearSolver {
    type State = AutoState;

    fn name(&self) -> &'static str {
        "auto"
    }

    fn check(&self, info: &OperatorInfo) -> Result<()> {
        auto_select(info, self.well_posed)?.check(info)
    }

    fn init(&self, op: &Operator) -> Result<AutoState> {
        let selected = self.select(&**op)?;
        Ok(AutoState {
            selected,
            inner: selected.init(op)?,
        })
    }

    fn compute(&self, state: &AutoState, b: &TreeVector) -> Result<Solution> {
        state.selected.compute(&state.inner, b)
    }

    fn transpose(&self, state: &AutoState) -> AutoState {
        AutoState {
            selected: state.selected,
            inner: state.selected.transpose(&state.inner),
        }
    }

    fn allow_dependent_rows(&self, info: &OperatorInfo) -> bool {
        auto_select(info, self.well_posed).is_ok_and(|s| s.allow_dependent_rows(info))
    }

    fn allow_dependent_columns(&self, info: &OperatorInfo) -> bool {
        auto_select(info, self.well_posed).is_ok_and(|s| s.allow_dependent_columns(info))
    }
}

/// Validates that `solver` accepts `op`'s shape and tags.
pub fn check_compatibility<S: LinearSolver + ?Sized>(solver: &S, op: &dyn LinearOperator) -> Result<()> {
    solver.check(&OperatorInfo::of(op))
}

/// Solves `A x = b` in the pseudoinverse sense with `solver`.
///
/// Structural mismatches and solver/operator incompatibilities are errors;
/// numerical failures are reported in [`Solution::result`].
pub fn linear_solve<S: LinearSolver + ?Sized>(
    op: &Operator,
    b: &TreeVector,
    solver: &S,
) -> Result<Solution> {
    op.out_structure().expect_eq(b.structure(), "right-hand side")?;
    check_compatibility(solver, &**op)?;
    let state = solver.init(op)?;
    solver.compute(&state, b)
}
