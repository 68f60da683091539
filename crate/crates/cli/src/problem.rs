//! Reading operators and right-hand sides, and turning solver flags into a
//! concrete solver.

use std::fs;
use std::path::Path;

use clap::Args;
use serde_json::Value;
use unisolve_core::io::{read_matrix_market, tree_from_json};
use unisolve_core::operator::Bands;
use unisolve_core::random::Sampler;
use unisolve_core::structure::TreeStructure;
use unisolve_core::{
    auto_select, AnySolver, DiagonalOperator, Error, IterativeOptions, LinearOperator, Matrix,
    MatrixOperator, Operator, OperatorInfo, Result, TagSet, TreeVector, TridiagonalOperator,
    WellPosedMode,
};

/// Operator entries before tags and tree structures are attached.
#[derive(Clone, Debug)]
pub enum OperatorData {
    Dense(Matrix),
    Diagonal(Vec<f64>),
    Tridiagonal(Bands),
}

impl OperatorData {
    pub fn rows(&self) -> usize {
        match self {
            OperatorData::Dense(m) => m.rows(),
            OperatorData::Diagonal(d) => d.len(),
            OperatorData::Tridiagonal(b) => b.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            OperatorData::Dense(m) => m.cols(),
            OperatorData::Diagonal(d) => d.len(),
            OperatorData::Tridiagonal(b) => b.len(),
        }
    }

    /// Builds the operator. Its output space takes the structure of the
    /// right-hand side; its input space does too when the operator is
    /// square, and is a flat vector otherwise.
    pub fn build(self, tags: TagSet, rhs: &TreeStructure) -> Result<Operator> {
        if rhs.total_dim() != self.rows() {
            return Err(Error::Structure(format!(
                "operator has {} rows but the right-hand side has {} entries",
                self.rows(),
                rhs.total_dim()
            )));
        }
        let in_structure = if self.rows() == self.cols() {
            rhs.clone()
        } else {
            TreeStructure::flat(self.cols())
        };
        Ok(match self {
            OperatorData::Dense(m) => MatrixOperator::new(m)
                .with_tags(tags)
                .with_structures(in_structure, rhs.clone())?
                .into_operator(),
            OperatorData::Diagonal(d) => DiagonalOperator::new(d)
                .with_tags(tags)
                .with_structure(in_structure)?
                .into_operator(),
            OperatorData::Tridiagonal(b) => TridiagonalOperator::from_bands(b)
                .with_tags(tags)
                .with_structure(in_structure)?
                .into_operator(),
        })
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn read_json(path: &Path) -> Result<Value> {
    parse_json(&read_text(path)?)
}

/// Reads a Matrix Market file (recognized by its banner) or a JSON
/// operator. Tags implied by the file, such as a symmetric Matrix Market
/// header, are returned alongside the entries.
pub fn read_operator(path: &Path) -> Result<(OperatorData, TagSet)> {
    let text = read_text(path)?;
    if text.trim_start().starts_with("%%MatrixMarket") {
        let mtx = read_matrix_market(text.as_bytes())?;
        return Ok((OperatorData::Dense(mtx.matrix), mtx.tags));
    }
    Ok((operator_from_json(&parse_json(&text)?)?, TagSet::empty()))
}

fn float_array(value: &Value, what: &str) -> Result<Vec<f64>> {
    let bad = || Error::Format(format!("`{what}` must be an array of numbers"));
    value
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|v| v.as_f64().ok_or_else(bad))
        .collect()
}

/// Accepts `[[..], ..]`, `{"dense": [[..], ..]}`, `{"diagonal": [..]}` and
/// `{"tridiagonal": {"lower": [..], "main": [..], "upper": [..]}}`.
pub fn operator_from_json(value: &Value) -> Result<OperatorData> {
    if value.is_array() {
        return Ok(OperatorData::Dense(unisolve_core::io::matrix_from_json(value)?));
    }
    let object = value.as_object().filter(|o| o.len() == 1).ok_or_else(|| {
        Error::Format("an operator is a dense array or an object with one of `dense`, `diagonal`, `tridiagonal`".into())
    })?;
    let (kind, body) = object.iter().next().expect("one entry");
    match kind.as_str() {
        "dense" => Ok(OperatorData::Dense(unisolve_core::io::matrix_from_json(body)?)),
        "diagonal" => Ok(OperatorData::Diagonal(float_array(body, "diagonal")?)),
        "tridiagonal" => {
            let band = |name: &str| {
                body.get(name)
                    .ok_or_else(|| Error::Format(format!("tridiagonal operator is missing `{name}`")))
                    .and_then(|v| float_array(v, name))
            };
            Ok(OperatorData::Tridiagonal(Bands::new(band("lower")?, band("main")?, band("upper")?)?))
        }
        other => Err(Error::Format(format!("unknown operator kind `{other}`"))),
    }
}

/// A reproducible random operator of `kind` and size `n`, with the tags its
/// construction guarantees.
pub fn generate_operator(kind: &str, n: usize, seed: u64) -> Result<(OperatorData, TagSet)> {
    let mut rng = Sampler::new(seed);
    Ok(match kind {
        "dense" => (OperatorData::Dense(rng.well_conditioned(n, n)), TagSet::empty()),
        "spd" => (
            OperatorData::Dense(rng.spd(n)),
            TagSet::SYMMETRIC | TagSet::POSITIVE_SEMIDEFINITE,
        ),
        "diagonal" => (
            OperatorData::Diagonal((0..n).map(|_| rng.uniform(0.5, 2.0)).collect()),
            TagSet::empty(),
        ),
        "tridiagonal" => {
            let (lower, main, upper) = rng.dominant_bands(n);
            (OperatorData::Tridiagonal(Bands::new(lower, main, upper)?), TagSet::empty())
        }
        "lower_triangular" => {
            let mut m = rng.matrix(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    m[(i, j)] = 0.0;
                }
                m[(i, i)] = n as f64 + rng.uniform(1.0, 2.0);
            }
            (OperatorData::Dense(m), TagSet::LOWER_TRIANGULAR)
        }
        other => {
            return Err(Error::Format(format!(
                "unknown generated operator `{other}` (expected dense, spd, diagonal, tridiagonal or lower_triangular)"
            )))
        }
    })
}

pub fn read_tree(path: &Path) -> Result<TreeVector> {
    tree_from_json(&read_json(path)?)
}

pub fn parse_tags(list: &str) -> std::result::Result<TagSet, Error> {
    TagSet::parse_list(list)
}

/// Validates a solver name for the command line: `auto` or a concrete
/// solver.
pub fn parse_solver_name(name: &str) -> std::result::Result<String, Error> {
    if name == "auto" {
        return Ok(name.to_string());
    }
    AnySolver::from_name(name, IterativeOptions::default()).map(|_| name.to_string())
}

/// Tolerances for the Krylov solvers.
#[derive(Args, Clone, Copy, Debug)]
pub struct IterativeArgs {
    /// Relative residual tolerance of the Krylov solvers.
    #[arg(long, default_value_t = IterativeOptions::default().rtol)]
    pub rtol: f64,
    /// Absolute residual tolerance of the Krylov solvers.
    #[arg(long, default_value_t = IterativeOptions::default().atol)]
    pub atol: f64,
    /// Iteration cap of the Krylov solvers; defaults to ten times the size.
    #[arg(long)]
    pub max_steps: Option<usize>,
}

impl IterativeArgs {
    pub fn options(&self) -> Result<IterativeOptions> {
        let options = IterativeOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            ..IterativeOptions::default()
        };
        options.validate()?;
        Ok(options)
    }
}

/// The operator, right-hand side and solver flags shared by `solve` and
/// `gradcheck`.
#[derive(Args, Clone, Debug)]
pub struct ProblemArgs {
    /// Matrix Market file or JSON operator.
    #[arg(long)]
    pub operator: std::path::PathBuf,
    /// JSON tree holding the right-hand side.
    #[arg(long)]
    pub rhs: std::path::PathBuf,
    /// Comma-separated structural tags promised for the operator.
    #[arg(long, value_parser = parse_tags, default_value = "")]
    pub tags: TagSet,
    /// Solver name, or `auto` to pick one from shape, tags and mode.
    #[arg(long, value_parser = parse_solver_name, default_value = "auto")]
    pub solver: String,
    /// `true` requires a square nonsingular system, `none` allows least
    /// squares, `false` allows any rank. Only used by `auto`.
    #[arg(long, default_value = "true")]
    pub mode: WellPosedMode,
    #[command(flatten)]
    pub iterative: IterativeArgs,
}

pub struct Problem {
    pub operator: Operator,
    pub rhs: TreeVector,
}

impl ProblemArgs {
    pub fn load(&self) -> Result<Problem> {
        let (data, file_tags) = read_operator(&self.operator)?;
        let rhs = read_tree(&self.rhs)?;
        let operator = data.build(self.tags | file_tags, rhs.structure())?;
        Ok(Problem { operator, rhs })
    }

    pub fn solver(&self, operator: &dyn LinearOperator) -> Result<AnySolver> {
        make_solver(&self.solver, self.mode, self.iterative.options()?, operator)
    }
}

pub fn make_solver(
    name: &str,
    mode: WellPosedMode,
    options: IterativeOptions,
    operator: &dyn LinearOperator,
) -> Result<AnySolver> {
    if name == "auto" {
        auto_select(&OperatorInfo::of(operator), mode)
    } else {
        AnySolver::from_name(name, options)
    }
}

/// `‖b − A x‖₂`, computed from the operator rather than taken from the
/// solver.
pub fn residual_norm(operator: &dyn LinearOperator, x: &TreeVector, b: &TreeVector) -> Result<f64> {
    let ax = operator.apply(x.as_slice())?;
    Ok(ax
        .iter()
        .zip(b.as_slice())
        .map(|(ax, b)| (b - ax).powi(2))
        .sum::<f64>()
        .sqrt())
}
