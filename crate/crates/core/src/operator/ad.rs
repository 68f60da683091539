//! Minimal automatic differentiation for user-supplied nonlinear maps.
//!
//! [`Dual`] numbers carry one tangent and give exact directional
//! derivatives. [`Var`] records elementary operations on a [`Tape`] so a
//! reverse sweep can pull a cotangent back through the same computation.
//! Functions are written once, generically over [`Scalar`], and evaluated
//! with either type.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::rc::Rc;

use crate::error::Result;

/// The arithmetic a differentiable function may use.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

/// A function `ℝⁿ → ℝᵐ` that can be evaluated over any [`Scalar`].
pub trait Differentiable: Send + Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>>;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Forward-mode dual number `value + tangent·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub tangent: f64,
}

impl Dual {
    pub fn new(value: f64, tangent: f64) -> Self {
        Dual { value, tangent }
    }

    fn chain(self, value: f64, derivative: f64) -> Self {
        Dual::new(value, derivative * self.tangent)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.tangent + rhs.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.tangent - rhs.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.tangent * rhs.value + self.value * rhs.tangent,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let q = self.value / rhs.value;
        Dual::new(q, (self.tangent - q * rhs.tangent) / rhs.value)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.tangent)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual::new(self.value + rhs, self.tangent)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual::new(self.value * rhs, self.tangent * rhs)
    }
}

impl Scalar for Dual {
    fn constant(c: f64) -> Self {
        Dual::new(c, 0.0)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn powi(self, n: i32) -> Self {
        self.chain(self.value.powi(n), f64::from(n) * self.value.powi(n - 1))
    }
}

#[derive(Clone, Copy)]
struct Entry {
    // (parent index, local partial); unused slots have weight 0.
    parents: [(usize, f64); 2],
}

/// Record of elementary operations for one reverse sweep.
#[derive(Default)]
pub struct Tape {
    entries: RefCell<Vec<Entry>>,
}

impl Tape {
    pub fn new() -> Rc<Tape> {
        Rc::new(Tape::default())
    }

    /// A fresh independent variable.
    pub fn var(self: &Rc<Self>, value: f64) -> Var {
        let index = self.push([(0, 0.0), (0, 0.0)]);
        Var::Tracked {
            tape: Rc::clone(self),
            index,
            value,
        }
    }

    fn push(&self, parents: [(usize, f64); 2]) -> usize {
        let mut entries = self.entries.borrow_mut();
        entries.push(Entry { parents });
        entries.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Propagates the seeds `(output, cotangent)` back to every recorded
    /// node. Returns the adjoint of each node, indexed like the tape.
    pub fn backward(&self, seeds: &[(&Var, f64)]) -> Vec<f64> {
        let entries = self.entries.borrow();
        let mut adjoint = vec![0.0; entries.len()];
        for (var, seed) in seeds {
            if let Var::Tracked { index, .. } = var {
                adjoint[*index] += seed;
            }
        }
        for i in (0..entries.len()).rev() {
            let a = adjoint[i];
            if a == 0.0 {
                continue;
            }
            for &(parent, weight) in &entries[i].parents {
                if weight != 0.0 {
                    adjoint[parent] += weight * a;
                }
            }
        }
        adjoint
    }
}

/// A reverse-mode variable: either a constant or a node on a [`Tape`].
#[derive(Clone)]
pub enum Var {
    Const(f64),
    Tracked {
        tape: Rc<Tape>,
        index: usize,
        value: f64,
    },
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Const(c) => write!(f, "Const({c})"),
            Var::Tracked { index, value, .. } => write!(f, "Var#{index}({value})"),
        }
    }
}

impl Var {
    pub fn index(&self) -> Option<usize> {
        match self {
            Var::Const(_) => None,
            Var::Tracked { index, .. } => Some(*index),
        }
    }

    fn tracked(&self) -> Option<(&Rc<Tape>, usize)> {
        match self {
            Var::Const(_) => None,
            Var::Tracked { tape, index, .. } => Some((tape, *index)),
        }
    }

    fn unary(self, value: f64, partial: f64) -> Var {
        match self.tracked() {
            None => Var::Const(value),
            Some((tape, index)) => {
                let node = tape.push([(index, partial), (0, 0.0)]);
                Var::Tracked {
                    tape: Rc::clone(tape),
                    index: node,
                    value,
                }
            }
        }
    }

    fn binary(self, rhs: Var, value: f64, d_lhs: f64, d_rhs: f64) -> Var {
        match (self.tracked(), rhs.tracked()) {
            (None, None) => Var::Const(value),
            (Some((tape, i)), None) => {
                let node = tape.push([(i, d_lhs), (0, 0.0)]);
                Var::Tracked {
                    tape: Rc::clone(tape),
                    index: node,
                    value,
                }
            }
            (None, Some((tape, j))) => {
                let node = tape.push([(j, d_rhs), (0, 0.0)]);
                Var::Tracked {
                    tape: Rc::clone(tape),
                    index: node,
                    value,
                }
            }
            (Some((tape, i)), Some((_, j))) => {
                let node = tape.push([(i, d_lhs), (j, d_rhs)]);
                Var::Tracked {
                    tape: Rc::clone(tape),
                    index: node,
                    value,
                }
            }
        }
    }
}

impl Add for Var {
    type Output = Var;
    fn add(self, rhs: Var) -> Var {
        let v = self.value() + rhs.value();
        self.binary(rhs, v, 1.0, 1.0)
    }
}

impl Sub for Var {
    type Output = Var;
    fn sub(self, rhs: Var) -> Var {
        let v = self.value() - rhs.value();
        self.binary(rhs, v, 1.0, -1.0)
    }
}

impl Mul for Var {
    type Output = Var;
    fn mul(self, rhs: Var) -> Var {
        let (a, b) = (self.value(), rhs.value());
        self.binary(rhs, a * b, b, a)
    }
}

impl Div for Var {
    type Output = Var;
    fn div(self, rhs: Var) -> Var {
        let (a, b) = (self.value(), rhs.value());
        let q = a / b;
        self.binary(rhs, q, 1.0 / b, -q / b)
    }
}

impl Neg for Var {
    type Output = Var;
    fn neg(self) -> Var {
        let v = -self.value();
        self.unary(v, -1.0)
    }
}

impl Add<f64> for Var {
    type Output = Var;
    fn add(self, rhs: f64) -> Var {
        let v = self.value() + rhs;
        self.unary(v, 1.0)
    }
}

impl Mul<f64> for Var {
    type Output = Var;
    fn mul(self, rhs: f64) -> Var {
        let v = self.value() * rhs;
        self.unary(v, rhs)
    }
}

impl Scalar for Var {
    fn constant(c: f64) -> Self {
        Var::Const(c)
    }
    fn value(&self) -> f64 {
        match self {
            Var::Const(c) => *c,
            Var::Tracked { value, .. } => *value,
        }
    }
    fn sin(self) -> Self {
        let x = self.value();
        self.unary(x.sin(), x.cos())
    }
    fn cos(self) -> Self {
        let x = self.value();
        self.unary(x.cos(), -x.sin())
    }
    fn exp(self) -> Self {
        let e = self.value().exp();
        self.unary(e, e)
    }
    fn ln(self) -> Self {
        let x = self.value();
        self.unary(x.ln(), 1.0 / x)
    }
    fn sqrt(self) -> Self {
        let s = self.value().sqrt();
        self.unary(s, 0.5 / s)
    }
    fn powi(self, n: i32) -> Self {
        let x = self.value();
        self.unary(x.powi(n), f64::from(n) * x.powi(n - 1))
    }
}

/// Evaluates `g` at `x0` and its directional derivative along `v`.
pub fn forward_derivative<G: Differentiable + ?Sized>(
    g: &G,
    x0: &[f64],
    v: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let duals: Vec<Dual> = x0.iter().zip(v).map(|(&x, &t)| Dual::new(x, t)).collect();
    let out = g.eval(&duals)?;
    Ok(out.iter().map(|d| (d.value, d.tangent)).unzip())
}

/// Pulls the cotangent `y` back through `g` at `x0`: returns `J(x0)ᵀ y`.
pub fn reverse_derivative<G: Differentiable + ?Sized>(
    g: &G,
    x0: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    let tape = Tape::new();
    let inputs: Vec<Var> = x0.iter().map(|&x| tape.var(x)).collect();
    let outputs = g.eval(&inputs)?;
    if outputs.len() != y.len() {
        return Err(crate::Error::Structure(format!(
            "cotangent has length {} but the function has {} outputs",
            y.len(),
            outputs.len()
        )));
    }
    let seeds: Vec<(&Var, f64)> = outputs.iter().zip(y.iter().copied()).collect();
    let adjoint = tape.backward(&seeds);
    Ok(inputs
        .iter()
        .map(|v| v.index().map_or(0.0, |i| adjoint[i]))
        .collect())
}
