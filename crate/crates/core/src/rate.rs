//! Rate expressions for stochastic transitions.
//!
//! A [`RateExpr`] is a small arithmetic tree whose leaves are constants,
//! named parameters, and species totals. Builders in [`crate::models`]
//! assemble them with the helper constructors below; the CLI parses them
//! from text.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::RateError;
use crate::math::powf;

/// Named parameter values referenced by index from rate expressions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamTable {
    names: Vec<String>,
    values: Vec<f64>,
}

impl ParamTable {
    /// Empty table.
    pub fn new() -> Self {
        Self::default()
    }

    /// Table from `(name, value)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut t = Self::new();
        for (name, value) in pairs {
            t.insert(name, value);
        }
        t
    }

    /// Insert or overwrite; returns the slot index.
    pub fn insert(&mut self, name: &str, value: f64) -> usize {
        match self.index_of(name) {
            Some(i) => {
                self.values[i] = value;
                i
            }
            None => {
                self.names.push(name.into());
                self.values.push(value);
                self.values.len() - 1
            }
        }
    }

    /// Slot index of `name`.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Value of `name`.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.values[i])
    }

    /// Value by slot.
    pub fn value(&self, slot: usize) -> Option<f64> {
        self.values.get(slot).copied()
    }

    /// Parameter names in slot order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Parameter values in slot order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of parameters.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when empty.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Arithmetic tree over constants, parameters, and species totals.
#[derive(Debug, Clone, PartialEq)]
pub enum RateExpr {
    /// Literal.
    Const(f64),
    /// Parameter slot in the model's [`ParamTable`].
    Param(usize),
    /// Current total of a species, by declaration index.
    Count(usize),
    /// `a + b`
    Add(Box<RateExpr>, Box<RateExpr>),
    /// `a - b`
    Sub(Box<RateExpr>, Box<RateExpr>),
    /// `a * b`
    Mul(Box<RateExpr>, Box<RateExpr>),
    /// `a / b`; a zero denominator is an error.
    Div(Box<RateExpr>, Box<RateExpr>),
    /// `a ^ b`
    Pow(Box<RateExpr>, Box<RateExpr>),
    /// `-a`
    Neg(Box<RateExpr>),
    /// Michaelis-Menten form `x / (half + x)`.
    Saturating {
        /// Input quantity.
        x: Box<RateExpr>,
        /// Half-saturation constant.
        half: Box<RateExpr>,
    },
}

impl RateExpr {
    /// Parameter leaf.
    pub fn param(slot: usize) -> Self {
        RateExpr::Param(slot)
    }

    /// Species total leaf.
    pub fn count(species: usize) -> Self {
        RateExpr::Count(species)
    }

    /// Constant leaf.
    pub fn constant(v: f64) -> Self {
        RateExpr::Const(v)
    }

    /// `x / (half + x)`.
    pub fn saturating(x: RateExpr, half: RateExpr) -> Self {
        RateExpr::Saturating { x: Box::new(x), half: Box::new(half) }
    }

    /// `self ^ exponent`.
    pub fn pow(self, exponent: RateExpr) -> Self {
        RateExpr::Pow(Box::new(self), Box::new(exponent))
    }

    /// True if no leaf reads a species total.
    pub fn is_state_independent(&self) -> bool {
        match self {
            RateExpr::Const(_) | RateExpr::Param(_) => true,
            RateExpr::Count(_) => false,
            RateExpr::Neg(a) => a.is_state_independent(),
            RateExpr::Add(a, b)
            | RateExpr::Sub(a, b)
            | RateExpr::Mul(a, b)
            | RateExpr::Div(a, b)
            | RateExpr::Pow(a, b)
            | RateExpr::Saturating { x: a, half: b } => a.is_state_independent() && b.is_state_independent(),
        }
    }

    /// Largest species index referenced, if any.
    pub fn max_species_ref(&self) -> Option<usize> {
        match self {
            RateExpr::Const(_) | RateExpr::Param(_) => None,
            RateExpr::Count(i) => Some(*i),
            RateExpr::Neg(a) => a.max_species_ref(),
            RateExpr::Add(a, b)
            | RateExpr::Sub(a, b)
            | RateExpr::Mul(a, b)
            | RateExpr::Div(a, b)
            | RateExpr::Pow(a, b)
            | RateExpr::Saturating { x: a, half: b } => match (a.max_species_ref(), b.max_species_ref()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl $trait for RateExpr {
            type Output = RateExpr;
            fn $method(self, rhs: RateExpr) -> RateExpr {
                RateExpr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for RateExpr {
    type Output = RateExpr;
    fn neg(self) -> RateExpr {
        RateExpr::Neg(Box::new(self))
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateExpr::Const(v) => write!(f, "{v}"),
            RateExpr::Param(i) => write!(f, "p[{i}]"),
            RateExpr::Count(i) => write!(f, "N[{i}]"),
            RateExpr::Add(a, b) => write!(f, "({a} + {b})"),
            RateExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            RateExpr::Mul(a, b) => write!(f, "{a}*{b}"),
            RateExpr::Div(a, b) => write!(f, "{a}/({b})"),
            RateExpr::Pow(a, b) => write!(f, "{a}^({b})"),
            RateExpr::Neg(a) => write!(f, "-({a})"),
            RateExpr::Saturating { x, half } => write!(f, "sat({x}, {half})"),
        }
    }
}

/// Evaluate `expr` with species totals `counts` and parameters `params`.
///
/// The result may be negative; callers decide whether a sign is meaningful
/// for the channel in question.
pub fn eval_rate(expr: &RateExpr, counts: &[f64], params: &ParamTable) -> Result<f64, RateError> {
    Ok(match expr {
        RateExpr::Const(v) => *v,
        RateExpr::Param(i) => params.value(*i).ok_or(RateError::MissingSlot(*i))?,
        RateExpr::Count(i) => *counts.get(*i).ok_or(RateError::MissingSlot(*i))?,
        RateExpr::Add(a, b) => eval_rate(a, counts, params)? + eval_rate(b, counts, params)?,
        RateExpr::Sub(a, b) => eval_rate(a, counts, params)? - eval_rate(b, counts, params)?,
        RateExpr::Mul(a, b) => eval_rate(a, counts, params)? * eval_rate(b, counts, params)?,
        RateExpr::Div(a, b) => {
            let num = eval_rate(a, counts, params)?;
            let den = eval_rate(b, counts, params)?;
            if den == 0.0 {
                return Err(RateError::DivisionByZero);
            }
            num / den
        }
        RateExpr::Pow(a, b) => powf(eval_rate(a, counts, params)?, eval_rate(b, counts, params)?),
        RateExpr::Neg(a) => -eval_rate(a, counts, params)?,
        RateExpr::Saturating { x, half } => {
            let x = eval_rate(x, counts, params)?;
            let den = eval_rate(half, counts, params)? + x;
            if den == 0.0 {
                return Err(RateError::DivisionByZero);
            }
            x / den
        }
    })
}
