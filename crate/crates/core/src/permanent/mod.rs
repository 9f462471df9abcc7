//! Exact permanents of d-dimensional matrices.
//!
//! The permanent is the sum, over all diagonals, of the product of the
//! diagonal's entries. A diagonal is a set of n cells that pairwise differ in
//! every coordinate; fixing the axis-0 coordinate of its cells to `0..n`, a
//! diagonal is determined by one permutation per remaining axis.
//!
//! Four independent routes are provided. Their agreement is the main
//! correctness check of the crate:
//!
//! * [`permanent_naive`] enumerates every tuple of permutations.
//! * [`permanent_laplace`] expands along the last axis-0 hyperplane,
//!   recursing on minors with zero pruning and memoization.
//! * [`permanent_ryser_2d`] is the inclusion-exclusion kernel for d = 2.
//! * [`permanent_decompose`] splits the diagonals by their projection onto
//!   the first `d - k` axes, summing permanents of (k+1)-dimensional slices.

mod decompose;
mod laplace;
mod naive;
mod perms;
mod ryser;

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::tensor::MultiMatrix;

pub use decompose::permanent_decompose;
pub use laplace::permanent_laplace;
pub use naive::permanent_naive;
pub(crate) use perms::all_permutations;
pub use ryser::permanent_ryser_2d;

pub const DEFAULT_TERM_BUDGET: u64 = 100_000_000;
pub const DEFAULT_RYSER_MAX_ORDER: usize = 20;

/// Negative round-off below this fraction of the trivial upper bound is
/// clamped to zero.
const CLAMP_REL: f64 = 1e-12;

/// Resource limits and execution strategy shared by all algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermConfig {
    /// Largest number of terms (or recursion steps) an algorithm may visit.
    pub term_budget: u64,
    /// Largest order accepted by the Ryser kernel.
    pub ryser_max_order: usize,
    pub exec: Exec,
}

impl Default for PermConfig {
    fn default() -> Self {
        PermConfig {
            term_budget: DEFAULT_TERM_BUDGET,
            ryser_max_order: DEFAULT_RYSER_MAX_ORDER,
            exec: Exec::default(),
        }
    }
}

impl PermConfig {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_budget(mut self, term_budget: u64) -> Self {
        self.term_budget = term_budget;
        self
    }
}

/// The value of a permanent.
///
/// `Exact` is produced for (0,1) matrices, `Approx` for real entries.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactValue {
    Exact(BigUint),
    Approx {
        value: f64,
        /// Set when a small negative round-off result was clamped to 0.
        clamped: bool,
    },
}

impl ExactValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, ExactValue::Exact(_))
    }

    pub fn as_integer(&self) -> Option<&BigUint> {
        match self {
            ExactValue::Exact(v) => Some(v),
            ExactValue::Approx { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactValue::Exact(v) => v.to_f64().unwrap_or(f64::INFINITY),
            ExactValue::Approx { value, .. } => *value,
        }
    }

    /// Natural logarithm; `-inf` for a zero permanent.
    pub fn ln(&self) -> f64 {
        match self {
            ExactValue::Exact(v) => ln_biguint(v),
            ExactValue::Approx { value, .. } => value.ln(),
        }
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactValue::Exact(v) => write!(f, "{v}"),
            ExactValue::Approx { value, .. } => write!(f, "{value}"),
        }
    }
}

pub(crate) fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Which algorithm [`permanent`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Naive,
    Laplace,
    Ryser,
    Decompose { k: usize },
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Method::Naive),
            "laplace" => Ok(Method::Laplace),
            "ryser" => Ok(Method::Ryser),
            "decompose" => Ok(Method::Decompose { k: 1 }),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

pub fn permanent(a: &MultiMatrix, method: Method, cfg: &PermConfig) -> Result<ExactValue> {
    match method {
        Method::Naive => permanent_naive(a, cfg),
        Method::Laplace => permanent_laplace(a, cfg),
        Method::Ryser => permanent_ryser_2d(a, cfg),
        Method::Decompose { k } => permanent_decompose(a, k, cfg),
    }
}

/// Ryser for small 2-dimensional inputs, memoized Laplace expansion otherwise.
pub fn permanent_auto(a: &MultiMatrix, cfg: &PermConfig) -> Result<ExactValue> {
    if a.dim() == 2 && a.order() <= cfg.ryser_max_order {
        permanent_ryser_2d(a, cfg)
    } else {
        permanent_laplace(a, cfg)
    }
}

pub(crate) fn budget_check(what: &'static str, needed: &BigUint, budget: u64) -> Result<()> {
    if *needed > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what,
            needed: needed.to_string(),
            budget,
        });
    }
    Ok(())
}

/// Turns a floating-point result into an `Approx` value, clamping negative
/// round-off of magnitude below `CLAMP_REL * scale`.
pub(crate) fn approx_value(value: f64, scale: f64) -> Result<ExactValue> {
    if !value.is_finite() {
        return Err(Error::Numerical(format!("non-finite permanent {value}")));
    }
    if value >= 0.0 {
        return Ok(ExactValue::Approx { value, clamped: false });
    }
    if -value < CLAMP_REL * scale.max(1.0) {
        Ok(ExactValue::Approx {
            value: 0.0,
            clamped: true,
        })
    } else {
        Err(Error::Numerical(format!(
            "negative permanent {value} exceeds round-off tolerance"
        )))
    }
}
