//! Upper bounds on the permanent, evaluated in natural-log space.
//!
//! Every bound is a product of Minc factors `F(x) = ceil(x)!^(1/ceil(x))` or
//! of plain sums, so it is carried as a sum of logarithms. `F(0)` is taken to
//! be 0: an empty line or hyperplane forces the permanent to 0.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::permanent::{permanent_laplace, PermConfig};
use crate::tensor::{is_permutation, MultiMatrix};

/// Slack allowed when checking `ln per <= ln bound`.
pub const LOG_TOLERANCE: f64 = 1e-9;

const MAX_AXIS_ORDER_SEARCH_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    TrivialProduct,
    BregmanMinc,
    MincCeil,
    TotalSum,
    Covering,
    ConjectureMinc,
    PlaneReduction,
}

impl BoundName {
    pub const ALL: [BoundName; 7] = [
        BoundName::TrivialProduct,
        BoundName::BregmanMinc,
        BoundName::MincCeil,
        BoundName::TotalSum,
        BoundName::Covering,
        BoundName::ConjectureMinc,
        BoundName::PlaneReduction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::TrivialProduct => "trivial_product",
            BoundName::BregmanMinc => "bregman_minc",
            BoundName::MincCeil => "minc_ceil",
            BoundName::TotalSum => "total_sum",
            BoundName::Covering => "covering",
            BoundName::ConjectureMinc => "conjecture_minc",
            BoundName::PlaneReduction => "plane_reduction",
        }
    }

    /// Everything except the multidimensional Minc conjecture is proven.
    pub fn is_proven(self) -> bool {
        self != BoundName::ConjectureMinc
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown bound {s:?}")))
    }
}

/// A bound value in log space.
///
/// `variant` says which axis, axis order or line direction produced it.
/// A non-applicable bound carries `+inf` and a reason.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBound {
    pub name: BoundName,
    pub variant: String,
    pub log_value: f64,
    pub proven: bool,
    pub applicable: bool,
    pub reason: Option<String>,
}

impl LogBound {
    fn new(name: BoundName, variant: impl Into<String>, log_value: f64) -> Self {
        LogBound {
            name,
            variant: variant.into(),
            log_value,
            proven: name.is_proven(),
            applicable: true,
            reason: None,
        }
    }

    fn not_applicable(name: BoundName, variant: impl Into<String>, reason: impl Into<String>) -> Self {
        LogBound {
            name,
            variant: variant.into(),
            log_value: f64::INFINITY,
            proven: name.is_proven(),
            applicable: false,
            reason: Some(reason.into()),
        }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// Whether `ln per` respects this bound up to [`LOG_TOLERANCE`].
    pub fn holds_for(&self, log_per: f64) -> bool {
        !self.applicable || log_per == f64::NEG_INFINITY || log_per <= self.log_value + LOG_TOLERANCE
    }
}

/// `ln F(m)` for an integer count: `ln(m!) / m`, and `-inf` for `m = 0`.
pub fn minc_factor_count(m: u64) -> f64 {
    if m == 0 {
        f64::NEG_INFINITY
    } else {
        ln_factorial(m) / m as f64
    }
}

/// `ln F(r)` with `F(r) = ceil(r)!^(1/ceil(r))` and `F(0) = 0`.
pub fn minc_factor(r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "minc factor needs a finite r >= 0, got {r}"
        )));
    }
    Ok(minc_factor_count(r.ceil() as u64))
}

fn sum_logs(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    for x in it {
        if x == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        total += x;
    }
    total
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// Product of the hyperplane sums orthogonal to `axis`.
pub fn bound_trivial_product(a: &MultiMatrix, axis: usize) -> Result<LogBound> {
    let sums = a.hyperplane_sums(axis)?;
    Ok(LogBound::new(
        BoundName::TrivialProduct,
        format!("axis={axis}"),
        sum_logs(sums.into_iter().map(ln_or_neg_inf)),
    ))
}

/// Bregman's bound `prod_i r_i!^(1/r_i)` over the row one-counts of a 2D
/// (0,1) matrix.
pub fn bound_bregman_minc(a: &MultiMatrix) -> LogBound {
    let name = BoundName::BregmanMinc;
    if a.dim() != 2 {
        return LogBound::not_applicable(name, "rows", "requires d = 2");
    }
    if !a.is_binary() {
        return LogBound::not_applicable(name, "rows", "requires a (0,1) matrix");
    }
    let counts = a.hyperplane_counts(0).expect("axis 0 exists");
    LogBound::new(name, "rows", sum_logs(counts.into_iter().map(minc_factor_count)))
}

/// `prod_i F(r_i)` over the real row sums of a 2D matrix with entries in [0,1].
pub fn bound_minc_ceil(a: &MultiMatrix) -> LogBound {
    let name = BoundName::MincCeil;
    if a.dim() != 2 {
        return LogBound::not_applicable(name, "rows", "requires d = 2");
    }
    let log = if a.is_binary() {
        let counts = a.hyperplane_counts(0).expect("axis 0 exists");
        sum_logs(counts.into_iter().map(minc_factor_count))
    } else {
        let sums = a.hyperplane_sums(0).expect("axis 0 exists");
        sum_logs(sums.into_iter().map(|r| minc_factor(r).expect("sums are nonnegative")))
    };
    LogBound::new(name, "rows", log)
}

/// `(g+1)^n e^(-n) (e sqrt(g+1))^(n/(g+1))` where `g n` is the total sum.
pub fn bound_total_sum(a: &MultiMatrix) -> LogBound {
    let name = BoundName::TotalSum;
    if a.dim() != 2 {
        return LogBound::not_applicable(name, "", "requires d = 2");
    }
    let n = a.order() as f64;
    let gamma = a.total_sum() / n;
    LogBound::new(name, "", total_sum_log(n, gamma))
}

pub(crate) fn total_sum_log(n: f64, gamma: f64) -> f64 {
    let g1 = gamma + 1.0;
    n * g1.ln() - n + (n / g1) * (1.0 + g1.ln() / 2.0)
}

/// Nested covering numbers of a (0,1) matrix under one axis labeling.
///
/// After relabeling so that axis `j` is the original axis `axis_order[j]`,
/// `s(i, k)` for a hyperplane `i` of axis 0 and `1 <= k <= d-1` is the largest
/// number of nonempty (k-1)-planes inside one k-plane that fixes the first
/// `d-k` axes and has first coordinate `i`. For `k = 1` that is the largest
/// number of ones on a line of the last axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringNumbers {
    pub axis_order: Vec<usize>,
    order: usize,
    levels: usize,
    // s[i * levels + (k - 1)]
    s: Vec<u64>,
}

impl CoveringNumbers {
    pub fn get(&self, i: usize, k: usize) -> u64 {
        assert!(i < self.order && (1..=self.levels).contains(&k));
        self.s[i * self.levels + k - 1]
    }

    /// Levels `k = 1..=d-1`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn log_bound(&self) -> f64 {
        sum_logs(self.s.iter().map(|&s| minc_factor_count(s)))
    }
}

pub fn covering_numbers(a: &MultiMatrix, axis_order: &[usize]) -> Result<CoveringNumbers> {
    if !is_permutation(axis_order, a.dim()) {
        return Err(Error::InvalidArgument(format!(
            "{axis_order:?} is not an ordering of the {} axes",
            a.dim()
        )));
    }
    if a.dim() < 2 {
        return Err(Error::DimensionMismatch("covering numbers need d >= 2".into()));
    }
    let b = a.permute_axes(axis_order)?;
    let (d, n) = (b.dim(), b.order());
    let levels = d - 1;
    let ones: Vec<usize> = (0..b.len()).filter(|&o| b.entries()[o] == 1.0).collect();
    let hyper = n.pow(levels as u32);
    let mut s = vec![0u64; n * levels];
    for k in 1..=levels {
        let parent = n.pow(k as u32);
        let child = parent / n;
        // ones are sorted by offset, so children of one parent are contiguous
        // and (offset / child) is nondecreasing
        let mut prev: Option<(usize, usize)> = None;
        let mut distinct = 0u64;
        let mut flush = |p: usize, distinct: u64| {
            let i = p * parent / hyper;
            let slot = &mut s[i * levels + k - 1];
            *slot = (*slot).max(distinct);
        };
        for &o in &ones {
            let (p, c) = (o / parent, o / child);
            match prev {
                Some((pp, pc)) if pp == p => {
                    if pc != c {
                        distinct += 1;
                    }
                }
                Some((pp, _)) => {
                    flush(pp, distinct);
                    distinct = 1;
                }
                None => distinct = 1,
            }
            prev = Some((p, c));
        }
        if let Some((pp, _)) = prev {
            flush(pp, distinct);
        }
    }
    Ok(CoveringNumbers {
        axis_order: axis_order.to_vec(),
        order: n,
        levels,
        s,
    })
}

fn order_label(order: &[usize]) -> String {
    let parts: Vec<String> = order.iter().map(|a| a.to_string()).collect();
    format!("order={}", parts.join(","))
}

/// `prod_k prod_i F(s(i, k))` for the identity axis order, or the minimum over
/// all `d!` axis orders when `minimize` is set.
pub fn bound_covering(a: &MultiMatrix, minimize: bool, exec: Exec) -> Result<LogBound> {
    let name = BoundName::Covering;
    if !a.is_binary() {
        return Ok(LogBound::not_applicable(name, "", "requires a (0,1) matrix"));
    }
    if a.dim() < 2 {
        return Ok(LogBound::not_applicable(name, "", "requires d >= 2"));
    }
    let identity: Vec<usize> = (0..a.dim()).collect();
    if !minimize {
        let c = covering_numbers(a, &identity)?;
        return Ok(LogBound::new(name, order_label(&identity), c.log_bound()));
    }
    if a.dim() > MAX_AXIS_ORDER_SEARCH_DIM {
        return Err(Error::InvalidArgument(format!(
            "axis-order search is limited to d <= {MAX_AXIS_ORDER_SEARCH_DIM}"
        )));
    }
    let orders = crate::permanent::all_permutations(a.dim());
    let values = map_indexed(exec, orders.len(), |i| {
        covering_numbers(a, &orders[i]).map(|c| c.log_bound())
    });
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, i));
        }
    }
    let (v, i) = best.expect("at least one axis order");
    Ok(LogBound::new(name, order_label(&orders[i]), v))
}

/// The conjectured multidimensional Minc bound
/// `n!^(d-2) prod_i F(r_i / n^(d-2))` over the hyperplanes of `axis`.
///
/// Reported with `proven = false`; callers must never treat a violation as an
/// error.
pub fn bound_conjecture(a: &MultiMatrix, axis: usize) -> Result<LogBound> {
    let name = BoundName::ConjectureMinc;
    let variant = format!("axis={axis}");
    if !a.is_binary() {
        return Ok(LogBound::not_applicable(name, variant, "requires a (0,1) matrix"));
    }
    if a.dim() < 2 {
        return Ok(LogBound::not_applicable(name, variant, "requires d >= 2"));
    }
    let counts = a.hyperplane_counts(axis)?;
    let (d, n) = (a.dim(), a.order());
    let per_plane = (n as u64).pow((d - 2) as u32);
    let factors = counts.into_iter().map(|r| minc_factor_count(r.div_ceil(per_plane)));
    let log = sum_logs(factors) + (d - 2) as f64 * ln_factorial(n as u64);
    Ok(LogBound::new(name, variant, log))
}

/// The (d-1)-dimensional matrix `B` with `b = F(r)` for the line sums `r` of
/// the lines that fix `fixed_axes` (all axes but one).
///
/// Entries of `B` may exceed 1.
pub fn reduce_to_b(a: &MultiMatrix, fixed_axes: &[usize]) -> Result<MultiMatrix> {
    let d = a.dim();
    if d < 3 {
        return Err(Error::DimensionMismatch(format!(
            "plane reduction needs d >= 3, got d = {d}"
        )));
    }
    if !a.is_binary() {
        return Err(Error::InvalidArgument("plane reduction needs a (0,1) matrix".into()));
    }
    let mut axes = fixed_axes.to_vec();
    axes.sort_unstable();
    axes.dedup();
    if axes.len() != d - 1 || axes.len() != fixed_axes.len() || axes.iter().any(|&x| x >= d) {
        return Err(Error::InvalidPlane(format!(
            "lines fix d - 1 = {} distinct axes, got {fixed_axes:?}",
            d - 1
        )));
    }
    let free = (0..d).find(|x| !axes.contains(x)).expect("one axis is free");
    let n = a.order();
    let stride = a.strides()[free];
    let mut counts = vec![0u64; a.len() / n];
    for (o, &e) in a.entries().iter().enumerate() {
        if e == 1.0 {
            counts[(o / (stride * n)) * stride + o % stride] += 1;
        }
    }
    let entries = counts.into_iter().map(|r| minc_factor_count(r).exp()).collect();
    MultiMatrix::from_nonnegative_unchecked(d - 1, n, entries)
}

/// `per B` for the Minc-factor reduction along lines parallel to `line_axis`.
pub fn bound_plane_reduction(a: &MultiMatrix, line_axis: usize, cfg: &PermConfig) -> Result<LogBound> {
    let name = BoundName::PlaneReduction;
    let variant = format!("lines_along={line_axis}");
    if a.dim() < 3 {
        return Ok(LogBound::not_applicable(name, variant, "requires d >= 3"));
    }
    if !a.is_binary() {
        return Ok(LogBound::not_applicable(name, variant, "requires a (0,1) matrix"));
    }
    if line_axis >= a.dim() {
        return Err(Error::InvalidArgument(format!("axis {line_axis} out of range")));
    }
    let fixed: Vec<usize> = (0..a.dim()).filter(|&x| x != line_axis).collect();
    let b = reduce_to_b(a, &fixed)?;
    match permanent_laplace(&b, cfg) {
        Ok(v) => Ok(LogBound::new(name, variant, v.ln())),
        Err(e @ Error::BudgetExceeded { .. }) => Ok(LogBound::not_applicable(name, variant, e.to_string())),
        Err(e) => Err(e),
    }
}

/// Which bounds [`evaluate_all`] computes.
#[derive(Debug, Clone)]
pub struct BoundOptions {
    pub which: Vec<BoundName>,
    pub minimize_axis_orders: bool,
    pub perm: PermConfig,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            which: BoundName::ALL.to_vec(),
            minimize_axis_orders: false,
            perm: PermConfig::default(),
        }
    }
}

/// Evaluates the selected bounds, one entry per axis or line direction where
/// the bound depends on one.
pub fn evaluate_all(a: &MultiMatrix, opts: &BoundOptions) -> Result<Vec<LogBound>> {
    let mut out = Vec::new();
    for &name in &opts.which {
        match name {
            BoundName::TrivialProduct => {
                for axis in 0..a.dim() {
                    out.push(bound_trivial_product(a, axis)?);
                }
            }
            BoundName::BregmanMinc => out.push(bound_bregman_minc(a)),
            BoundName::MincCeil => out.push(bound_minc_ceil(a)),
            BoundName::TotalSum => out.push(bound_total_sum(a)),
            BoundName::Covering => out.push(bound_covering(a, opts.minimize_axis_orders, opts.perm.exec)?),
            BoundName::ConjectureMinc => {
                for axis in 0..a.dim() {
                    out.push(bound_conjecture(a, axis)?);
                }
            }
            BoundName::PlaneReduction => {
                if a.dim() < 3 {
                    out.push(bound_plane_reduction(a, 0, &opts.perm)?);
                } else {
                    for axis in 0..a.dim() {
                        out.push(bound_plane_reduction(a, axis, &opts.perm)?);
                    }
                }
            }
        }
    }
    Ok(out)
}
