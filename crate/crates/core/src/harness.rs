//! Fuzzing the bounds against exact permanents.
//!
//! Each instance is generated from a [`GenSpec`], its permanent computed by
//! full enumeration, and every applicable bound evaluated. A proven bound
//! below the permanent is a bug in this crate; a conjecture bound below the
//! permanent is recorded as a counterexample candidate for manual replay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::bounds::{evaluate_all, BoundName, BoundOptions, LogBound, LOG_TOLERANCE};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::generators::{gen, GenKind, GenSpec};
use crate::permanent::{permanent_naive, ExactValue, PermConfig};
use crate::tensor::MultiMatrix;

pub const TOOL_NAME: &str = "mdperm";
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Plain bound values at or above this are reported only in log form.
const PLAIN_VALUE_LIMIT: f64 = 1e15;

/// How a fuzz run picks the generator of each instance.
#[derive(Debug, Clone, PartialEq)]
pub enum GenChoice {
    /// Fixed density, or a density drawn per instance from {0.05, 0.10, ..., 0.95}.
    Uniform {
        p: Option<f64>,
    },
    FixedSums {
        sums: Vec<u64>,
        strict: bool,
    },
    /// Fixed block orders, or a random composition of n per instance.
    BlockDiagonal {
        blocks: Option<Vec<usize>>,
    },
    OnePerLine,
    /// Cycles through uniform, fixed sums, block diagonal and one-per-line
    /// with randomized parameters.
    Mixed,
}

impl GenChoice {
    pub fn label(&self) -> String {
        match self {
            GenChoice::Uniform { p: Some(p) } => format!("uniform p={p}"),
            GenChoice::Uniform { p: None } => "uniform p=random".into(),
            GenChoice::FixedSums { sums, .. } => format!(
                "fixed-sums r={}",
                sums.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            ),
            GenChoice::BlockDiagonal { blocks: Some(b) } => format!(
                "block-diagonal blocks={}",
                b.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            ),
            GenChoice::BlockDiagonal { blocks: None } => "block-diagonal blocks=random".into(),
            GenChoice::OnePerLine => "one-per-line".into(),
            GenChoice::Mixed => "mixed".into(),
        }
    }

    /// The concrete spec of instance `index`; its seed is `seed + index`.
    pub fn spec_for(&self, dim: usize, order: usize, seed: u64, index: usize) -> GenSpec {
        let instance_seed = seed.wrapping_add(index as u64);
        // parameters come from a stream separate from the generator's own
        let mut params = ChaCha8Rng::seed_from_u64(instance_seed ^ 0x005e_ed0f_9a7a_3e7e);
        let random_p = |rng: &mut ChaCha8Rng| f64::from(rng.random_range(1u32..=19)) / 20.0;
        let random_blocks = |rng: &mut ChaCha8Rng| {
            let mut left = order;
            let mut blocks = Vec::new();
            while left > 0 {
                let b = rng.random_range(1..=left);
                blocks.push(b);
                left -= b;
            }
            blocks
        };
        let kind = match self {
            GenChoice::Uniform { p } => GenKind::Uniform {
                p: p.unwrap_or_else(|| random_p(&mut params)),
            },
            GenChoice::FixedSums { sums, strict } => GenKind::FixedHyperplaneSums {
                sums: sums.clone(),
                strict: *strict,
            },
            GenChoice::BlockDiagonal { blocks } => GenKind::BlockDiagonal {
                blocks: blocks.clone().unwrap_or_else(|| random_blocks(&mut params)),
            },
            GenChoice::OnePerLine => GenKind::OnePerLine,
            GenChoice::Mixed => {
                let hyper = (order as u64).pow(dim as u32 - 1);
                match index % 4 {
                    1 => GenKind::FixedHyperplaneSums {
                        sums: (0..order).map(|_| params.random_range(0..=hyper)).collect(),
                        strict: true,
                    },
                    2 => GenKind::BlockDiagonal {
                        blocks: random_blocks(&mut params),
                    },
                    3 if dim <= 3 || order <= 5 => GenKind::OnePerLine,
                    _ => GenKind::Uniform {
                        p: random_p(&mut params),
                    },
                }
            }
        };
        GenSpec::new(kind, dim, order, instance_seed)
    }
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub dim: usize,
    pub order: usize,
    pub count: usize,
    pub seed: u64,
    pub gen: GenChoice,
    pub bounds: BoundOptions,
}

impl FuzzConfig {
    pub fn new(dim: usize, order: usize, count: usize, seed: u64, gen: GenChoice) -> Self {
        FuzzConfig {
            dim,
            order,
            count,
            seed,
            gen,
            bounds: BoundOptions::default(),
        }
    }
}

fn ser_log<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}

fn ser_opt_log<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_log(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRecord {
    pub name: BoundName,
    pub variant: String,
    #[serde(serialize_with = "ser_log")]
    pub log_value: f64,
    /// `exp(log_value)` when finite and below 1e15.
    pub value: Option<f64>,
    pub proven: bool,
    pub applicable: bool,
    pub reason: Option<String>,
    /// Whether the exact permanent respects the bound (`null` if unknown).
    pub holds: Option<bool>,
}

impl BoundRecord {
    pub fn new(b: &LogBound, log_per: Option<f64>) -> Self {
        let value = b.value();
        BoundRecord {
            name: b.name,
            variant: b.variant.clone(),
            log_value: b.log_value,
            value: (value.is_finite() && value < PLAIN_VALUE_LIMIT).then_some(value),
            proven: b.proven,
            applicable: b.applicable,
            reason: b.reason.clone(),
            holds: log_per.map(|lp| b.holds_for(lp)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub spec: String,
    pub status: InstanceStatus,
    pub skip_reason: Option<String>,
    /// Decimal permanent (exact integer for (0,1) inputs).
    pub permanent: Option<String>,
    #[serde(serialize_with = "ser_opt_log")]
    pub log_permanent: Option<f64>,
    /// `min_i r_i / n^(d-2)` over axis-0 hyperplane one-counts `r_i`.
    pub min_hyperplane_ratio: Option<f64>,
    pub bounds: Vec<BoundRecord>,
    pub proven_violation: bool,
    pub conjecture_candidate: bool,
    /// `per / min conjecture bound` over axes.
    #[serde(serialize_with = "ser_opt_log")]
    pub conjecture_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceStatus {
    Ok,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub format_version: u32,
    pub d: usize,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub generator: String,
    pub budget_terms: u64,
    pub total_instances: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub proven_violations: usize,
    pub conjecture_candidates: usize,
    #[serde(serialize_with = "ser_opt_log")]
    pub max_conjecture_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub header: RunHeader,
    pub instances: Vec<InstanceRecord>,
}

impl FuzzReport {
    pub fn has_proven_violation(&self) -> bool {
        self.header.proven_violations > 0
    }

    pub fn summary_line(&self) -> String {
        let h = &self.header;
        let ratio = h
            .max_conjecture_ratio
            .map_or_else(|| "n/a".to_string(), |r| format!("{r:.6}"));
        format!(
            "instances={} evaluated={} skipped={} proven_violations={} conjecture_candidates={} max_per_over_conjecture={}",
            h.total_instances, h.evaluated, h.skipped, h.proven_violations, h.conjecture_candidates, ratio
        )
    }
}

fn min_hyperplane_ratio(a: &MultiMatrix) -> Option<f64> {
    if !a.is_binary() || a.dim() < 2 {
        return None;
    }
    let denom = (a.order() as f64).powi(a.dim() as i32 - 2);
    a.hyperplane_counts(0)
        .ok()?
        .into_iter()
        .map(|r| r as f64 / denom)
        .reduce(f64::min)
}

fn skipped(index: usize, spec: String, reason: String) -> InstanceRecord {
    InstanceRecord {
        index,
        spec,
        status: InstanceStatus::Skipped,
        skip_reason: Some(reason),
        permanent: None,
        log_permanent: None,
        min_hyperplane_ratio: None,
        bounds: Vec::new(),
        proven_violation: false,
        conjecture_candidate: false,
        conjecture_ratio: None,
    }
}

/// Generates, computes and checks one instance. Budget and generator failures
/// become skipped records; other errors propagate.
pub fn evaluate_instance(index: usize, spec: &GenSpec, opts: &BoundOptions) -> Result<InstanceRecord> {
    let spec_text = spec.to_string();
    let a = match gen(spec) {
        Ok(a) => a,
        Err(e @ (Error::Generator(_) | Error::InvalidArgument(_))) => {
            return Ok(skipped(index, spec_text, e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let inner = PermConfig {
        exec: Exec::Sequential,
        ..opts.perm
    };
    let per = match permanent_naive(&a, &inner) {
        Ok(p) => p,
        Err(e @ Error::BudgetExceeded { .. }) => return Ok(skipped(index, spec_text, e.to_string())),
        Err(e) => return Err(e),
    };
    let log_per = per.ln();
    let bound_opts = BoundOptions {
        perm: inner,
        ..opts.clone()
    };
    let bounds = evaluate_all(&a, &bound_opts)?;

    let proven_violation = bounds.iter().any(|b| b.proven && b.applicable && !b.holds_for(log_per));
    let conj: Vec<&LogBound> = bounds
        .iter()
        .filter(|b| b.name == BoundName::ConjectureMinc && b.applicable)
        .collect();
    let conjecture_candidate = conj.iter().any(|b| log_per > b.log_value + LOG_TOLERANCE);
    let conjecture_ratio = conj.iter().map(|b| b.log_value).reduce(f64::min).map(|min_log| {
        if log_per == f64::NEG_INFINITY {
            0.0
        } else {
            (log_per - min_log).exp()
        }
    });

    Ok(InstanceRecord {
        index,
        spec: spec_text,
        status: InstanceStatus::Ok,
        skip_reason: None,
        permanent: Some(match &per {
            ExactValue::Exact(v) => v.to_string(),
            ExactValue::Approx { value, .. } => value.to_string(),
        }),
        log_permanent: Some(log_per),
        min_hyperplane_ratio: min_hyperplane_ratio(&a),
        bounds: bounds.iter().map(|b| BoundRecord::new(b, Some(log_per))).collect(),
        proven_violation,
        conjecture_candidate,
        conjecture_ratio,
    })
}

/// Runs `cfg.count` instances (in parallel when `cfg.bounds.perm.exec` allows)
/// and assembles the report in instance order.
pub fn run_fuzz(cfg: &FuzzConfig) -> Result<FuzzReport> {
    if cfg.dim == 0 || cfg.order == 0 {
        return Err(Error::InvalidShape("d and n must be at least 1".into()));
    }
    let records: Vec<InstanceRecord> = map_indexed(cfg.bounds.perm.exec, cfg.count, |i| {
        let spec = cfg.gen.spec_for(cfg.dim, cfg.order, cfg.seed, i);
        evaluate_instance(i, &spec, &cfg.bounds)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let evaluated = records.iter().filter(|r| r.status == InstanceStatus::Ok).count();
    let header = RunHeader {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        format_version: REPORT_FORMAT_VERSION,
        d: cfg.dim,
        n: cfg.order,
        count: cfg.count,
        seed: cfg.seed,
        generator: cfg.gen.label(),
        budget_terms: cfg.bounds.perm.term_budget,
        total_instances: records.len(),
        evaluated,
        skipped: records.len() - evaluated,
        proven_violations: records.iter().filter(|r| r.proven_violation).count(),
        conjecture_candidates: records.iter().filter(|r| r.conjecture_candidate).count(),
        max_conjecture_ratio: records.iter().filter_map(|r| r.conjecture_ratio).reduce(f64::max),
    };
    Ok(FuzzReport {
        header,
        instances: records,
    })
}
