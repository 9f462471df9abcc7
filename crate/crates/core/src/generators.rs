//! Reproducible matrix generators.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`, so a [`GenSpec`] alone determines its matrix.
//! A spec has a one-line text form, e.g.
//!
//! ```text
//! uniform d=3 n=4 p=0.5 seed=42
//! fixed-sums d=3 n=4 r=8,8,8,8 seed=7
//! block-diagonal d=3 n=4 blocks=2,2 seed=0
//! one-per-line d=3 n=3 seed=1
//! ```

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::permanent::{permanent_naive, ExactValue, PermConfig};
use crate::tensor::{checked_volume, MultiMatrix};

/// Backtracking steps per attempt for `one-per-line`.
const ONE_PER_LINE_STEPS: u64 = 2_000_000;
const ONE_PER_LINE_ATTEMPTS: usize = 32;
/// Largest order for `one-per-line` when d >= 4.
const ONE_PER_LINE_MAX_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum GenKind {
    /// Each entry is 1 independently with probability `p`.
    Uniform { p: f64 },
    /// Hyperplane `i` of axis 0 gets `sums[i]` ones at distinct random cells.
    /// Without `strict`, sums above `n^(d-1)` are clamped.
    FixedHyperplaneSums { sums: Vec<u64>, strict: bool },
    /// All-ones blocks of the given orders along the main diagonal.
    BlockDiagonal { blocks: Vec<usize> },
    /// Every line contains exactly one 1.
    OnePerLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub dim: usize,
    pub order: usize,
    pub seed: u64,
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (d, n, seed) = (self.dim, self.order, self.seed);
        match &self.kind {
            GenKind::Uniform { p } => write!(f, "uniform d={d} n={n} p={p} seed={seed}"),
            GenKind::FixedHyperplaneSums { sums, strict } => {
                write!(f, "fixed-sums d={d} n={n} r={}", join(sums))?;
                if *strict {
                    f.write_str(" strict=true")?;
                }
                write!(f, " seed={seed}")
            }
            GenKind::BlockDiagonal { blocks } => {
                write!(f, "block-diagonal d={d} n={n} blocks={} seed={seed}", join(blocks))
            }
            GenKind::OnePerLine => write!(f, "one-per-line d={d} n={n} seed={seed}"),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad {key} element {x:?}")))
        })
        .collect()
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(m);
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(|| bad("empty generator spec".into()))?;
        let (mut d, mut n, mut seed, mut p, mut r, mut blocks, mut strict) =
            (None, None, 0u64, None, None, None, false);
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, found {part:?}")))?;
            let num_err = |_| bad(format!("bad value for {key}: {value:?}"));
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(num_err)?),
                "n" => n = Some(value.parse::<usize>().map_err(num_err)?),
                "seed" => seed = value.parse::<u64>().map_err(num_err)?,
                "p" => p = Some(value.parse::<f64>().map_err(|_| bad(format!("bad p {value:?}")))?),
                "r" => r = Some(parse_list::<u64>(key, value)?),
                "blocks" => blocks = Some(parse_list::<usize>(key, value)?),
                "strict" => {
                    strict = value
                        .parse::<bool>()
                        .map_err(|_| bad(format!("bad strict {value:?}")))?
                }
                other => return Err(bad(format!("unknown generator key {other:?}"))),
            }
        }
        let kind = match kind {
            "uniform" => GenKind::Uniform {
                p: p.ok_or_else(|| bad("uniform needs p=".into()))?,
            },
            "fixed-sums" => GenKind::FixedHyperplaneSums {
                sums: r.ok_or_else(|| bad("fixed-sums needs r=".into()))?,
                strict,
            },
            "block-diagonal" => GenKind::BlockDiagonal {
                blocks: blocks.ok_or_else(|| bad("block-diagonal needs blocks=".into()))?,
            },
            "one-per-line" => GenKind::OnePerLine,
            other => return Err(bad(format!("unknown generator kind {other:?}"))),
        };
        Ok(GenSpec {
            kind,
            dim: d.ok_or_else(|| bad("missing d=".into()))?,
            order: n.ok_or_else(|| bad("missing n=".into()))?,
            seed,
        })
    }
}

impl GenSpec {
    pub fn new(kind: GenKind, dim: usize, order: usize, seed: u64) -> Self {
        GenSpec { kind, dim, order, seed }
    }
}

/// Generates the matrix described by `spec`.
pub fn gen(spec: &GenSpec) -> Result<MultiMatrix> {
    let (d, n) = (spec.dim, spec.order);
    let len = checked_volume(d, n)?;
    if d == 0 || n == 0 {
        return Err(Error::InvalidShape("d and n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.kind {
        GenKind::Uniform { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidArgument(format!("density {p} is outside [0,1]")));
            }
            let entries = (0..len).map(|_| f64::from(u8::from(rng.random_bool(*p)))).collect();
            MultiMatrix::from_entries(d, n, entries)
        }
        GenKind::FixedHyperplaneSums { sums, strict } => {
            if sums.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{} hyperplane sums given for order {n}",
                    sums.len()
                )));
            }
            let hyper = len / n;
            let mut entries = vec![0.0; len];
            for (i, &r) in sums.iter().enumerate() {
                if *strict && r > hyper as u64 {
                    return Err(Error::InvalidArgument(format!(
                        "hyperplane sum {r} exceeds the {hyper} cells of a hyperplane"
                    )));
                }
                let m = (r as usize).min(hyper);
                for c in index::sample(&mut rng, hyper, m) {
                    entries[i * hyper + c] = 1.0;
                }
            }
            MultiMatrix::from_entries(d, n, entries)
        }
        GenKind::BlockDiagonal { blocks } => {
            if blocks.contains(&0) || blocks.iter().sum::<usize>() != n {
                return Err(Error::InvalidArgument(format!(
                    "block orders {blocks:?} must be positive and sum to {n}"
                )));
            }
            let owner: Vec<usize> = blocks
                .iter()
                .enumerate()
                .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
                .collect();
            MultiMatrix::from_fn(d, n, |c| {
                f64::from(u8::from(c.iter().all(|&x| owner[x] == owner[c[0]])))
            })
        }
        GenKind::OnePerLine => one_per_line(d, n, &mut rng),
    }
}

/// A member of the class where every line holds exactly one 1.
///
/// Such a matrix is a function `f` on the first d-1 coordinates with the
/// one in cell `(x, f(x))`; `f` must be injective along every axis. Cells are
/// filled in row-major order by randomized backtracking, restarting after
/// a step budget. The result is not uniformly distributed over the class.
fn one_per_line(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<MultiMatrix> {
    if d >= 4 && n > ONE_PER_LINE_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "one-per-line is limited to n <= {ONE_PER_LINE_MAX_ORDER} for d >= 4"
        )));
    }
    if n > 64 {
        return Err(Error::InvalidArgument("one-per-line supports n <= 64".into()));
    }
    let axes = d - 1;
    let cells = n.pow(axes as u32);
    let strides: Vec<usize> = (0..axes).map(|j| n.pow((axes - 1 - j) as u32)).collect();

    struct Search<'a> {
        n: usize,
        strides: &'a [usize],
        // used[j][line]: values already taken on the axis-j line through a cell
        used: Vec<Vec<u64>>,
        value: Vec<usize>,
        steps: u64,
    }

    impl Search<'_> {
        fn line(&self, j: usize, cell: usize) -> usize {
            cell - ((cell / self.strides[j]) % self.n) * self.strides[j]
        }

        fn place(&mut self, cell: usize, rng: &mut ChaCha8Rng) -> Option<bool> {
            if cell == self.value.len() {
                return Some(true);
            }
            let mut candidates: Vec<usize> = (0..self.n).collect();
            candidates.shuffle(rng);
            for v in candidates {
                self.steps += 1;
                if self.steps > ONE_PER_LINE_STEPS {
                    return None;
                }
                let bit = 1u64 << v;
                let free = (0..self.strides.len()).all(|j| self.used[j][self.line(j, cell)] & bit == 0);
                if !free {
                    continue;
                }
                for j in 0..self.strides.len() {
                    let l = self.line(j, cell);
                    self.used[j][l] |= bit;
                }
                self.value[cell] = v;
                if self.place(cell + 1, rng)? {
                    return Some(true);
                }
                for j in 0..self.strides.len() {
                    let l = self.line(j, cell);
                    self.used[j][l] &= !bit;
                }
            }
            Some(false)
        }
    }

    for _ in 0..ONE_PER_LINE_ATTEMPTS {
        let mut search = Search {
            n,
            strides: &strides,
            used: vec![vec![0; cells]; axes],
            value: vec![0; cells],
            steps: 0,
        };
        if search.place(0, rng) == Some(true) {
            let mut entries = vec![0.0; cells * n];
            for (cell, &v) in search.value.iter().enumerate() {
                entries[cell * n + v] = 1.0;
            }
            return MultiMatrix::from_entries(d, n, entries);
        }
    }
    Err(Error::Generator(format!(
        "one-per-line d={d} n={n}: no member found within {ONE_PER_LINE_ATTEMPTS} attempts"
    )))
}

/// One sampled member of the one-per-line class and its permanent relative to
/// `n!^(d-2) e^(-n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSample {
    pub spec: GenSpec,
    pub permanent: ExactValue,
    pub log_ratio: f64,
    pub ratio: f64,
}

/// Samples `samples` one-per-line matrices with seeds `seed, seed+1, ...` and
/// records `per A / (n!^(d-2) e^(-n))` for each. Report only: the reference
/// is asymptotic and says nothing at fixed n.
pub fn omega_ratio_report(
    samples: usize,
    dim: usize,
    order: usize,
    seed: u64,
    cfg: &PermConfig,
) -> Result<Vec<OmegaSample>> {
    if dim < 3 {
        return Err(Error::InvalidArgument(format!(
            "the one-per-line ratio report needs d >= 3, got {dim}"
        )));
    }
    let log_ref = (dim - 2) as f64 * ln_factorial(order as u64) - order as f64;
    let inner = cfg.with_exec(Exec::Sequential);
    map_indexed(cfg.exec, samples, |s| {
        let spec = GenSpec::new(GenKind::OnePerLine, dim, order, seed.wrapping_add(s as u64));
        let a = gen(&spec)?;
        let permanent = permanent_naive(&a, &inner)?;
        let log_ratio = permanent.ln() - log_ref;
        Ok(OmegaSample {
            spec,
            permanent,
            log_ratio,
            ratio: log_ratio.exp(),
        })
    })
    .into_iter()
    .collect()
}
