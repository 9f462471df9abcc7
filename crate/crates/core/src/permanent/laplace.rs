use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{approx_value, ExactValue, PermConfig};
use crate::error::{Error, Result};
use crate::tensor::MultiMatrix;

/// Permanent by expansion along the last axis-0 hyperplane:
/// `per A = sum over cells b of that hyperplane of a_b * per(A|b)`, applied
/// recursively.
///
/// Minors are never materialized: a minor is identified by the set of
/// coordinate values already used on each axis other than 0, which also keys
/// the memo table. Zero entries are pruned. The term budget bounds the number
/// of candidate cells examined.
pub fn permanent_laplace(a: &MultiMatrix, cfg: &PermConfig) -> Result<ExactValue> {
    laplace_kernel(a.entries(), a.dim(), a.order(), a.is_binary(), cfg.term_budget)
}

pub(crate) trait Weight: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    /// `self += entry * sub`
    fn accumulate(&mut self, entry: f64, sub: &Self);
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn accumulate(&mut self, entry: f64, sub: &Self) {
        debug_assert_eq!(entry, 1.0);
        *self += sub;
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn accumulate(&mut self, entry: f64, sub: &Self) {
        *self += entry * sub;
    }
}

pub(crate) fn laplace_kernel(
    entries: &[f64],
    dim: usize,
    order: usize,
    binary: bool,
    budget: u64,
) -> Result<ExactValue> {
    if order > 64 {
        return Err(Error::InvalidArgument(format!(
            "laplace expansion supports order <= 64, got {order}"
        )));
    }
    let hyper = entries.len() / order;
    // nonzero cells of each axis-0 hyperplane, with their remaining coordinates
    let rows: Vec<Vec<(f64, Vec<usize>)>> = (0..order)
        .map(|i| {
            (0..hyper)
                .filter_map(|local| {
                    let e = entries[i * hyper + local];
                    (e != 0.0).then(|| {
                        let mut coords = vec![0; dim - 1];
                        let mut rest = local;
                        for c in coords.iter_mut().rev() {
                            *c = rest % order;
                            rest /= order;
                        }
                        (e, coords)
                    })
                })
                .collect()
        })
        .collect();

    if binary {
        let v: BigUint = Expansion::new(&rows, dim - 1, budget).run(order)?;
        Ok(ExactValue::Exact(v))
    } else {
        let v: f64 = Expansion::new(&rows, dim - 1, budget).run(order)?;
        let scale = rows.iter().map(|r| r.iter().map(|(e, _)| e).sum::<f64>()).product();
        approx_value(v, scale)
    }
}

struct Expansion<'a, W> {
    rows: &'a [Vec<(f64, Vec<usize>)>],
    masks: Vec<u64>,
    memo: HashMap<Vec<u64>, W>,
    steps: u64,
    budget: u64,
}

impl<'a, W: Weight> Expansion<'a, W> {
    fn new(rows: &'a [Vec<(f64, Vec<usize>)>], axes: usize, budget: u64) -> Self {
        Expansion {
            rows,
            masks: vec![0; axes],
            memo: HashMap::new(),
            steps: 0,
            budget,
        }
    }

    /// Permanent of the minor made of axis-0 hyperplanes `0..remaining` and
    /// the coordinate values not yet in `masks`.
    fn run(&mut self, remaining: usize) -> Result<W> {
        if remaining == 0 {
            return Ok(W::one());
        }
        if let Some(v) = self.memo.get(&self.masks) {
            return Ok(v.clone());
        }
        let row = &self.rows[remaining - 1];
        self.steps += row.len() as u64 + 1;
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded {
                what: "permanent_laplace",
                needed: format!("more than {}", self.budget),
                budget: self.budget,
            });
        }
        let mut acc = W::zero();
        for (entry, coords) in row {
            let free = coords.iter().zip(&self.masks).all(|(&c, &m)| m & (1 << c) == 0);
            if !free {
                continue;
            }
            for (&c, m) in coords.iter().zip(self.masks.iter_mut()) {
                *m |= 1 << c;
            }
            let sub = self.run(remaining - 1);
            for (&c, m) in coords.iter().zip(self.masks.iter_mut()) {
                *m &= !(1 << c);
            }
            acc.accumulate(*entry, &sub?);
        }
        self.memo.insert(self.masks.clone(), acc.clone());
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::paper_example;
    use crate::permanent::permanent_naive;

    #[test]
    fn paper_example_is_74() {
        assert_eq!(
            permanent_laplace(&paper_example(), &PermConfig::default()).unwrap(),
            ExactValue::Exact(BigUint::from(74u32))
        );
    }

    #[test]
    fn block_diagonal_2d() {
        let a = MultiMatrix::from_fn(2, 4, |c| f64::from(u8::from(c[0] / 2 == c[1] / 2))).unwrap();
        assert_eq!(
            permanent_laplace(&a, &PermConfig::default()).unwrap(),
            ExactValue::Exact(BigUint::from(4u32))
        );
    }

    #[test]
    fn zero_matrix_and_zero_hyperplane() {
        let cfg = PermConfig::default();
        let z = MultiMatrix::zeros(3, 3).unwrap();
        assert_eq!(permanent_laplace(&z, &cfg).unwrap().to_f64(), 0.0);
        let a = MultiMatrix::from_fn(3, 3, |c| f64::from(u8::from(c[1] != 2))).unwrap();
        assert_eq!(permanent_laplace(&a, &cfg).unwrap().to_f64(), 0.0);
    }

    #[test]
    fn matches_minor_expansion() {
        // per A = sum_j a_{n-1, j} per(A | (n-1, j)) on the example, via explicit minors
        let a = paper_example();
        let cfg = PermConfig::default();
        let mut total = 0u64;
        for j in 0..4 {
            for l in 0..4 {
                if a.get(&[3, j, l]) == Some(1.0) {
                    let m = a.minor(&vec![3, j, l].into()).unwrap();
                    total += permanent_naive(&m, &cfg)
                        .unwrap()
                        .as_integer()
                        .unwrap()
                        .to_string()
                        .parse::<u64>()
                        .unwrap();
                }
            }
        }
        assert_eq!(total, 74);
    }

    #[test]
    fn real_entries_match_naive() {
        let a = MultiMatrix::from_fn(3, 3, |c| ((c[0] * 7 + c[1] * 3 + c[2]) % 5) as f64 / 4.0).unwrap();
        let cfg = PermConfig::default();
        let l = permanent_laplace(&a, &cfg).unwrap().to_f64();
        let n = permanent_naive(&a, &cfg).unwrap().to_f64();
        assert!((l - n).abs() <= 1e-12 * n.abs(), "{l} vs {n}");
    }

    #[test]
    fn budget_guard() {
        let a = MultiMatrix::ones(4, 4).unwrap();
        assert!(matches!(
            permanent_laplace(&a, &PermConfig::default().with_budget(10)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
