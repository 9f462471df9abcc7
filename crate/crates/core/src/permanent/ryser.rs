use num_bigint::{BigInt, BigUint, Sign};

use super::{approx_value, ExactValue, PermConfig};
use crate::error::{Error, Result};
use crate::exec::CompensatedSum;
use crate::tensor::MultiMatrix;

/// Ryser's inclusion-exclusion formula for 2-dimensional matrices,
///
/// `per A = (-1)^n * sum over column subsets S of (-1)^|S| * prod_i sum_{j in S} a_ij`,
///
/// visiting subsets in Gray-code order so each step updates the row sums by
/// one column. Exact integer arithmetic for (0,1) matrices.
pub fn permanent_ryser_2d(a: &MultiMatrix, cfg: &PermConfig) -> Result<ExactValue> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "ryser needs d = 2, got d = {}",
            a.dim()
        )));
    }
    if a.order() > cfg.ryser_max_order {
        return Err(Error::InvalidArgument(format!(
            "ryser order limit is {}, got n = {}",
            cfg.ryser_max_order,
            a.order()
        )));
    }
    ryser_kernel(a.entries(), a.order(), a.is_binary())
}

pub(crate) fn ryser_kernel(entries: &[f64], n: usize, binary: bool) -> Result<ExactValue> {
    if n >= usize::BITS as usize {
        return Err(Error::InvalidArgument(format!("ryser order {n} too large")));
    }
    if binary {
        Ok(ExactValue::Exact(ryser_integer(entries, n)))
    } else {
        let value = ryser_real(entries, n);
        let scale = (0..n)
            .map(|i| entries[i * n..(i + 1) * n].iter().sum::<f64>())
            .product();
        approx_value(value, scale)
    }
}

/// Signed accumulator that stays in `i128` until a term or partial sum
/// overflows, then spills into a `BigInt`.
#[derive(Default)]
struct SpillSum {
    small: i128,
    big: BigInt,
}

impl SpillSum {
    fn add(&mut self, row_sums: &[i64], negative: bool) {
        let small = row_sums
            .iter()
            .try_fold(1i128, |acc, &r| acc.checked_mul(i128::from(r)));
        match small {
            Some(p) => {
                let p = if negative { -p } else { p };
                match self.small.checked_add(p) {
                    Some(s) => self.small = s,
                    None => {
                        self.big += BigInt::from(self.small) + BigInt::from(p);
                        self.small = 0;
                    }
                }
            }
            None => {
                let p: BigInt = row_sums.iter().map(|&r| BigInt::from(r)).product();
                if negative {
                    self.big -= p;
                } else {
                    self.big += p;
                }
            }
        }
    }

    fn total(self) -> BigInt {
        self.big + BigInt::from(self.small)
    }
}

fn ryser_integer(entries: &[f64], n: usize) -> BigUint {
    let ones: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| entries[i * n + j] == 1.0).collect())
        .collect();
    let mut row_sums = vec![0i64; n];
    let mut acc = SpillSum::default();
    let mut gray = 0usize;
    for step in 1usize..(1 << n) {
        let col = step.trailing_zeros() as usize;
        gray ^= 1 << col;
        let delta = if gray & (1 << col) != 0 { 1 } else { -1 };
        for &i in &ones[col] {
            row_sums[i] += delta;
        }
        if row_sums.iter().all(|&r| r != 0) {
            // sign (-1)^(n - |S|)
            let negative = (n - gray.count_ones() as usize) % 2 == 1;
            acc.add(&row_sums, negative);
        }
    }
    let total = acc.total();
    match total.sign() {
        Sign::Minus => unreachable!("permanent of a (0,1) matrix is nonnegative"),
        _ => total.magnitude().clone(),
    }
}

fn ryser_real(entries: &[f64], n: usize) -> f64 {
    let mut row_sums = vec![0f64; n];
    let mut acc = CompensatedSum::default();
    let mut gray = 0usize;
    for step in 1usize..(1 << n) {
        let col = step.trailing_zeros() as usize;
        gray ^= 1 << col;
        let added = gray & (1 << col) != 0;
        for (i, r) in row_sums.iter_mut().enumerate() {
            let e = entries[i * n + col];
            if added {
                *r += e;
            } else {
                *r -= e;
            }
        }
        let prod: f64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize) % 2 == 1 {
            acc.add(-prod);
        } else {
            acc.add(prod);
        }
    }
    acc.value()
}
