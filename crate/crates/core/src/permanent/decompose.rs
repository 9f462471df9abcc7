use num_bigint::BigUint;

use super::laplace::laplace_kernel;
use super::perms::{all_permutations, decode_mixed, permutation_tuples};
use super::ryser::ryser_kernel;
use super::{approx_value, budget_check, ExactValue, PermConfig};
use crate::error::{Error, Result};
use crate::exec::{map_chunks, CompensatedSum};
use crate::tensor::{advance, MultiMatrix};

const CHUNK_SLICES: usize = 256;

/// Permanent as a sum over slices.
///
/// Take the k-dimensional planes that fix the first `d - k` axes. Every
/// diagonal picks, in hyperplane `i`, a cell of the plane
/// `(i, t_1(i), ..., t_{d-k-1}(i))` for some tuple of permutations
/// `t = (t_1, ..., t_{d-k-1})`. Stacking those planes as hyperplanes gives the
/// (k+1)-dimensional slice `A_t`, and `per A = sum over t of per A_t`.
///
/// Requires `1 <= k <= d - 2`. With `k = 1` the slices are 2-dimensional and go
/// through the Ryser kernel; larger slices use the Laplace expansion.
pub fn permanent_decompose(a: &MultiMatrix, k: usize, cfg: &PermConfig) -> Result<ExactValue> {
    let (d, n) = (a.dim(), a.order());
    if d < 3 || k == 0 || k > d - 2 {
        return Err(Error::InvalidArgument(format!(
            "decomposition needs 1 <= k <= d - 2, got k = {k}, d = {d}"
        )));
    }
    if k == 1 && n > cfg.ryser_max_order {
        return Err(Error::InvalidArgument(format!(
            "ryser order limit is {}, got n = {n}",
            cfg.ryser_max_order
        )));
    }
    let outer = d - k - 1;
    budget_check("permanent_decompose", &permutation_tuples(n, outer), cfg.term_budget)?;

    let perms = all_permutations(n);
    let np = perms.len();
    let total = np.pow(outer as u32);
    let strides = a.strides();
    let plane_len = n.pow(k as u32);
    let entries = a.entries();
    let binary = a.is_binary();

    // The free axes of each plane are the last k, so a plane is one
    // contiguous run of `plane_len` entries starting at its base offset.
    #[allow(clippy::needless_range_loop)]
    let slice = |digits: &[usize], buf: &mut Vec<f64>| {
        buf.clear();
        for i in 0..n {
            let base = i * strides[0]
                + digits
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| perms[p][i] * strides[j + 1])
                    .sum::<usize>();
            buf.extend_from_slice(&entries[base..base + plane_len]);
        }
    };
    let slice_per = |buf: &[f64]| -> Result<ExactValue> {
        if k == 1 {
            ryser_kernel(buf, n, binary)
        } else {
            laplace_kernel(buf, k + 1, n, binary, cfg.term_budget)
        }
    };

    let partials = map_chunks(cfg.exec, total, CHUNK_SLICES, |range| -> Result<ExactValue> {
        let mut digits = vec![0usize; outer];
        decode_mixed(range.start, np, &mut digits);
        let mut buf = Vec::with_capacity(n * plane_len);
        let mut int_acc = BigUint::default();
        let mut real_acc = CompensatedSum::default();
        for _ in range {
            slice(&digits, &mut buf);
            match slice_per(&buf)? {
                ExactValue::Exact(v) => int_acc += v,
                ExactValue::Approx { value, .. } => real_acc.add(value),
            }
            advance(&mut digits, np);
        }
        Ok(if binary {
            ExactValue::Exact(int_acc)
        } else {
            ExactValue::Approx {
                value: real_acc.value(),
                clamped: false,
            }
        })
    });

    if binary {
        let mut sum = BigUint::default();
        for p in partials {
            if let ExactValue::Exact(v) = p? {
                sum += v;
            }
        }
        Ok(ExactValue::Exact(sum))
    } else {
        let mut sum = CompensatedSum::default();
        for p in partials {
            sum.add(p?.to_f64());
        }
        approx_value(sum.value(), 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::paper_example;
    use crate::exec::Exec;
    use crate::permanent::permanent_naive;

    #[test]
    fn paper_example_is_74() {
        assert_eq!(
            permanent_decompose(&paper_example(), 1, &PermConfig::default()).unwrap(),
            ExactValue::Exact(BigUint::from(74u32))
        );
    }

    #[test]
    fn all_ones_small() {
        let a = MultiMatrix::ones(3, 2).unwrap();
        assert_eq!(
            permanent_decompose(&a, 1, &PermConfig::default()).unwrap(),
            ExactValue::Exact(BigUint::from(4u32))
        );
    }

    #[test]
    fn every_k_matches_naive_in_4d() {
        let a = MultiMatrix::from_fn(4, 3, |c| f64::from(u8::from((c[0] + 2 * c[1] + c[2] * c[3]) % 3 != 1))).unwrap();
        let cfg = PermConfig::default();
        let reference = permanent_naive(&a, &cfg).unwrap();
        for k in 1..=2 {
            for exec in [Exec::Sequential, Exec::Parallel] {
                assert_eq!(
                    permanent_decompose(&a, k, &cfg.with_exec(exec)).unwrap(),
                    reference,
                    "k = {k}"
                );
            }
        }
    }

    #[test]
    fn real_entries() {
        let a = MultiMatrix::from_fn(3, 3, |c| ((c[0] + c[1] * 2 + c[2] * 5) % 4) as f64 / 3.0).unwrap();
        let cfg = PermConfig::default();
        let dv = permanent_decompose(&a, 1, &cfg).unwrap().to_f64();
        let nv = permanent_naive(&a, &cfg).unwrap().to_f64();
        assert!((dv - nv).abs() <= 1e-9 * nv);
    }

    #[test]
    fn k_out_of_range() {
        let cfg = PermConfig::default();
        let a3 = MultiMatrix::ones(3, 2).unwrap();
        assert!(permanent_decompose(&a3, 0, &cfg).is_err());
        assert!(permanent_decompose(&a3, 2, &cfg).is_err());
        assert!(permanent_decompose(&MultiMatrix::ones(2, 2).unwrap(), 1, &cfg).is_err());
    }
}
