use num_bigint::BigUint;

use super::perms::{all_permutations, decode_mixed, permutation_tuples};
use super::{approx_value, budget_check, ExactValue, PermConfig};
use crate::error::Result;
use crate::exec::{map_chunks, CompensatedSum};
use crate::tensor::MultiMatrix;

const CHUNK_TERMS: usize = 1 << 12;

/// Reference permanent: enumerates every (d-1)-tuple of permutations
/// `(s_1, ..., s_{d-1})` and the diagonal `{(i, s_1(i), ..., s_{d-1}(i))}`.
///
/// Costs `(n!)^(d-1) * n`; refuses with [`crate::Error::BudgetExceeded`] when
/// the number of tuples exceeds the term budget.
pub fn permanent_naive(a: &MultiMatrix, cfg: &PermConfig) -> Result<ExactValue> {
    let (d, n) = (a.dim(), a.order());
    let free_axes = d - 1;
    budget_check("permanent_naive", &permutation_tuples(n, free_axes), cfg.term_budget)?;
    let entries = a.entries();
    let strides = a.strides();

    if free_axes == 0 {
        return if a.is_binary() {
            Ok(ExactValue::Exact(BigUint::from(u8::from(
                entries.iter().all(|&e| e == 1.0),
            ))))
        } else {
            approx_value(entries.iter().product(), 1.0)
        };
    }

    let perms = all_permutations(n);
    let np = perms.len();
    // contrib[j][p * n + i]: offset contribution of axis j+1 under permutation p at row i
    let contrib: Vec<Vec<usize>> = (1..d)
        .map(|axis| {
            perms
                .iter()
                .flat_map(|p| p.iter().map(move |&v| v * strides[axis]))
                .collect()
        })
        .collect();
    let row_base: Vec<usize> = (0..n).map(|i| i * strides[0]).collect();
    let total = np.pow(free_axes as u32);

    let offset_of = |digits: &[usize], i: usize| -> usize {
        row_base[i] + digits.iter().zip(&contrib).map(|(&p, c)| c[p * n + i]).sum::<usize>()
    };

    if a.is_binary() {
        let counts = map_chunks(cfg.exec, total, CHUNK_TERMS, |range| {
            let mut digits = vec![0usize; free_axes];
            decode_mixed(range.start, np, &mut digits);
            let mut count = 0u64;
            for _ in range {
                if (0..n).all(|i| entries[offset_of(&digits, i)] == 1.0) {
                    count += 1;
                }
                crate::tensor::advance(&mut digits, np);
            }
            count
        });
        let sum: u128 = counts.into_iter().map(u128::from).sum();
        Ok(ExactValue::Exact(BigUint::from(sum)))
    } else {
        let partials = map_chunks(cfg.exec, total, CHUNK_TERMS, |range| {
            let mut digits = vec![0usize; free_axes];
            decode_mixed(range.start, np, &mut digits);
            let mut acc = CompensatedSum::default();
            for _ in range {
                let mut prod = 1.0;
                for i in 0..n {
                    prod *= entries[offset_of(&digits, i)];
                    if prod == 0.0 {
                        break;
                    }
                }
                acc.add(prod);
                crate::tensor::advance(&mut digits, np);
            }
            acc.value()
        });
        approx_value(partials.into_iter().collect::<CompensatedSum>().value(), 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::paper_example;
    use crate::exec::Exec;
    use crate::Error;

    fn exact(v: u64) -> ExactValue {
        ExactValue::Exact(BigUint::from(v))
    }

    /// Counts n-subsets of cells that pairwise differ in every coordinate and
    /// whose entries are all 1. Independent of the permutation parametrization.
    fn diagonal_subsets(a: &MultiMatrix) -> u64 {
        let ones: Vec<Vec<usize>> = (0..a.len())
            .filter(|&o| a.entries()[o] == 1.0)
            .map(|o| a.coords_of(o))
            .collect();
        fn rec(ones: &[Vec<usize>], start: usize, chosen: &mut Vec<usize>, n: usize) -> u64 {
            if chosen.len() == n {
                return 1;
            }
            let mut total = 0;
            for c in start..ones.len() {
                let ok = chosen
                    .iter()
                    .all(|&p| ones[p].iter().zip(&ones[c]).all(|(x, y)| x != y));
                if ok {
                    chosen.push(c);
                    total += rec(ones, c + 1, chosen, n);
                    chosen.pop();
                }
            }
            total
        }
        rec(&ones, 0, &mut Vec::new(), a.order())
    }

    #[test]
    fn paper_example_is_74() {
        let a = paper_example();
        assert_eq!(permanent_naive(&a, &PermConfig::default()).unwrap(), exact(74));
        assert_eq!(diagonal_subsets(&a), 74);
    }

    #[test]
    fn trivial_cases() {
        let cfg = PermConfig::default();
        assert_eq!(
            permanent_naive(&MultiMatrix::ones(3, 2).unwrap(), &cfg).unwrap(),
            exact(4)
        );
        for n in 1..6 {
            assert_eq!(
                permanent_naive(&MultiMatrix::identity(n).unwrap(), &cfg).unwrap(),
                exact(1)
            );
        }
    }

    #[test]
    fn one_dimensional_is_product() {
        let cfg = PermConfig::default();
        let a = MultiMatrix::from_entries(1, 3, vec![0.5, 0.5, 1.0]).unwrap();
        assert_eq!(permanent_naive(&a, &cfg).unwrap().to_f64(), 0.25);
        let b = MultiMatrix::from_entries(1, 2, vec![1.0, 0.0]).unwrap();
        assert_eq!(permanent_naive(&b, &cfg).unwrap(), exact(0));
    }

    #[test]
    fn agrees_with_subset_definition() {
        let cfg = PermConfig::default();
        for seed in 0..40u64 {
            let d = 2 + (seed % 2) as usize;
            let n = 2 + (seed % 3) as usize;
            let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
            let a = MultiMatrix::from_fn(d, n, |_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                f64::from(u8::from(state % 3 != 0))
            })
            .unwrap();
            assert_eq!(
                permanent_naive(&a, &cfg).unwrap(),
                exact(diagonal_subsets(&a)),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a = MultiMatrix::from_fn(4, 4, |c| ((c.iter().sum::<usize>() % 3) != 0) as u8 as f64).unwrap();
        let seq = permanent_naive(&a, &PermConfig::default().with_exec(Exec::Sequential)).unwrap();
        let par = permanent_naive(&a, &PermConfig::default().with_exec(Exec::Parallel)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn budget_guard() {
        let a = MultiMatrix::ones(3, 5).unwrap();
        let err = permanent_naive(&a, &PermConfig::default().with_budget(1000)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }), "{err}");
    }
}
