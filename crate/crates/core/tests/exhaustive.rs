//! Every (0,1) matrix of a few tiny shapes, checked against closed-form oracles.

use mdperm_core::{
    evaluate_all, permanent_decompose, permanent_laplace, permanent_naive, permanent_ryser_2d, BoundOptions,
    MultiMatrix, PermConfig,
};

fn from_bits(dim: usize, order: usize, bits: u32) -> MultiMatrix {
    let len = order.pow(dim as u32);
    let entries = (0..len).map(|i| f64::from((bits >> i) & 1)).collect();
    MultiMatrix::from_entries(dim, order, entries).unwrap()
}

fn as_u64(v: &mdperm_core::ExactValue) -> u64 {
    u64::try_from(v.as_integer().expect("exact").clone()).unwrap()
}

fn check_bounds(a: &MultiMatrix, log_per: f64) {
    for b in evaluate_all(a, &BoundOptions::default()).unwrap() {
        if b.proven && b.applicable {
            assert!(
                log_per <= b.log_value + 1e-9,
                "{} {}: {a:?}",
                b.name.as_str(),
                b.variant
            );
        }
    }
}

#[test]
fn all_cubes_of_order_two() {
    let cfg = PermConfig::default();
    let mut histogram = [0u32; 5];
    let mut one_per_line = 0;
    for bits in 0u32..256 {
        let a = from_bits(3, 2, bits);
        // a diagonal of a 2x2x2 cube is a cell and its antipode
        let oracle: u64 = (0..4)
            .map(|x| u64::from((bits >> x) & 1) * u64::from((bits >> (7 - x)) & 1))
            .sum();
        let naive = permanent_naive(&a, &cfg).unwrap();
        assert_eq!(as_u64(&naive), oracle, "{bits:08b}");
        assert_eq!(permanent_laplace(&a, &cfg).unwrap(), naive);
        assert_eq!(permanent_decompose(&a, 1, &cfg).unwrap(), naive);
        check_bounds(&a, naive.ln());
        histogram[oracle as usize] += 1;

        let lines_ok = (0..8usize).all(|c| {
            (0..3).all(|axis| {
                let other = c ^ (1 << (2 - axis));
                ((bits >> c) & 1) + ((bits >> other) & 1) == 1
            })
        });
        if lines_ok {
            one_per_line += 1;
            assert_eq!(oracle, 0);
        }
    }
    assert_eq!(histogram.iter().sum::<u32>(), 256);
    assert_eq!(histogram[4], 1);
    assert_eq!(one_per_line, 2);
}

#[test]
fn all_square_matrices_of_order_three() {
    let cfg = PermConfig::default();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for bits in 0u32..512 {
        let a = from_bits(2, 3, bits);
        let at = |i: usize, j: usize| u64::from((bits >> (3 * i + j)) & 1);
        let oracle: u64 = perms.iter().map(|p| at(0, p[0]) * at(1, p[1]) * at(2, p[2])).sum();
        let naive = permanent_naive(&a, &cfg).unwrap();
        assert_eq!(as_u64(&naive), oracle, "{bits:09b}");
        assert_eq!(permanent_laplace(&a, &cfg).unwrap(), naive);
        assert_eq!(permanent_ryser_2d(&a, &cfg).unwrap(), naive);
        check_bounds(&a, naive.ln());
    }
}
