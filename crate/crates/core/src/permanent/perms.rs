use num_bigint::BigUint;

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("pivot has a successor");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

pub(crate) fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::from(1u32), |acc, k| acc * k)
}

/// `(n!)^reps` as an exact integer.
pub(crate) fn permutation_tuples(n: usize, reps: usize) -> BigUint {
    num_traits::pow(factorial(n), reps)
}

/// Decodes `index` into `digits.len()` base-`radix` digits, last digit fastest.
pub(crate) fn decode_mixed(mut index: usize, radix: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = index % radix;
        index /= radix;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_lexicographic_and_complete() {
        let p = all_permutations(3);
        assert_eq!(
            p,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(all_permutations(5).len(), 120);
        assert_eq!(all_permutations(1), vec![vec![0]]);
    }

    #[test]
    fn tuple_counts() {
        assert_eq!(permutation_tuples(4, 3), BigUint::from(13824u32));
        assert_eq!(permutation_tuples(7, 0), BigUint::from(1u32));
    }
}
