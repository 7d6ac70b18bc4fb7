//! Subset ranking in the combinatorial number system (colex order) and
//! small enumeration helpers shared by the repetition constructions.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        let factor = (n - (k - i)) as u128;
        result = match result.checked_mul(factor) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    result
}

/// Colex rank of a sorted, duplicate-free subset: rank(S) = sum of C(s_i, i+1).
pub fn rank_subset(subset: &[usize]) -> u128 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial(s, i + 1))
        .sum()
}

/// Inverse of [`rank_subset`] for k-subsets of [0, n). Output is sorted ascending.
pub fn unrank_subset(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    debug_assert!(rank < binomial(n, k));
    let mut subset = vec![0usize; k];
    let mut limit = n;
    for i in (1..=k).rev() {
        // Largest c < limit with C(c, i) <= rank.
        let mut c = limit - 1;
        while binomial(c, i) > rank {
            c -= 1;
        }
        rank -= binomial(c, i);
        subset[i - 1] = c;
        limit = c;
    }
    subset
}

/// Iterator over all k-subsets of [0, n) in colex order.
pub struct Subsets {
    n: usize,
    next: Option<Vec<usize>>,
}

pub fn subsets(n: usize, k: usize) -> Subsets {
    let next = if k <= n {
        Some((0..k).collect())
    } else {
        None
    };
    Subsets { n, next }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let k = current.len();
        // Colex successor: bump the lowest element that can move without
        // colliding with its right neighbor, reset everything below it.
        let mut succ = current.clone();
        let mut i = 0;
        loop {
            if i == k {
                break;
            }
            let cap = if i + 1 < k { succ[i + 1] } else { self.n };
            if succ[i] + 1 < cap {
                succ[i] += 1;
                for (j, slot) in succ.iter_mut().enumerate().take(i) {
                    *slot = j;
                }
                self.next = Some(succ);
                break;
            }
            i += 1;
        }
        Some(current)
    }
}

/// Decode `rank` as a little-endian mixed-radix tuple with the given radices.
pub fn unrank_tuple(radices: &[usize], mut rank: u128) -> Vec<usize> {
    let mut tuple = vec![0usize; radices.len()];
    for (slot, &r) in tuple.iter_mut().zip(radices) {
        *slot = (rank % r as u128) as usize;
        rank /= r as u128;
    }
    tuple
}

/// Inverse of [`unrank_tuple`].
pub fn rank_tuple(radices: &[usize], tuple: &[usize]) -> u128 {
    let mut rank: u128 = 0;
    for (&t, &r) in tuple.iter().zip(radices).rev() {
        rank = rank * r as u128 + t as u128;
    }
    rank
}

/// Product of radices, saturating.
pub fn tuple_count(radices: &[usize]) -> u128 {
    radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX)
}

/// All permutations of [0, k) in lexicographic order. Intended for small k.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        result.push(current.clone());
        // next_permutation
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(8, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(52, 5), 2_598_960);
    }

    #[test]
    fn rank_unrank_round_trip_exhaustive() {
        for n in 1..=8 {
            for k in 1..=n {
                let total = binomial(n, k);
                for r in 0..total {
                    let s = unrank_subset(n, k, r);
                    assert!(s.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(rank_subset(&s), r);
                }
            }
        }
    }

    #[test]
    fn subsets_iterator_matches_unrank() {
        let all: Vec<_> = subsets(6, 3).collect();
        assert_eq!(all.len(), 20);
        for (r, s) in all.iter().enumerate() {
            assert_eq!(*s, unrank_subset(6, 3, r as u128));
        }
    }

    #[test]
    fn tuple_round_trip() {
        let radices = [3, 2, 4];
        for r in 0..24u128 {
            assert_eq!(rank_tuple(&radices, &unrank_tuple(&radices, r)), r);
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(1).len(), 1);
        assert_eq!(permutations(4).len(), 24);
    }
}
