//! Set partitions of labeled points and multisets of labels.

use num_bigint::BigInt;

use crate::series::{factorial, Rational};

/// Calls `f` once per unordered set partition of `0..n`.
///
/// Blocks are listed by their smallest element; each block is sorted.
pub fn for_each_set_partition(n: usize, mut f: impl FnMut(&[Vec<usize>])) {
    let items: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::new();
    first_block_recursion(&items, &mut blocks, &mut |_| true, &mut f);
}

/// First-block recursion: the block holding the smallest remaining element is
/// chosen among all subsets containing it, then the rest is partitioned.
///
/// `accept` is consulted as each block closes; returning false prunes every
/// partition that contains that block.
pub fn for_each_set_partition_pruned(
    items: &[usize],
    mut accept: impl FnMut(&[usize]) -> bool,
    mut f: impl FnMut(&[Vec<usize>]),
) {
    let mut blocks = Vec::new();
    first_block_recursion(items, &mut blocks, &mut accept, &mut f);
}

fn first_block_recursion(
    items: &[usize],
    blocks: &mut Vec<Vec<usize>>,
    accept: &mut dyn FnMut(&[usize]) -> bool,
    f: &mut dyn FnMut(&[Vec<usize>]),
) {
    let Some((&first, rest)) = items.split_first() else {
        f(blocks);
        return;
    };
    let k = rest.len();
    for mask in 0u64..(1u64 << k) {
        let mut block = vec![first];
        let mut remaining = Vec::with_capacity(k);
        for (i, &x) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                block.push(x);
            } else {
                remaining.push(x);
            }
        }
        if !accept(&block) {
            continue;
        }
        blocks.push(block);
        first_block_recursion(&remaining, blocks, accept, f);
        blocks.pop();
    }
}

/// All ordered sequences of nonempty disjoint blocks covering `0..n`.
pub fn ordered_set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for_each_set_partition(n, |blocks| {
        for perm in permutations(blocks.len()) {
            out.push(perm.iter().map(|&i| blocks[i].clone()).collect());
        }
    });
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Number of set partitions of an `n`-set.
pub fn bell(n: usize) -> u64 {
    let mut count = 0;
    for_each_set_partition(n, |_| count += 1);
    count
}

/// Calls `f` with every multiset (as a sorted vector) of `kinds` whose size
/// lies in `min_size..=max_size`. `kinds` must be sorted and distinct.
pub fn for_each_multiset<T: Clone>(kinds: &[T], min_size: usize, max_size: usize, mut f: impl FnMut(&[T])) {
    let mut current = Vec::new();
    multiset_rec(kinds, 0, min_size, max_size, &mut current, &mut f);
}

fn multiset_rec<T: Clone>(
    kinds: &[T],
    start: usize,
    min_size: usize,
    max_size: usize,
    current: &mut Vec<T>,
    f: &mut dyn FnMut(&[T]),
) {
    if current.len() >= min_size {
        f(current);
    }
    if current.len() == max_size {
        return;
    }
    for i in start..kinds.len() {
        current.push(kinds[i].clone());
        multiset_rec(kinds, i, min_size, max_size, current, f);
        current.pop();
    }
}

/// Calls `f` with every sequence of length `len` over `kinds`.
pub fn for_each_sequence<T: Clone>(kinds: &[T], len: usize, mut f: impl FnMut(&[T])) {
    fn rec<T: Clone>(kinds: &[T], len: usize, cur: &mut Vec<T>, f: &mut dyn FnMut(&[T])) {
        if cur.len() == len {
            f(cur);
            return;
        }
        for k in kinds {
            cur.push(k.clone());
            rec(kinds, len, cur, f);
            cur.pop();
        }
    }
    rec(kinds, len, &mut Vec::with_capacity(len), &mut f);
}

/// Multiplicities of consecutive equal entries in a sorted slice.
pub fn multiplicities<T: PartialEq>(sorted: &[T]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for (i, x) in sorted.iter().enumerate() {
        if i > 0 && sorted[i - 1] == *x {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

/// `prod_i m_i!` over the multiplicities of a sorted slice, i.e. the order of
/// the group of permutations fixing the sequence.
pub fn automorphism_order<T: PartialEq>(sorted: &[T]) -> BigInt {
    multiplicities(sorted).into_iter().map(factorial).product()
}

/// `1 / prod_i m_i!`.
pub fn inverse_automorphism_order<T: PartialEq>(sorted: &[T]) -> Rational {
    Rational::from_integer(automorphism_order(sorted)).recip()
}

/// `n! / prod_i m_i!`: the number of distinct orderings of a multiset.
pub fn multinomial<T: PartialEq>(sorted: &[T]) -> BigInt {
    factorial(sorted.len() as u32) / automorphism_order(sorted)
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::series::int;
    use proptest::prelude::*;

    fn mask(block: &[usize]) -> usize {
        block.iter().map(|&i| 1 << i).sum()
    }

    proptest! {
        // Averaging a block-multiplicative weight over orderings reproduces
        // the unordered sum.
        #[test]
        fn ordered_over_h_factorial_matches_unordered(
            n in 0usize..=7,
            weights in proptest::collection::vec(-5i64..=5, 128),
        ) {
            let w = |blocks: &[Vec<usize>]| blocks.iter().fold(int(1), |acc, b| acc * int(weights[mask(b)]));
            let mut unordered = int(0);
            for_each_set_partition(n, |blocks| unordered += w(blocks));
            let ordered = ordered_set_partitions(n).iter().fold(int(0), |acc, blocks| {
                acc + w(blocks) / Rational::from_integer(factorial(blocks.len() as u32))
            });
            prop_assert_eq!(ordered, unordered);
        }

        #[test]
        fn partitions_cover_each_item_once(n in 0usize..=7) {
            for_each_set_partition(n, |blocks| {
                let mut seen: Vec<usize> = blocks.concat();
                seen.sort_unstable();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
            });
        }
    }
}
