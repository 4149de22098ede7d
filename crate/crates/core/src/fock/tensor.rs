//! Index arithmetic for dense tensors over grid indices.

use itertools::Itertools;

/// `n^r`.
pub fn dim(n: usize, rank: usize) -> usize {
    n.pow(rank as u32)
}

/// Grid digits of a flat index, most significant first.
pub fn decode(mut idx: usize, n: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = idx % n;
        idx /= n;
    }
}

pub fn encode(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// All permutations of `0..r` in lexicographic order.
pub fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    (0..r).permutations(r).collect()
}

/// Sign of a permutation given as a list of images.
pub fn permutation_sign(p: &[usize]) -> f64 {
    let mut inv = 0usize;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if p[a] > p[b] {
                inv += 1;
            }
        }
    }
    if inv.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// All `m`-element subsets of `0..q`, each sorted increasingly.
pub fn subsets(q: usize, m: usize) -> Vec<Vec<usize>> {
    (0..q).combinations(m).collect()
}

/// Non-decreasing index tuples of length `r` over `0..n`.
pub fn sorted_tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0..n).combinations_with_replacement(r).collect()
}

/// Reverse the order of a block of `rank` consecutive slots inside a tensor
/// of shape `pre × n^rank × post`.
pub fn reverse_group(data: &[crate::C64], n: usize, pre: usize, rank: usize, post: usize) -> Vec<crate::C64> {
    let g = dim(n, rank);
    debug_assert_eq!(data.len(), pre * g * post);
    let rev: Vec<usize> = (0..g)
        .map(|k| {
            let mut d = vec![0; rank];
            decode(k, n, &mut d);
            d.reverse();
            encode(&d, n)
        })
        .collect();
    let mut out = vec![crate::C64::new(0.0, 0.0); data.len()];
    for a in 0..pre {
        for (k, &rk) in rev.iter().enumerate() {
            let src = (a * g + rk) * post;
            let dst = (a * g + k) * post;
            out[dst..dst + post].copy_from_slice(&data[src..src + post]);
        }
    }
    out
}
