//! The S-symmetrizer and its building blocks.
//!
//! For a permutation `π` of the slots, `(D(π)f)(L) = Π S(θ_{L_b} − θ_{L_a}) ·
//! f(L_{π(1)}, …, L_{π(n)})` where the product runs over the pairs `a < b`
//! that `π` puts in reverse order. The S-symmetrizer is `P_n = (1/n!) Σ_π D(π)`.
//! With `Convention::Reversed` the exchange factor is `S(θ_{L_a} − θ_{L_b})`
//! instead, which is the natural symmetry of coefficients of primed operators.

use super::tensor::{decode, dim, encode, factorial, permutations, subsets};
use super::FockSpace;
use crate::{par, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Standard,
    Reversed,
}

/// A group of `rank` consecutive slots inside a tensor of shape
/// `pre × N^rank × post`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub pre: usize,
    pub rank: usize,
    pub post: usize,
}

impl Block {
    pub fn whole(rank: usize) -> Self {
        Self { pre: 1, rank, post: 1 }
    }
}

#[inline]
fn exchange(space: &FockSpace, conv: Convention, later: usize, earlier: usize) -> C64 {
    match conv {
        Convention::Standard => space.s(later, earlier),
        Convention::Reversed => space.s(earlier, later),
    }
}

struct PermData {
    perm: Vec<usize>,
    inversions: Vec<(usize, usize)>,
}

fn perm_data(perm: Vec<usize>) -> PermData {
    let r = perm.len();
    let mut inv = vec![0; r];
    for (pos, &p) in perm.iter().enumerate() {
        inv[p] = pos;
    }
    let mut inversions = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            if inv[a] > inv[b] {
                inversions.push((a, b));
            }
        }
    }
    PermData { perm, inversions }
}

fn apply_perms(space: &FockSpace, data: &[C64], block: Block, perms: &[PermData], conv: Convention, scale: f64) -> Vec<C64> {
    let n = space.n();
    let g = dim(n, block.rank);
    assert_eq!(data.len(), block.pre * g * block.post, "tensor does not match block shape");
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    par::for_each_row(&mut out, block.post, |row, o| {
        let a = row / g;
        let k = row % g;
        let mut l = vec![0; block.rank];
        let mut src = vec![0; block.rank];
        decode(k, n, &mut l);
        for pd in perms {
            let mut f = C64::new(scale, 0.0);
            for &(x, y) in &pd.inversions {
                f *= exchange(space, conv, l[y], l[x]);
            }
            for (s, &p) in src.iter_mut().zip(&pd.perm) {
                *s = l[p];
            }
            let base = (a * g + encode(&src, n)) * block.post;
            for (c, v) in o.iter_mut().enumerate() {
                *v += f * data[base + c];
            }
        }
    });
    out
}

/// `D(π)` on a block of slots; `perm[a]` is the source slot of output slot `a`.
pub fn permute(space: &FockSpace, data: &[C64], block: Block, perm: &[usize], conv: Convention) -> Vec<C64> {
    apply_perms(space, data, block, &[perm_data(perm.to_vec())], conv, 1.0)
}

/// `D(τ_j)` for the adjacent transposition of slots `j` and `j + 1` of a rank-`r` tensor.
pub fn transposition(space: &FockSpace, data: &[C64], rank: usize, j: usize, conv: Convention) -> Vec<C64> {
    let mut perm: Vec<usize> = (0..rank).collect();
    perm.swap(j, j + 1);
    permute(space, data, Block::whole(rank), &perm, conv)
}

/// S-symmetrize a block of slots.
pub fn symmetrize_block(space: &FockSpace, data: &[C64], block: Block, conv: Convention) -> Result<Vec<C64>> {
    space.check_rank(block.rank)?;
    if block.rank < 2 {
        return Ok(data.to_vec());
    }
    let perms: Vec<PermData> = permutations(block.rank).into_iter().map(perm_data).collect();
    Ok(apply_perms(space, data, block, &perms, conv, 1.0 / factorial(block.rank)))
}

/// `P_n` on a rank-`n` tensor.
pub fn symmetrize(space: &FockSpace, data: &[C64], rank: usize) -> Result<Vec<C64>> {
    symmetrize_block(space, data, Block::whole(rank), Convention::Standard)
}

/// `P_q` on a tensor that is already S-symmetric within its first `m` slots
/// and within its last `p` slots. Sums over the `C(q, m)` shuffles only.
pub fn shuffle(space: &FockSpace, data: &[C64], m: usize, p: usize) -> Vec<C64> {
    let q = m + p;
    let n = space.n();
    assert_eq!(data.len(), dim(n, q), "tensor does not match rank");
    if m == 0 || p == 0 {
        return data.to_vec();
    }
    struct Sh {
        order: Vec<usize>,
        pairs: Vec<(usize, usize)>,
    }
    let shuffles: Vec<Sh> = subsets(q, m)
        .into_iter()
        .map(|a| {
            let in_a: Vec<bool> = (0..q).map(|i| a.contains(&i)).collect();
            let mut pairs = Vec::new();
            for &x in &a {
                for y in 0..x {
                    if !in_a[y] {
                        pairs.push((x, y));
                    }
                }
            }
            let mut order = a.clone();
            order.extend((0..q).filter(|i| !in_a[*i]));
            Sh { order, pairs }
        })
        .collect();
    let scale = 1.0 / shuffles.len() as f64;
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    par::fill(&mut out, |k| {
        let mut l = [0usize; 16];
        let mut src = [0usize; 16];
        decode(k, n, &mut l[..q]);
        let mut acc = C64::new(0.0, 0.0);
        for sh in &shuffles {
            let mut f = C64::new(1.0, 0.0);
            for &(x, y) in &sh.pairs {
                f *= space.s(l[x], l[y]);
            }
            for (s, &o) in src[..q].iter_mut().zip(&sh.order) {
                *s = l[o];
            }
            acc += f * data[encode(&src[..q], n)];
        }
        acc * scale
    });
    out
}

/// Weighted distance `‖P f − f‖ / max(‖f‖, tiny)`.
pub fn asymmetry(space: &FockSpace, data: &[C64], rank: usize) -> Result<f64> {
    let p = symmetrize(space, data, rank)?;
    let diff: Vec<C64> = p.iter().zip(data).map(|(a, b)| a - b).collect();
    let nf = space.norm_sq(rank, data).sqrt();
    Ok(space.norm_sq(rank, &diff).sqrt() / nf.max(f64::MIN_POSITIVE))
}
