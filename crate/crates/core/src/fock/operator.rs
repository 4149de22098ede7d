//! Linear operators on the truncated Fock space.
//!
//! Operators are kept as a lazy expression tree whose leaves are
//! normal-ordered ZF monomials, dense blocks or translations. Applying an
//! operator evaluates the tree right to left; every leaf application is the
//! truncated map `P_{≤N} A P_{≤N}`, and [`FockOperator::adjoint`] is the exact
//! adjoint of that truncated map with respect to the weighted inner product.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::symmetrizer::{self, shuffle, Block, Convention};
use super::tensor::{dim, factorial, reverse_group};
use super::{FockSpace, FockState};
use crate::kinematics::SpacetimePoint;
use crate::{par, Error, Result, C64};

/// Whether a monomial is built from `z†, z` or from the primed operators
/// `z′† = J z† J`, `z′ = J z J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// `(1/(m! n!)) Σ W(θ) W(η) f(θ; η) z†(θ_1)…z†(θ_m) z(η_1)…z(η_n)`, or the
/// same word in primed operators for [`Side::Right`].
#[derive(Debug, Clone)]
pub struct Monomial {
    m: usize,
    n: usize,
    side: Side,
    /// `f(θ; η)` with the `θ` group as the slow index, projected onto the
    /// exchange symmetry of its side.
    coeff: Arc<Vec<C64>>,
    /// Left: `W(η′) f(θ; rev η′)` as an `N^m × N^n` matrix.
    /// Right: `W(η) f(rev κ; η)` as an `N^n × N^m` matrix.
    kernel: Arc<Vec<C64>>,
}

impl Monomial {
    /// Build a monomial, projecting the coefficient onto the exchange
    /// symmetry of its two index groups (standard for `z`, reversed for `z′`).
    pub fn new(space: &FockSpace, m: usize, n: usize, side: Side, coeff: Vec<C64>) -> Result<Self> {
        let nn = space.n();
        if coeff.len() != dim(nn, m + n) {
            return Err(Error::ShapeMismatch(format!(
                "coefficient of order ({m},{n}) has {} entries, expected {}",
                coeff.len(),
                dim(nn, m + n)
            )));
        }
        space.check_rank(m + n)?;
        let conv = match side {
            Side::Left => Convention::Standard,
            Side::Right => Convention::Reversed,
        };
        let c = symmetrizer::symmetrize_block(space, &coeff, Block { pre: 1, rank: m, post: dim(nn, n) }, conv)?;
        let c = symmetrizer::symmetrize_block(space, &c, Block { pre: dim(nn, m), rank: n, post: 1 }, conv)?;
        Ok(Self::from_projected(space, m, n, side, c))
    }

    fn from_projected(space: &FockSpace, m: usize, n: usize, side: Side, coeff: Vec<C64>) -> Self {
        let nn = space.n();
        let (dm, dn) = (dim(nn, m), dim(nn, n));
        let wn = space.weight_products(n);
        let kernel = match side {
            Side::Left => {
                let mut g = reverse_group(&coeff, nn, dm, n, 1);
                for row in g.chunks_mut(dn.max(1)) {
                    for (v, w) in row.iter_mut().zip(wn) {
                        *v *= w;
                    }
                }
                g
            }
            Side::Right => {
                let f = reverse_group(&coeff, nn, 1, m, dn);
                let mut h = vec![C64::new(0.0, 0.0); dm * dn];
                for k in 0..dm {
                    for e in 0..dn {
                        h[e * dm + k] = f[k * dn + e] * wn[e];
                    }
                }
                h
            }
        };
        Self { m, n, side, coeff: Arc::new(coeff), kernel: Arc::new(kernel) }
    }

    pub fn order(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn coeff(&self) -> &[C64] {
        &self.coeff
    }

    /// `f†(η; θ) = conj f(rev θ; rev η)` with the orders swapped.
    fn adjoint(&self, space: &FockSpace) -> Self {
        let nn = space.n();
        let (dm, dn) = (dim(nn, self.m), dim(nn, self.n));
        let r = reverse_group(&self.coeff, nn, 1, self.m, dn);
        let r = reverse_group(&r, nn, dm, self.n, 1);
        let mut t = vec![C64::new(0.0, 0.0); dm * dn];
        for a in 0..dm {
            for b in 0..dn {
                t[b * dm + a] = r[a * dn + b].conj();
            }
        }
        Self::from_projected(space, self.n, self.m, self.side, t)
    }

    fn conj_other_side(&self, space: &FockSpace) -> Self {
        let side = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        let c = self.coeff.iter().map(|v| v.conj()).collect();
        Self::from_projected(space, self.m, self.n, side, c)
    }

    /// Image of input sector `k` (requires `k ≥ n`), landing in sector
    /// `k − n + m`. Not truncated.
    fn apply_sector(&self, space: &FockSpace, psi: &[C64], k: usize) -> Vec<C64> {
        let nn = space.n();
        let (m, n) = (self.m, self.n);
        let p = k - n;
        let q = p + m;
        let (dm, dn, dp) = (dim(nn, m), dim(nn, n), dim(nn, p));
        let scale = ((factorial(q) / factorial(p)) * (factorial(k) / factorial(p))).sqrt() / (factorial(m) * factorial(n));
        let t = match self.side {
            Side::Left => matmul(&self.kernel, psi, dm, dn, dp),
            Side::Right => matmul(psi, &self.kernel, dp, dn, dm),
        };
        let mut out = match self.side {
            Side::Left => shuffle(space, &t, m, p),
            Side::Right => shuffle(space, &t, p, m),
        };
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// Closed-form norm of the image of the top sector for a single-creation
    /// monomial: `‖Σ c_i z†_i ψ‖² = Σ |c_i|²/w_i ‖ψ‖² + Σ conj(c_i) c_j S(θ_j − θ_i) ⟨z_j ψ, z_i ψ⟩`.
    fn creation_overflow_sq(&self, space: &FockSpace, psi: &[C64], k: usize) -> Option<f64> {
        if (self.m, self.n) != (1, 0) {
            return None;
        }
        let nn = space.n();
        let w = space.grid().weights();
        let c: Vec<C64> = (0..nn).map(|i| self.coeff[i] * w[i]).collect();
        let block = space.dim(k - 1);
        let psi_sq = space.norm_sq(k, psi);
        let mut total = (0..nn).map(|i| c[i].norm_sqr() / w[i]).sum::<f64>() * psi_sq;
        let rows: Vec<&[C64]> = (0..nn).map(|i| &psi[i * block..(i + 1) * block]).collect();
        let gram: Vec<C64> = par::map(nn * nn, |ji| {
            let (j, i) = (ji / nn, ji % nn);
            space.inner(k - 1, rows[j], rows[i]) * k as f64
        });
        let mut cross = C64::new(0.0, 0.0);
        for j in 0..nn {
            for i in 0..nn {
                cross += c[i].conj() * c[j] * space.s(j, i) * gram[j * nn + i];
            }
        }
        total += cross.re;
        Some(total.max(0.0))
    }
}

/// `C = A · B` for row-major `A: r × k`, `B: k × c`.
pub(crate) fn matmul(a: &[C64], b: &[C64], rows: usize, inner: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    if cols == 0 {
        return out;
    }
    par::for_each_row(&mut out, cols, |i, row| {
        let arow = &a[i * inner..(i + 1) * inner];
        for (kk, &aik) in arow.iter().enumerate() {
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let brow = &b[kk * cols..(kk + 1) * cols];
            for (o, bv) in row.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    });
    out
}

/// A dense block mapping sector `n` to sector `m`, as an `N^m × N^n` matrix.
#[derive(Debug, Clone)]
pub struct DenseBlock {
    pub m: usize,
    pub n: usize,
    pub matrix: Vec<C64>,
}

#[derive(Debug)]
enum Node {
    Terms(Vec<Monomial>),
    Dense(Vec<DenseBlock>),
    Translation(SpacetimePoint),
    Scaled(C64, FockOperator),
    Sum(Vec<FockOperator>),
    /// Factors in written order; the last one acts first.
    Product(Vec<FockOperator>),
    /// `J A J`.
    Reflected(FockOperator),
}

#[derive(Debug, Clone)]
pub struct FockOperator {
    space: Arc<FockSpace>,
    node: Arc<Node>,
}

impl FockOperator {
    fn with_node(space: &Arc<FockSpace>, node: Node) -> Self {
        Self { space: space.clone(), node: Arc::new(node) }
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn zero(space: &Arc<FockSpace>) -> Self {
        Self::with_node(space, Node::Terms(Vec::new()))
    }

    pub fn identity(space: &Arc<FockSpace>) -> Self {
        Self::scalar(space, C64::new(1.0, 0.0))
    }

    pub fn scalar(space: &Arc<FockSpace>, c: C64) -> Self {
        let m = Monomial::from_projected(space, 0, 0, Side::Left, vec![c]);
        Self::with_node(space, Node::Terms(vec![m]))
    }

    pub fn from_monomials(space: &Arc<FockSpace>, monomials: Vec<Monomial>) -> Self {
        Self::with_node(space, Node::Terms(monomials))
    }

    /// Dense blocks; each matrix must be `N^m × N^n` with `m, n ≤ N_max`.
    pub fn from_dense(space: &Arc<FockSpace>, blocks: Vec<DenseBlock>) -> Result<Self> {
        for b in &blocks {
            if b.m > space.n_max() || b.n > space.n_max() {
                return Err(Error::Dimension(format!("block ({},{}) above truncation {}", b.m, b.n, space.n_max())));
            }
            if b.matrix.len() != space.dim(b.m) * space.dim(b.n) {
                return Err(Error::ShapeMismatch(format!("block ({},{}) has wrong size", b.m, b.n)));
            }
        }
        Ok(Self::with_node(space, Node::Dense(blocks)))
    }

    /// `z†(θ_i)`.
    pub fn creator(space: &Arc<FockSpace>, i: usize) -> Self {
        let c = Self::delta(space, i);
        Self::from_monomials(space, vec![Monomial::from_projected(space, 1, 0, Side::Left, c)])
    }

    /// `z(θ_i)`.
    pub fn annihilator(space: &Arc<FockSpace>, i: usize) -> Self {
        let c = Self::delta(space, i);
        Self::from_monomials(space, vec![Monomial::from_projected(space, 0, 1, Side::Left, c)])
    }

    fn delta(space: &FockSpace, i: usize) -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); space.n()];
        c[i] = C64::new(1.0 / space.grid().weight(i), 0.0);
        c
    }

    /// `U(T_x)`.
    pub fn translation(space: &Arc<FockSpace>, x: SpacetimePoint) -> Self {
        Self::with_node(space, Node::Translation(x))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self::with_node(&self.space, Node::Scaled(c, self.clone()))
    }

    pub fn sum(space: &Arc<FockSpace>, terms: Vec<FockOperator>) -> Result<Self> {
        for t in &terms {
            space.check_same(&t.space)?;
        }
        Ok(Self::with_node(space, Node::Sum(terms)))
    }

    /// `factors[0] · factors[1] · …`; the last factor acts first.
    pub fn product(space: &Arc<FockSpace>, factors: Vec<FockOperator>) -> Result<Self> {
        for t in &factors {
            space.check_same(&t.space)?;
        }
        Ok(Self::with_node(space, Node::Product(factors)))
    }

    pub fn plus(&self, other: &FockOperator) -> Result<Self> {
        Self::sum(&self.space, vec![self.clone(), other.clone()])
    }

    pub fn minus(&self, other: &FockOperator) -> Result<Self> {
        Self::sum(&self.space, vec![self.clone(), other.scaled(C64::new(-1.0, 0.0))])
    }

    pub fn times(&self, other: &FockOperator) -> Result<Self> {
        Self::product(&self.space, vec![self.clone(), other.clone()])
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &FockOperator) -> Result<Self> {
        self.times(other)?.minus(&other.times(self)?)
    }

    /// `J A J`.
    pub fn reflected(&self) -> Self {
        Self::with_node(&self.space, Node::Reflected(self.clone()))
    }

    /// The normal-ordered monomials, if this operator is a plain sum of them.
    pub fn monomials(&self) -> Option<&[Monomial]> {
        match &*self.node {
            Node::Terms(t) => Some(t),
            _ => None,
        }
    }

    /// Exact adjoint of the truncated map.
    pub fn adjoint(&self) -> Self {
        let s = &self.space;
        let node = match &*self.node {
            Node::Terms(t) => Node::Terms(t.iter().map(|m| m.adjoint(s)).collect()),
            Node::Dense(blocks) => Node::Dense(blocks.iter().map(|b| dense_adjoint(s, b)).collect()),
            Node::Translation(x) => Node::Translation(x.neg()),
            Node::Scaled(c, a) => Node::Scaled(c.conj(), a.adjoint()),
            Node::Sum(v) => Node::Sum(v.iter().map(|a| a.adjoint()).collect()),
            Node::Product(v) => Node::Product(v.iter().rev().map(|a| a.adjoint()).collect()),
            Node::Reflected(a) => Node::Reflected(a.adjoint()),
        };
        Self::with_node(s, node)
    }

    /// `J A J` pushed into the leaves where possible: left monomials become
    /// right monomials with conjugated coefficients and vice versa.
    pub fn reflected_terms(&self) -> Option<Self> {
        match &*self.node {
            Node::Terms(t) => Some(Self::with_node(
                &self.space,
                Node::Terms(t.iter().map(|m| m.conj_other_side(&self.space)).collect()),
            )),
            _ => None,
        }
    }

    /// Largest increase of particle number.
    pub fn raise(&self) -> usize {
        match &*self.node {
            Node::Terms(t) => t.iter().map(|m| m.m.saturating_sub(m.n)).max().unwrap_or(0),
            Node::Dense(b) => b.iter().map(|m| m.m.saturating_sub(m.n)).max().unwrap_or(0),
            Node::Translation(_) => 0,
            Node::Scaled(_, a) | Node::Reflected(a) => a.raise(),
            Node::Sum(v) => v.iter().map(|a| a.raise()).max().unwrap_or(0),
            Node::Product(v) => v.iter().map(|a| a.raise()).sum(),
        }
    }

    /// Largest decrease of particle number.
    pub fn lower(&self) -> usize {
        match &*self.node {
            Node::Terms(t) => t.iter().map(|m| m.n.saturating_sub(m.m)).max().unwrap_or(0),
            Node::Dense(b) => b.iter().map(|m| m.n.saturating_sub(m.m)).max().unwrap_or(0),
            Node::Translation(_) => 0,
            Node::Scaled(_, a) | Node::Reflected(a) => a.lower(),
            Node::Sum(v) => v.iter().map(|a| a.lower()).max().unwrap_or(0),
            Node::Product(v) => v.iter().map(|a| a.lower()).sum(),
        }
    }

    pub fn apply(&self, psi: &FockState) -> Result<FockState> {
        self.apply_limited(psi, self.space.n_max())
    }

    /// Apply, computing output sectors up to `max_out` only.
    pub fn apply_limited(&self, psi: &FockState, max_out: usize) -> Result<FockState> {
        let mut dropped = 0.0;
        self.apply_tracked(psi, max_out, &mut dropped)
    }

    /// Apply, accumulating into `dropped_sq` the squared norm of single-creation
    /// images pushed above the truncation.
    pub fn apply_tracked(&self, psi: &FockState, max_out: usize, dropped_sq: &mut f64) -> Result<FockState> {
        self.space.check_same(psi.space())?;
        let max_out = max_out.min(self.space.n_max());
        Ok(self.eval(psi, max_out, dropped_sq))
    }

    fn eval(&self, psi: &FockState, max_out: usize, dropped_sq: &mut f64) -> FockState {
        let space = &self.space;
        match &*self.node {
            Node::Terms(terms) => {
                let mut out: Vec<Vec<C64>> = (0..=space.n_max()).map(|r| vec![C64::new(0.0, 0.0); space.dim(r)]).collect();
                let nonzero: Vec<bool> = psi.sectors().iter().map(|t| t.iter().any(|v| *v != C64::new(0.0, 0.0))).collect();
                for mono in terms {
                    for k in mono.n..=space.n_max() {
                        if !nonzero[k] {
                            continue;
                        }
                        let q = k - mono.n + mono.m;
                        if q > space.n_max() {
                            if let Some(sq) = mono.creation_overflow_sq(space, psi.sector(k), k) {
                                *dropped_sq += sq;
                            }
                            continue;
                        }
                        if q > max_out {
                            continue;
                        }
                        let img = mono.apply_sector(space, psi.sector(k), k);
                        for (o, v) in out[q].iter_mut().zip(img) {
                            *o += v;
                        }
                    }
                }
                FockState::from_raw(space, out)
            }
            Node::Dense(blocks) => {
                let mut out = FockState::zero(space);
                for b in blocks {
                    if b.m > max_out {
                        continue;
                    }
                    let img = matmul(&b.matrix, psi.sector(b.n), space.dim(b.m), space.dim(b.n), 1);
                    for (o, v) in out.sector_mut(b.m).iter_mut().zip(img) {
                        *o += v;
                    }
                }
                out
            }
            Node::Translation(x) => psi.restricted(max_out).translate(x),
            Node::Scaled(c, a) => {
                let mut d = 0.0;
                let mut v = a.eval(psi, max_out, &mut d);
                *dropped_sq += c.norm_sqr() * d;
                v.scale_mut(*c);
                v
            }
            Node::Sum(terms) => {
                let mut out = FockState::zero(space);
                for t in terms {
                    out.axpy(C64::new(1.0, 0.0), &t.eval(psi, max_out, dropped_sq));
                }
                out
            }
            Node::Product(factors) => {
                let lowers: Vec<usize> = factors.iter().map(|f| f.lower()).collect();
                let mut v = psi.clone();
                for (i, f) in factors.iter().enumerate().rev() {
                    let limit = max_out + lowers[..i].iter().sum::<usize>();
                    v = f.eval(&v, limit.min(space.n_max()), dropped_sq);
                }
                v
            }
            Node::Reflected(a) => a.eval(&psi.reflect(), max_out, dropped_sq).reflect(),
        }
    }

    /// The block `P_m A P_n` as an `N^m × N^n` matrix; column `c` is the
    /// sector-`m` part of `A P_n e_c`.
    pub fn dense_block(&self, m: usize, n: usize) -> Result<Vec<C64>> {
        let s = &self.space;
        if m > s.n_max() || n > s.n_max() {
            return Err(Error::Dimension(format!("block ({m},{n}) above truncation {}", s.n_max())));
        }
        let (dm, dn) = (s.dim(m), s.dim(n));
        if dm.saturating_mul(dn) > s.max_entries() {
            return Err(Error::Dimension(format!("dense block ({m},{n}) exceeds the memory budget")));
        }
        let cols: Vec<Vec<C64>> = (0..dn)
            .map(|c| -> Result<Vec<C64>> {
                let mut e = vec![C64::new(0.0, 0.0); dn];
                e[c] = C64::new(1.0, 0.0);
                let e = symmetrizer::symmetrize(s, &e, n)?;
                let mut st = FockState::zero(s);
                *st.sector_mut(n) = e;
                let img = self.apply_limited(&st, m)?;
                Ok(img.sector(m).to_vec())
            })
            .collect::<Result<_>>()?;
        let mut out = vec![C64::new(0.0, 0.0); dm * dn];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..dm {
                out[r * dn + c] = col[r];
            }
        }
        Ok(out)
    }

    /// Materialize every block as a dense operator.
    pub fn to_dense(&self) -> Result<Self> {
        let nm = self.space.n_max();
        let mut blocks = Vec::new();
        for m in 0..=nm {
            for n in 0..=nm {
                let mat = self.dense_block(m, n)?;
                if mat.iter().any(|v| *v != C64::new(0.0, 0.0)) {
                    blocks.push(DenseBlock { m, n, matrix: mat });
                }
            }
        }
        Self::from_dense(&self.space, blocks)
    }

    pub fn dense_blocks(&self) -> Option<&[DenseBlock]> {
        match &*self.node {
            Node::Dense(b) => Some(b),
            _ => None,
        }
    }
}

/// `W_n⁻¹ M^H W_m`.
fn dense_adjoint(space: &FockSpace, b: &DenseBlock) -> DenseBlock {
    let (dm, dn) = (space.dim(b.m), space.dim(b.n));
    let wm = space.weight_products(b.m);
    let wn = space.weight_products(b.n);
    let mut out = vec![C64::new(0.0, 0.0); dn * dm];
    for r in 0..dm {
        for c in 0..dn {
            out[c * dm + r] = b.matrix[r * dn + c].conj() * wm[r] / wn[c];
        }
    }
    DenseBlock { m: b.n, n: b.m, matrix: out }
}
