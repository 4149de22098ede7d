use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::symmetrizer::{self, shuffle};
use super::tensor::{decode, encode};
use super::FockSpace;
use crate::kinematics::{momentum_dot, SpacetimePoint};
use crate::{par, Error, Result, C64};

/// A vector of the truncated Fock space: one amplitude tensor per particle
/// number `0..=N_max`.
#[derive(Debug, Clone)]
pub struct FockState {
    space: Arc<FockSpace>,
    sectors: Vec<Vec<C64>>,
}

impl FockState {
    pub fn zero(space: &Arc<FockSpace>) -> Self {
        let sectors = (0..=space.n_max()).map(|r| vec![C64::new(0.0, 0.0); space.dim(r)]).collect();
        Self { space: space.clone(), sectors }
    }

    pub fn vacuum(space: &Arc<FockSpace>) -> Self {
        let mut s = Self::zero(space);
        s.sectors[0][0] = C64::new(1.0, 0.0);
        s
    }

    /// Build from explicit sector tensors; missing upper sectors are zero.
    pub fn from_sectors(space: &Arc<FockSpace>, sectors: Vec<Vec<C64>>) -> Result<Self> {
        if sectors.len() > space.n_max() + 1 {
            return Err(Error::Dimension(format!(
                "{} sectors given, truncation allows {}",
                sectors.len(),
                space.n_max() + 1
            )));
        }
        let mut s = Self::zero(space);
        for (r, t) in sectors.into_iter().enumerate() {
            if t.len() != space.dim(r) {
                return Err(Error::ShapeMismatch(format!(
                    "sector {r} has {} amplitudes, expected {}",
                    t.len(),
                    space.dim(r)
                )));
            }
            s.sectors[r] = t;
        }
        Ok(s)
    }

    /// Random S-symmetric state supported in sectors `0..=max_sector`,
    /// normalized to unit norm.
    pub fn random(space: &Arc<FockSpace>, max_sector: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(space, max_sector, &mut rng)
    }

    pub fn random_with<R: Rng>(space: &Arc<FockSpace>, max_sector: usize, rng: &mut R) -> Result<Self> {
        if max_sector > space.n_max() {
            return Err(Error::Dimension(format!(
                "sector {max_sector} above truncation {}",
                space.n_max()
            )));
        }
        let mut s = Self::zero(space);
        for r in 0..=max_sector {
            let raw: Vec<C64> = (0..space.dim(r))
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            s.sectors[r] = symmetrizer::symmetrize(space, &raw, r)?;
        }
        let n = s.norm();
        if n > 0.0 {
            s.scale_mut(C64::new(1.0 / n, 0.0));
        }
        Ok(s)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn n_max(&self) -> usize {
        self.space.n_max()
    }

    pub fn sector(&self, r: usize) -> &[C64] {
        &self.sectors[r]
    }

    pub fn sector_mut(&mut self, r: usize) -> &mut Vec<C64> {
        &mut self.sectors[r]
    }

    pub fn sectors(&self) -> &[Vec<C64>] {
        &self.sectors
    }

    /// Amplitude at a multi-index.
    pub fn amplitude(&self, idx: &[usize]) -> C64 {
        self.sectors[idx.len()][encode(idx, self.space.n())]
    }

    /// Highest sector with a nonzero amplitude, if any.
    pub fn top_sector(&self) -> Option<usize> {
        (0..self.sectors.len()).rev().find(|&r| self.sectors[r].iter().any(|v| *v != C64::new(0.0, 0.0)))
    }

    pub fn inner(&self, other: &FockState) -> C64 {
        (0..self.sectors.len())
            .map(|r| self.space.inner(r, &self.sectors[r], &other.sectors[r]))
            .fold(C64::new(0.0, 0.0), |a, b| a + b)
    }

    pub fn norm_sq(&self) -> f64 {
        (0..self.sectors.len()).map(|r| self.space.norm_sq(r, &self.sectors[r])).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sector_norm(&self, r: usize) -> f64 {
        self.space.norm_sq(r, &self.sectors[r]).sqrt()
    }

    pub fn scale_mut(&mut self, c: C64) {
        for t in &mut self.sectors {
            for v in t.iter_mut() {
                *v *= c;
            }
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut s = self.clone();
        s.scale_mut(c);
        s
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &FockState) {
        for (a, b) in self.sectors.iter_mut().zip(&other.sectors) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
    }

    pub fn add(&self, other: &FockState) -> Self {
        let mut s = self.clone();
        s.axpy(C64::new(1.0, 0.0), other);
        s
    }

    pub fn sub(&self, other: &FockState) -> Self {
        let mut s = self.clone();
        s.axpy(C64::new(-1.0, 0.0), other);
        s
    }

    /// `P_{≤L}`: zero all sectors above `max_sector`.
    pub fn restricted(&self, max_sector: usize) -> Self {
        let mut s = self.clone();
        for r in max_sector + 1..s.sectors.len() {
            s.sectors[r].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        }
        s
    }

    /// Apply `P_n` in every sector.
    pub fn symmetrized(&self) -> Result<Self> {
        let mut s = self.clone();
        for r in 2..s.sectors.len() {
            s.sectors[r] = symmetrizer::symmetrize(&self.space, &self.sectors[r], r)?;
        }
        Ok(s)
    }

    /// Largest relative deviation `‖P_n ψ_n − ψ_n‖ / ‖ψ_n‖` over the sectors.
    pub fn asymmetry(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for r in 2..self.sectors.len() {
            if self.sector_norm(r) > 0.0 {
                worst = worst.max(symmetrizer::asymmetry(&self.space, &self.sectors[r], r)?);
            }
        }
        Ok(worst)
    }

    /// `z†(θ_i)`; the component created out of the top sector is dropped.
    pub fn create(&self, i: usize) -> Self {
        self.create_with_loss(i).0
    }

    /// `z†(θ_i)` together with the norm of the dropped top-sector image,
    /// `‖z†_i ψ_N‖² = ‖ψ_N‖² / w_i + S(0) ‖z_i ψ_N‖²`.
    pub fn create_with_loss(&self, i: usize) -> (Self, f64) {
        let space = &self.space;
        let n = space.n();
        let w = space.grid().weight(i);
        let mut out = Self::zero(space);
        for r in 0..space.n_max() {
            let src = &self.sectors[r];
            let block = space.dim(r);
            let mut t = vec![C64::new(0.0, 0.0); n * block];
            for (k, v) in src.iter().enumerate() {
                t[i * block + k] = v / w;
            }
            let mut sym = shuffle(space, &t, 1, r);
            let f = ((r + 1) as f64).sqrt();
            sym.iter_mut().for_each(|v| *v *= f);
            out.sectors[r + 1] = sym;
        }
        let nm = space.n_max();
        let top = &self.sectors[nm];
        let top_sq = space.norm_sq(nm, top);
        let dropped = if top_sq == 0.0 {
            0.0
        } else {
            let zi = annihilate_sector(space, top, nm, i);
            let lowered = space.norm_sq(nm - 1, &zi);
            (top_sq / w + space.s_at_zero().re * lowered).max(0.0).sqrt()
        };
        (out, dropped)
    }

    /// `z(θ_i)`.
    pub fn annihilate(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for r in 1..=self.space.n_max() {
            out.sectors[r - 1] = annihilate_sector(&self.space, &self.sectors[r], r, i);
        }
        out
    }

    /// `U(T_x)`: multiply by `exp(i Σ_j p(θ_j)·x)`.
    pub fn translate(&self, x: &SpacetimePoint) -> Self {
        let space = &self.space;
        let n = space.n();
        let params = space.scattering().params;
        let phase: Vec<C64> = space
            .grid()
            .points()
            .iter()
            .map(|&t| C64::from_polar(1.0, momentum_dot(t, &params, x)))
            .collect();
        let mut out = self.clone();
        for (r, t) in out.sectors.iter_mut().enumerate() {
            let src = t.clone();
            par::fill(t, |k| {
                let mut d = vec![0; r];
                decode(k, n, &mut d);
                d.iter().fold(src[k], |acc, &j| acc * phase[j])
            });
        }
        out
    }

    /// `U(B_λ)` with `λ = k·Δθ`, shifting every rapidity by `k` grid steps.
    /// Amplitudes whose shifted rapidities leave the grid are dropped; their
    /// weighted norm is returned alongside.
    pub fn boost_steps(&self, k: i64) -> (Self, f64) {
        let space = &self.space;
        let n = space.n() as i64;
        let mut out = Self::zero(space);
        let mut dropped_sq = 0.0;
        for r in 0..self.sectors.len() {
            let src = &self.sectors[r];
            let w = space.weight_products(r);
            let mut d = vec![0; r];
            for (idx, v) in src.iter().enumerate() {
                decode(idx, space.n(), &mut d);
                let shifted: Option<Vec<usize>> = d
                    .iter()
                    .map(|&j| {
                        let t = j as i64 + k;
                        (0..n).contains(&t).then_some(t as usize)
                    })
                    .collect();
                match shifted {
                    Some(s) => out.sectors[r][encode(&s, space.n())] = *v,
                    None => dropped_sq += v.norm_sqr() * w[idx],
                }
            }
        }
        (out, dropped_sq.sqrt())
    }

    /// Boost by a rapidity `λ`; only whole multiples of the grid spacing are
    /// representable.
    pub fn boost(&self, lambda: f64) -> Result<(Self, f64)> {
        let steps = lambda / self.space.grid().spacing();
        let k = steps.round();
        if (steps - k).abs() > 1e-9 {
            return Err(Error::BoostCommensurability { steps });
        }
        Ok(self.boost_steps(k as i64))
    }

    /// `U(j)`: `ψ_n(θ_1, …, θ_n) ↦ conj ψ_n(θ_n, …, θ_1)`.
    pub fn reflect(&self) -> Self {
        let n = self.space.n();
        let mut out = self.clone();
        for (r, t) in out.sectors.iter_mut().enumerate() {
            let src = reverse_sector(&self.sectors[r], n, r);
            for (o, v) in t.iter_mut().zip(src) {
                *o = v.conj();
            }
        }
        out
    }

    pub(crate) fn from_raw(space: &Arc<FockSpace>, sectors: Vec<Vec<C64>>) -> Self {
        Self { space: space.clone(), sectors }
    }
}

fn reverse_sector(t: &[C64], n: usize, r: usize) -> Vec<C64> {
    super::tensor::reverse_group(t, n, 1, r, 1)
}

/// `(z_i ψ)_{r−1}(J) = √r ψ_r(i, J)`.
fn annihilate_sector(space: &FockSpace, t: &[C64], r: usize, i: usize) -> Vec<C64> {
    let block = space.dim(r - 1);
    let f = (r as f64).sqrt();
    t[i * block..(i + 1) * block].iter().map(|v| v * f).collect()
}
