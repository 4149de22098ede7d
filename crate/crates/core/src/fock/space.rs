use std::sync::Arc;

use super::tensor::{decode, dim};
use super::RapidityGrid;
use crate::kinematics::ScatteringFunction;
use crate::{par, Error, Result, C64};

/// Largest tensor (in complex entries) a space will allocate per sector.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 25;

/// Grid, truncation and scattering function shared by states and operators.
#[derive(Debug)]
pub struct FockSpace {
    grid: RapidityGrid,
    n_max: usize,
    s: ScatteringFunction,
    /// `S(θ_i − θ_j)` at `i * N + j`.
    s_table: Vec<C64>,
    /// Product of slot weights for every multi-index, per sector.
    weight_products: Vec<Vec<f64>>,
    max_entries: usize,
}

impl FockSpace {
    pub fn new(grid: RapidityGrid, n_max: usize, s: ScatteringFunction) -> Result<Arc<Self>> {
        Self::with_budget(grid, n_max, s, DEFAULT_MAX_ENTRIES)
    }

    pub fn with_budget(grid: RapidityGrid, n_max: usize, s: ScatteringFunction, max_entries: usize) -> Result<Arc<Self>> {
        let n = grid.len();
        let top = (n as f64).powi(n_max as i32);
        if top > max_entries as f64 {
            return Err(Error::Dimension(format!(
                "{n}^{n_max} = {top:.3e} amplitudes exceed the budget of {max_entries} entries"
            )));
        }
        let mut s_table = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                s_table[i * n + j] = s.eval_real(grid.theta(i) - grid.theta(j));
            }
        }
        let weight_products = (0..=n_max)
            .map(|r| {
                let w = grid.weights();
                let mut out = vec![0.0; dim(n, r)];
                par::fill(&mut out, |k| {
                    let mut d = vec![0; r];
                    decode(k, n, &mut d);
                    d.iter().map(|&i| w[i]).product()
                });
                out
            })
            .collect();
        Ok(Arc::new(Self { grid, n_max, s, s_table, weight_products, max_entries }))
    }

    pub fn grid(&self) -> &RapidityGrid {
        &self.grid
    }

    /// Number of grid points.
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn scattering(&self) -> &ScatteringFunction {
        &self.s
    }

    pub fn max_entries(&self) -> usize {
        self.max_entries
    }

    /// Number of amplitudes of a rank-`r` tensor.
    pub fn dim(&self, r: usize) -> usize {
        dim(self.n(), r)
    }

    /// `S(θ_i − θ_j)`.
    #[inline]
    pub fn s(&self, i: usize, j: usize) -> C64 {
        self.s_table[i * self.n() + j]
    }

    pub fn s_table(&self) -> &[C64] {
        &self.s_table
    }

    /// `S(0)`, the exchange factor at coinciding rapidities.
    pub fn s_at_zero(&self) -> C64 {
        self.s.eval_real(0.0)
    }

    pub fn weight_products(&self, r: usize) -> &[f64] {
        &self.weight_products[r]
    }

    /// Weighted inner product `Σ_I W(I) conj(a_I) b_I`, antilinear in `a`.
    pub fn inner(&self, r: usize, a: &[C64], b: &[C64]) -> C64 {
        let w = &self.weight_products[r];
        par::sum(a.len(), |k| a[k].conj() * b[k] * w[k])
    }

    pub fn norm_sq(&self, r: usize, a: &[C64]) -> f64 {
        let w = &self.weight_products[r];
        par::sum(a.len(), |k| a[k].norm_sqr() * w[k])
    }

    /// Same grid, truncation and scattering function.
    pub fn same_as(&self, other: &FockSpace) -> bool {
        std::ptr::eq(self, other)
            || (self.grid == other.grid && self.n_max == other.n_max && self.s == other.s)
    }

    pub(crate) fn check_same(&self, other: &FockSpace) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "spaces differ: {} points / N_max {} / {} vs {} points / N_max {} / {}",
                self.n(),
                self.n_max,
                self.s.kind(),
                other.n(),
                other.n_max,
                other.s.kind()
            )))
        }
    }

    pub(crate) fn check_rank(&self, r: usize) -> Result<()> {
        if self.dim(r) > self.max_entries {
            return Err(Error::Dimension(format!(
                "rank-{r} tensor over {} points exceeds the budget of {} entries",
                self.n(),
                self.max_entries
            )));
        }
        Ok(())
    }
}
