//! Normal-ordered series expansions
//! `A = Σ_{m,n} (1/(m! n!)) ∫ f_mn(θ; η) z†(θ_1)…z†(θ_m) z(η_1)…z(η_n)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fock::symmetrizer::{self, Block, Convention};
use crate::fock::tensor::{decode, dim, encode, factorial, sorted_tuples, subsets};
use crate::fock::{FockOperator, FockSpace, FockState, Monomial, RapidityGrid, Side};
use crate::kinematics::ModelKind;
use crate::{par, Error, Result, C64};

/// Grid-sampled coefficients `f_mn(θ_1..θ_m; η_1..η_n)`, the `θ` group as
/// the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub grid: RapidityGrid,
    pub max_order: usize,
    pub entries: BTreeMap<(usize, usize), Vec<C64>>,
    /// Orders whose values are not trustworthy at the truncation they were
    /// extracted from.
    #[serde(default)]
    pub unreliable: Vec<(usize, usize)>,
}

impl CoefficientTable {
    pub fn new(grid: RapidityGrid, max_order: usize) -> Self {
        Self { grid, max_order, entries: BTreeMap::new(), unreliable: Vec::new() }
    }

    pub fn insert(&mut self, m: usize, n: usize, values: Vec<C64>) -> Result<()> {
        if m + n > self.max_order {
            return Err(Error::Dimension(format!("order ({m},{n}) above max order {}", self.max_order)));
        }
        let want = dim(self.grid.len(), m + n);
        if values.len() != want {
            return Err(Error::ShapeMismatch(format!("order ({m},{n}) needs {want} entries, got {}", values.len())));
        }
        self.entries.insert((m, n), values);
        Ok(())
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&[C64]> {
        self.entries.get(&(m, n)).map(|v| v.as_slice())
    }

    /// Value at explicit grid indices.
    pub fn value(&self, m: usize, n: usize, theta: &[usize], eta: &[usize]) -> C64 {
        let nn = self.grid.len();
        match self.get(m, n) {
            Some(t) => t[encode(theta, nn) * dim(nn, n) + encode(eta, nn)],
            None => C64::new(0.0, 0.0),
        }
    }

    /// Random table, S-symmetric within each index group, over orders with
    /// `m, n ≤ N_max` and `m + n ≤ max_order`.
    pub fn random_symmetric(space: &FockSpace, max_order: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Self::new(space.grid().clone(), max_order);
        let nm = space.n_max();
        for m in 0..=nm.min(max_order) {
            for n in 0..=nm.min(max_order - m) {
                let raw: Vec<C64> = (0..space.dim(m + n))
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                t.insert(m, n, project_groups(space, m, n, &raw)?)?;
            }
        }
        Ok(t)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut t = self.clone();
        for v in t.entries.values_mut() {
            v.iter_mut().for_each(|x| *x *= c);
        }
        t
    }

    /// Entrywise sum over the union of orders.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("tables live on different grids".into()));
        }
        let mut t = Self::new(self.grid.clone(), self.max_order.max(other.max_order));
        t.entries = self.entries.clone();
        for (k, v) in &other.entries {
            let e = t.entries.entry(*k).or_insert_with(|| vec![C64::new(0.0, 0.0); v.len()]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(t)
    }

    /// Largest entrywise difference over the union of orders, relative to
    /// the largest entry of either table.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.entries.keys().chain(other.entries.keys()).collect();
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &(m, n) in keys {
            let a = self.get(m, n);
            let b = other.get(m, n);
            let len = a.or(b).map(|v| v.len()).unwrap_or(0);
            for k in 0..len {
                let x = a.map(|v| v[k]).unwrap_or_default();
                let y = b.map(|v| v[k]).unwrap_or_default();
                diff = diff.max((x - y).norm());
                scale = scale.max(x.norm()).max(y.norm());
            }
        }
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    /// Weighted norm of each order, `(Σ W |f_mn|²)^{1/2}`.
    pub fn order_norms(&self) -> BTreeMap<(usize, usize), f64> {
        let nn = self.grid.len();
        let w = self.grid.weights();
        self.entries
            .iter()
            .map(|(&(m, n), v)| {
                let r = m + n;
                let s = par::sum(v.len(), |k| {
                    let mut d = [0usize; 16];
                    decode(k, nn, &mut d[..r]);
                    d[..r].iter().map(|&i| w[i]).product::<f64>() * v[k].norm_sqr()
                });
                ((m, n), s.sqrt())
            })
            .collect()
    }
}

/// Project a raw `(m, n)` coefficient onto S-symmetry in each group.
pub fn project_groups(space: &FockSpace, m: usize, n: usize, raw: &[C64]) -> Result<Vec<C64>> {
    let nn = space.n();
    let t = symmetrizer::symmetrize_block(space, raw, Block { pre: 1, rank: m, post: dim(nn, n) }, Convention::Standard)?;
    symmetrizer::symmetrize_block(space, &t, Block { pre: dim(nn, m), rank: n, post: 1 }, Convention::Standard)
}

/// Build the operator of a coefficient table. Orders with `m` or `n` above
/// `N_max` act as zero on the truncated space and are skipped.
pub fn assemble(table: &CoefficientTable, space: &Arc<FockSpace>) -> Result<FockOperator> {
    if table.max_order > 2 * space.n_max() {
        return Err(Error::Dimension(format!(
            "max order {} exceeds 2 N_max = {}",
            table.max_order,
            2 * space.n_max()
        )));
    }
    if &table.grid != space.grid() {
        return Err(Error::ShapeMismatch("table grid differs from the Fock space grid".into()));
    }
    let mut monomials = Vec::new();
    for (&(m, n), v) in &table.entries {
        if m > space.n_max() || n > space.n_max() {
            continue;
        }
        monomials.push(Monomial::new(space, m, n, Side::Left, v.clone())?);
    }
    Ok(FockOperator::from_monomials(space, monomials))
}

/// `z†(J_1)…z†(J_n) Ω`.
fn basis_state(space: &Arc<FockSpace>, j: &[usize]) -> FockState {
    j.iter().rev().fold(FockState::vacuum(space), |s, &i| s.create(i))
}

/// Permutation sorting `l` into non-increasing order, as source slots.
fn descending_order(l: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..l.len()).collect();
    idx.sort_by(|&a, &b| l[b].cmp(&l[a]).then(a.cmp(&b)));
    idx
}

/// Spread values known at descending `η` tuples to every `η` tuple, using
/// `f(·; L) = Π S(θ_{L_b} − θ_{L_a}) f(·; L∘π)` with `π` sorting `L` downwards.
fn fill_eta_group(space: &FockSpace, n: usize, m: usize, known: &BTreeMap<Vec<usize>, Vec<C64>>) -> Vec<C64> {
    let nn = space.n();
    let (dm, dn) = (dim(nn, m), dim(nn, n));
    let mut out = vec![C64::new(0.0, 0.0); dm * dn];
    let mut l = vec![0usize; n];
    for e in 0..dn {
        decode(e, nn, &mut l);
        let perm = descending_order(&l);
        let sorted: Vec<usize> = perm.iter().map(|&p| l[p]).collect();
        let Some(col) = known.get(&sorted) else { continue };
        let mut inv = vec![0; n];
        for (pos, &p) in perm.iter().enumerate() {
            inv[p] = pos;
        }
        let mut f = C64::new(1.0, 0.0);
        for a in 0..n {
            for b in a + 1..n {
                if inv[a] > inv[b] {
                    f *= space.s(l[b], l[a]);
                }
            }
        }
        for t in 0..dm {
            out[t * dn + e] = f * col[t];
        }
    }
    out
}

/// Reconstruct the coefficient table of an operator for any scattering
/// function by a triangular solve: acting on `e_J = z†(J_1)…z†(J_n)Ω`, the
/// orders `(m', n')` with `n' > n` vanish, those with `n' < n` are already
/// known, and the remainder determines `f_mn(θ; rev J) = √m! · ((A − A_{<n}) e_J)_m(θ)`.
/// Exact on the orders `m, n ≤ N_max`.
pub fn extract(a: &FockOperator) -> Result<CoefficientTable> {
    let space = a.space().clone();
    let nm = space.n_max();
    let mut table = CoefficientTable::new(space.grid().clone(), 2 * nm);
    let degenerate = space.s_at_zero().re < 0.0;
    for n in 0..=nm {
        let lower = assemble(&table, &space)?;
        let tuples: Vec<Vec<usize>> = sorted_tuples(space.n(), n)
            .into_iter()
            .filter(|t| !(degenerate && t.windows(2).any(|w| w[0] == w[1])))
            .collect();
        let columns: Vec<Result<(Vec<usize>, FockState)>> = par::map(tuples.len(), |k| {
            let j = &tuples[k];
            let e = basis_state(&space, j);
            let rem = a.apply(&e)?.sub(&lower.apply(&e)?);
            let mut rev = j.clone();
            rev.reverse();
            Ok((rev, rem))
        });
        let columns: Vec<(Vec<usize>, FockState)> = columns.into_iter().collect::<Result<_>>()?;
        for m in 0..=nm {
            let sm = factorial(m).sqrt();
            let known: BTreeMap<Vec<usize>, Vec<C64>> = columns
                .iter()
                .map(|(rev, rem)| (rev.clone(), rem.sector(m).iter().map(|v| v * sm).collect()))
                .collect();
            let values = fill_eta_group(&space, n, m, &known);
            if values.iter().any(|v| *v != C64::new(0.0, 0.0)) {
                table.insert(m, n, values)?;
            }
        }
    }
    Ok(table)
}

/// Free-field extraction by nested commutators,
/// `f_mn(θ; η) = (−1)^n ⟨Ω, [a(θ_1), … [a(θ_m), [a†(η_1), … [a†(η_n), A]…]] Ω⟩`.
/// Orders with `m + n > 2 N_max − 2` are flagged unreliable.
pub fn extract_free(a: &FockOperator) -> Result<CoefficientTable> {
    let space = a.space().clone();
    if space.scattering().kind() != ModelKind::Free {
        return Err(Error::Model(format!(
            "nested-commutator extraction needs S = 1, model is {}",
            space.scattering().kind()
        )));
    }
    let nm = space.n_max();
    let mut table = CoefficientTable::new(space.grid().clone(), 2 * nm);
    let omega = FockState::vacuum(&space);
    for n in 0..=nm {
        let tuples = sorted_tuples(space.n(), n);
        // C_n(η) Ω = Σ_B (−1)^{n−|B|} a†(η_B) A a†(η_{B^c}) Ω for each sorted η.
        let states: Vec<Result<(Vec<usize>, FockState)>> = par::map(tuples.len(), |k| {
            let eta = &tuples[k];
            let mut acc = FockState::zero(&space);
            for size in 0..=n {
                for b in subsets(n, size) {
                    let inner = (0..n).filter(|i| !b.contains(i)).fold(omega.clone(), |s, i| s.create(eta[i]));
                    let outer = b.iter().fold(a.apply(&inner)?, |s, &i| s.create(eta[i]));
                    let sign = if (n - size) % 2 == 0 { 1.0 } else { -1.0 };
                    acc.axpy(C64::new(sign, 0.0), &outer);
                }
            }
            Ok((eta.clone(), acc))
        });
        let states: Vec<(Vec<usize>, FockState)> = states.into_iter().collect::<Result<_>>()?;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for m in 0..=nm {
            let sm = factorial(m).sqrt() * sign;
            let known: BTreeMap<Vec<usize>, Vec<C64>> = states
                .iter()
                .map(|(eta, st)| {
                    let mut key = eta.clone();
                    key.reverse();
                    (key, st.sector(m).iter().map(|v| v * sm).collect())
                })
                .collect();
            let values = fill_eta_group(&space, n, m, &known);
            if values.iter().any(|v| *v != C64::new(0.0, 0.0)) {
                table.insert(m, n, values)?;
                if m + n + 2 > 2 * nm {
                    table.unreliable.push((m, n));
                }
            }
        }
    }
    Ok(table)
}

/// Deviation from the coefficient reality condition of a self-adjoint
/// operator, `f_nm(η; θ) = conj f_mn(rev θ; rev η)`, relative to the largest
/// coefficient. With `anti = true` the condition is `f_nm = −conj f_mn`.
pub fn reality_deviation(table: &CoefficientTable, anti: bool) -> f64 {
    let nn = table.grid.len();
    let sign = if anti { -1.0 } else { 1.0 };
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (&(m, n), f) in &table.entries {
        let (dm, dn) = (dim(nn, m), dim(nn, n));
        let g = table.get(n, m);
        let mut th = vec![0usize; m];
        let mut et = vec![0usize; n];
        for a in 0..dm {
            decode(a, nn, &mut th);
            th.reverse();
            let ra = encode(&th, nn);
            for b in 0..dn {
                decode(b, nn, &mut et);
                et.reverse();
                let rb = encode(&et, nn);
                let want = f[ra * dn + rb].conj() * sign;
                let have = g.map(|v| v[b * dm + a]).unwrap_or_default();
                diff = diff.max((have - want).norm());
                scale = scale.max(want.norm());
            }
        }
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
