//! Explicit local observables of the massive Ising model (`S = −1`): the
//! even family `F_2 = sinh((ζ₁−ζ₂)/2) g̃(μE)`, the odd family built from
//! `tanh` pairings, their operators and the locality battery.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expansion::{assemble, project_groups, reality_deviation, CoefficientTable};
use crate::fields::{geometry, relative_commutator_norm, restricted_norm, smeared_field, smeared_field_prime, TestFunction2D};
use crate::fock::tensor::{decode, dim, factorial, permutation_sign, permutations};
use crate::fock::{FockOperator, FockSpace};
use crate::formfactor::FormFactorFamily;
use crate::kinematics::{ModelKind, ModelParams, ScatteringFunction, SpacetimePoint};
use crate::quadrature::gauss_legendre;
use crate::{par, Error, Result, C64, I};

/// Gauss-Legendre nodes of the default 1D transform.
pub const DEFAULT_BUMP_NODES: usize = 128;
/// Imaginary offset of the principal-value average at coincident rapidities.
pub const DEFAULT_EPSILON: f64 = 1e-3;

const TANH_POLE_THRESHOLD: f64 = 1e-12;

/// Normalised bump `g(x) ∝ exp(−1/(1−(x/r)²))` on `[−r, r]` with its
/// transform `g̃(w) = ∫ g(x) e^{iwx} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction1D {
    radius: f64,
    nodes: Vec<f64>,
    /// Quadrature weights times `g`, scaled so that they sum to one.
    coeffs: Vec<f64>,
    norm: f64,
}

impl TestFunction1D {
    pub fn new(radius: f64) -> Result<Self> {
        Self::with_nodes(radius, DEFAULT_BUMP_NODES)
    }

    pub fn with_nodes(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("bump radius must be positive, got {radius}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("bump needs at least one quadrature node".into()));
        }
        let (u, w) = gauss_legendre(n);
        let raw: Vec<f64> = u.iter().zip(&w).map(|(&u, &w)| w * radius * crate::fields::bump(u)).collect();
        let total: f64 = raw.iter().sum();
        Ok(Self {
            radius,
            nodes: u.iter().map(|&u| u * radius).collect(),
            coeffs: raw.iter().map(|c| c / total).collect(),
            norm: total,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Normalised profile, unit integral.
    pub fn eval(&self, x: f64) -> f64 {
        crate::fields::bump(x / self.radius) / self.norm
    }

    pub fn transform(&self, w: C64) -> C64 {
        self.nodes.iter().zip(&self.coeffs).map(|(&x, &c)| c * (I * w * x).exp()).sum()
    }
}

pub fn gtilde(g: &TestFunction1D, w: C64) -> C64 {
    g.transform(w)
}

/// `E(ζ) = Σ_j cosh ζ_j`.
pub fn total_energy(zeta: &[C64]) -> C64 {
    zeta.iter().map(|z| z.cosh()).sum()
}

fn ising_s(mass: f64) -> ScatteringFunction {
    ScatteringFunction::new(ModelParams::ising(mass))
}

/// `F_2(ζ₁, ζ₂) = sinh((ζ₁−ζ₂)/2) g̃(μE(ζ))`, every other member zero.
pub fn even_family(g: &TestFunction1D, mass: f64) -> FormFactorFamily {
    let g = Arc::new(g.clone());
    FormFactorFamily::new("ising_even", ising_s(mass), g.radius()).with_member(
        2,
        Arc::new(move |z: &[C64]| Ok(((z[0] - z[1]) / 2.0).sinh() * g.transform(mass * total_energy(z)))),
    )
}

/// `F_{2k+1}(ζ) = g̃(μE(ζ)) / ((4πi)^k k!) · Σ_σ sign σ Π_j tanh((ζ_{σ(2j−1)} − ζ_{σ(2j)})/2)`
/// for `k ≤ k_max`, every even member zero.
pub fn odd_family(g: &TestFunction1D, mass: f64, k_max: usize) -> FormFactorFamily {
    let g = Arc::new(g.clone());
    let mut fam = FormFactorFamily::new("ising_odd", ising_s(mass), g.radius());
    for k in 0..=k_max {
        let order = 2 * k + 1;
        let prefactor = 1.0 / ((4.0 * PI * I).powu(k as u32) * factorial(k));
        let g = g.clone();
        fam = fam
            .with_member(order, Arc::new(move |z: &[C64]| Ok(prefactor * g.transform(mass * total_energy(z)) * pfaffian_sum(z)?)))
            .with_all_pair_poles(order);
    }
    fam
}

fn half_tanh(a: C64, b: C64) -> Result<C64> {
    let h = (a - b) / 2.0;
    let c = h.cosh();
    if c.norm() < TANH_POLE_THRESHOLD {
        return Err(Error::Pole(format!("tanh pole at ζ_a − ζ_b = {}", a - b)));
    }
    Ok(h.sinh() / c)
}

/// `Σ_{σ ∈ 𝔖_{2k+1}} sign σ Π_{j=1}^k tanh((ζ_{σ(2j−1)} − ζ_{σ(2j)})/2)` by
/// direct enumeration.
pub fn permutation_sum_brute(zeta: &[C64]) -> Result<C64> {
    let n = zeta.len();
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("permutation sum needs an odd count, got {n}")));
    }
    let mut t = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                t[a * n + b] = half_tanh(zeta[a], zeta[b])?;
            }
        }
    }
    let mut acc = C64::new(0.0, 0.0);
    for p in permutations(n) {
        let mut prod = C64::new(permutation_sign(&p), 0.0);
        for j in 0..n / 2 {
            prod *= t[p[2 * j] * n + p[2 * j + 1]];
        }
        acc += prod;
    }
    Ok(acc)
}

/// The same sum through Pfaffians: `2^k k! Σ_u (−1)^{u−1} Pf(M without u)`
/// with `M_ab = tanh((ζ_a − ζ_b)/2)` and `u` the unpaired index (1-based).
pub fn pfaffian_sum(zeta: &[C64]) -> Result<C64> {
    let n = zeta.len();
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("permutation sum needs an odd count, got {n}")));
    }
    let k = n / 2;
    let mut t = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in a + 1..n {
            let v = half_tanh(zeta[a], zeta[b])?;
            t[a * n + b] = v;
            t[b * n + a] = -v;
        }
    }
    let m = n - 1;
    let mut acc = C64::new(0.0, 0.0);
    let mut minor = vec![C64::new(0.0, 0.0); m * m];
    for u in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&i| i != u).collect();
        for (i, &a) in keep.iter().enumerate() {
            for (j, &b) in keep.iter().enumerate() {
                minor[i * m + j] = t[a * n + b];
            }
        }
        let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * pfaffian(&mut minor.clone(), m);
    }
    Ok(acc * (2f64.powi(k as i32) * factorial(k)))
}

/// Pfaffian of an antisymmetric `n × n` row-major matrix by Parlett-Reid
/// elimination with partial pivoting. The matrix is overwritten.
pub fn pfaffian(a: &mut [C64], n: usize) -> C64 {
    if n % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    let mut pf = C64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let kp = (k + 1..n).max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm())).unwrap();
        if kp != k + 1 {
            for c in 0..n {
                a.swap((k + 1) * n + c, kp * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k + 1, r * n + kp);
            }
            pf = -pf;
        }
        let piv = a[k * n + k + 1];
        if piv == C64::new(0.0, 0.0) {
            return C64::new(0.0, 0.0);
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<C64> = (k + 2..n).map(|j| a[k * n + j] / piv).collect();
            let col: Vec<C64> = (k + 2..n).map(|i| a[i * n + k + 1]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[i * n + j] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Even,
    Odd,
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "even" => Ok(Self::Even),
            "odd" => Ok(Self::Odd),
            other => Err(Error::InvalidParameter(format!("unknown sector '{other}'"))),
        }
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Even => "even",
            Self::Odd => "odd",
        })
    }
}

/// How boundary values are taken where a declared pole meets the real
/// boundary (`θ_a = η_b` after the `iπ` shift).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[derive(Default)]
pub enum Prescription {
    /// Average of `F` over `θ_a ± iε` at coincidences, plain samples
    /// elsewhere: the principal value only.
    PrincipalValue { epsilon: f64 },
    /// The one-sided limit `θ + i0, η + iπ − i0` as a grid distribution.
    /// Near each pole `F = G/(θ_a − η_b + i0)`; the diagonal carries only
    /// the `−iπ δ` part with `G = −c_ab F_{k−2}(ζ̂)` from the residue
    /// relation, and the first off-diagonals are scaled by 3/2, which turns
    /// the punctured trapezoid sum of `G/(θ − η)` into a centred-difference
    /// corrected principal value rule.
    #[default]
    OneSided,
}


/// `−(1/2πi) Π_{j=a}^{b} S(ζ_j − ζ_a) (1 − Π_p S(ζ_a − ζ_p))` (0-based
/// slots) at the pole point `ζ_b = ζ_a + iπ`.
fn residue_factor(fam: &FormFactorFamily, z: &[C64], a: usize, b: usize) -> Result<C64> {
    let mut z = z.to_vec();
    z[b] = z[a] + I * PI;
    let mut first = C64::new(1.0, 0.0);
    for zj in &z[a..=b] {
        first *= fam.s.eval(zj - z[a])?;
    }
    let mut second = C64::new(1.0, 0.0);
    for zp in &z {
        second *= fam.s.eval(z[a] - zp)?;
    }
    Ok(-first * (C64::new(1.0, 0.0) - second) / (2.0 * PI * I))
}

/// A θ slot `a` and an η slot `b` on a common declared pole whose grid
/// indices differ by `m = j − i`.
#[derive(Debug, Clone, Copy)]
struct NearPair {
    a: usize,
    b: usize,
    m: i64,
    /// Grid weight of the θ node, used by the discrete delta.
    weight: f64,
}

/// Kernel value at `z` with the listed pairs treated by the prescription.
fn near_value(fam: &FormFactorFamily, z: &[C64], near: &[NearPair], prescription: Prescription) -> Result<C64> {
    let Some((&p, rest)) = near.split_first() else {
        return fam.eval(z);
    };
    match prescription {
        Prescription::PrincipalValue { epsilon } => {
            if p.m != 0 {
                return near_value(fam, z, rest, prescription);
            }
            // Diagonal pairs sharing a slot nest their shifts; distinct powers
            // of two keep any signed sum of them away from zero.
            let later = rest.iter().filter(|q| q.a == p.a && q.m == 0).count() as i32;
            let eps = epsilon * 2f64.powi(later);
            let mut shifted = z.to_vec();
            shifted[p.a] = z[p.a] + I * eps;
            let up = near_value(fam, &shifted, rest, prescription)?;
            shifted[p.a] = z[p.a] - I * eps;
            Ok(0.5 * (up + near_value(fam, &shifted, rest, prescription)?))
        }
        Prescription::OneSided => match p.m {
            0 => {
                let hat: Vec<C64> = z.iter().enumerate().filter(|&(i, _)| i != p.a && i != p.b).map(|(_, v)| *v).collect();
                let renumber = |s: usize| s - usize::from(s > p.a) - usize::from(s > p.b);
                let rest_hat: Vec<NearPair> = rest
                    .iter()
                    .filter(|q| q.a != p.a && q.b != p.b)
                    .map(|q| NearPair { a: renumber(q.a), b: renumber(q.b), ..*q })
                    .collect();
                let g = -residue_factor(fam, z, p.a, p.b)? * near_value(fam, &hat, &rest_hat, prescription)?;
                Ok(-I * PI * g / p.weight)
            }
            1 | -1 => Ok(1.5 * near_value(fam, z, rest, prescription)?),
            _ => near_value(fam, z, rest, prescription),
        },
    }
}

/// Boundary-value table `f_mn(θ; η) = F_{m+n}(θ + i0, η + iπ − i0)` for
/// every member order with `m, n ≤ N_max`. Off the coincidence set this is
/// plain evaluation; at `θ_a = η_b` on a declared pole the prescription
/// decides. Each group is then projected onto S-symmetry, as `assemble`
/// would, so the table is the one the operator sees.
pub fn boundary_table(fam: &FormFactorFamily, space: &FockSpace, prescription: Prescription) -> Result<CoefficientTable> {
    let nm = space.n_max();
    let nn = space.n();
    let orders: Vec<usize> = fam.orders().into_iter().filter(|&k| k <= 2 * nm).collect();
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let mut table = CoefficientTable::new(space.grid().clone(), max_order);
    let theta = space.grid().points();
    let weights = space.grid().weights();
    for &k in &orders {
        for m in k.saturating_sub(nm)..=k.min(nm) {
            let n = k - m;
            let len = dim(nn, k);
            let values: Vec<Result<C64>> = par::map(len, |idx| {
                let mut d = [0usize; 16];
                decode(idx, nn, &mut d[..k]);
                let z: Vec<C64> = (0..k)
                    .map(|s| if s < m { C64::from(theta[d[s]]) } else { C64::new(theta[d[s]], PI) })
                    .collect();
                let reach = match prescription {
                    Prescription::PrincipalValue { .. } => 0,
                    Prescription::OneSided => 1,
                };
                let mut near = Vec::new();
                for a in 0..m {
                    for b in m..k {
                        let dm = d[b] as i64 - d[a] as i64;
                        if dm.abs() <= reach && fam.has_pole_between(k, a + 1, b + 1) {
                            near.push(NearPair { a, b, m: dm, weight: weights[d[a]] });
                        }
                    }
                }
                // Diagonal pairs first: their delta part drops every pair that
                // shares a slot, which keeps the value independent of the
                // listing order and so of the θ/η orientation.
                near.sort_by_key(|p: &NearPair| p.m.abs());
                near_value(fam, &z, &near, prescription)
            });
            let values: Vec<C64> = values.into_iter().collect::<Result<_>>()?;
            table.insert(m, n, project_groups(space, m, n, &values)?)?;
        }
    }
    Ok(table)
}

/// Weighted norm of one `(m, n)` coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderNorm {
    pub m: usize,
    pub n: usize,
    pub norm: f64,
}

/// An assembled Ising observable with its coefficients.
#[derive(Debug, Clone)]
pub struct IsingBuild {
    pub operator: FockOperator,
    pub table: CoefficientTable,
    pub per_order_norms: Vec<OrderNorm>,
}

impl IsingBuild {
    /// `(Σ_{m+n=k} ‖f_mn‖²)^{1/2}` for each total order `k`.
    pub fn total_order_norms(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for o in &self.per_order_norms {
            *out.entry(o.m + o.n).or_insert(0.0) += o.norm * o.norm;
        }
        out.into_iter().map(|(k, v)| (k, f64::sqrt(v))).collect()
    }
}

/// Restricted operator norm of the piece of an observable coming from one
/// form-factor member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberNorm {
    pub order: usize,
    pub operator_norm: f64,
}

impl IsingBuild {
    /// `‖A_k‖` on input sectors `≤ sector_limit`, where `A_k` collects the
    /// coefficients with `m + n = k`. Unlike the coefficient norms these stay
    /// finite under refinement, the discrete delta being a bounded operator.
    pub fn member_operator_norms(&self, sector_limit: usize) -> Result<Vec<MemberNorm>> {
        let space = self.operator.space();
        let orders: std::collections::BTreeSet<usize> = self.table.entries.keys().map(|&(m, n)| m + n).collect();
        orders
            .into_iter()
            .map(|k| {
                let mut piece = CoefficientTable::new(self.table.grid.clone(), k);
                for (&(m, n), v) in self.table.entries.iter().filter(|(&(m, n), _)| m + n == k) {
                    piece.insert(m, n, v.clone())?;
                }
                let (norm, _, _) = restricted_norm(&assemble(&piece, space)?, sector_limit)?;
                Ok(MemberNorm { order: k, operator_norm: norm })
            })
            .collect()
    }
}

fn check_parity(fam: &FormFactorFamily, sector: Sector) -> Result<()> {
    let want = match sector {
        Sector::Even => 0,
        Sector::Odd => 1,
    };
    if let Some(k) = fam.orders().into_iter().find(|k| k % 2 != want) {
        return Err(Error::InvalidParameter(format!("{sector} sector build got a member of order {k}")));
    }
    Ok(())
}

/// Sample the boundary values of a family on the grid and assemble the
/// operator `Σ (1/(m! n!)) ∫ f_mn z†…z† z…z`.
pub fn build_operator(fam: &FormFactorFamily, space: &Arc<FockSpace>, sector: Sector, prescription: Prescription) -> Result<IsingBuild> {
    if space.scattering().kind() != fam.s.kind() {
        return Err(Error::ShapeMismatch(format!(
            "family scatters as {}, Fock space as {}",
            fam.s.kind(),
            space.scattering().kind()
        )));
    }
    check_parity(fam, sector)?;
    let mut table = boundary_table(fam, space, prescription)?;
    table.max_order = table.max_order.min(2 * space.n_max());
    let operator = assemble(&table, space)?;
    let per_order_norms = table.order_norms().into_iter().map(|((m, n), norm)| OrderNorm { m, n, norm }).collect();
    Ok(IsingBuild { operator, table, per_order_norms })
}

/// Support placement for the locality battery of an observable localised in
/// the double cone `|t| + |x| < radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalityGeometry {
    pub radius: f64,
    /// Gap between the double cone and the wedge apexes.
    pub gap: f64,
    /// Half width of the probe supports.
    pub half_width: f64,
    /// Time offset of the probe supports.
    pub tau: f64,
    /// Half width of the probe placed inside the double cone.
    pub inside_half_width: f64,
}

impl LocalityGeometry {
    pub fn new(radius: f64) -> Self {
        Self { radius, gap: 0.5, half_width: 0.3, tau: 0.1, inside_half_width: 0.4 * radius }
    }

    /// Probe in the left wedge with apex `(0, −r−d)`.
    pub fn left_probe(&self) -> Result<TestFunction2D> {
        geometry::in_left_wedge(self.radius + self.gap, self.half_width, self.tau)
    }

    /// Probe in the right wedge with apex `(0, r+d)`.
    pub fn right_probe(&self) -> Result<TestFunction2D> {
        geometry::in_right_wedge(self.radius + self.gap, self.half_width, self.tau)
    }

    /// Probe supported inside the double cone.
    pub fn inside_probe(&self) -> Result<TestFunction2D> {
        TestFunction2D::new(SpacetimePoint::ORIGIN, (self.inside_half_width, self.inside_half_width))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalityNorms {
    /// `[A, φ(f)]` with `f` in the left wedge.
    pub left_field: f64,
    /// `[A, φ′(g)]` with `g` in the right wedge.
    pub right_field: f64,
    /// `[A, φ(h)]` with `h` inside the double cone.
    pub negative_control: f64,
}

/// Relative commutator norms of `A` against the wedge fields and against a
/// field inside its localisation region.
pub fn locality_battery(a: &FockOperator, geom: &LocalityGeometry, sector_limit: usize) -> Result<LocalityNorms> {
    let space = a.space();
    let left = smeared_field(&geom.left_probe()?, space)?;
    let right = smeared_field_prime(&geom.right_probe()?, space)?;
    let inside = smeared_field(&geom.inside_probe()?, space)?;
    Ok(LocalityNorms {
        left_field: relative_commutator_norm(a, &left, sector_limit)?.relative_norm,
        right_field: relative_commutator_norm(a, &right, sector_limit)?.relative_norm,
        negative_control: relative_commutator_norm(a, &inside, sector_limit)?.relative_norm,
    })
}

/// Sensitivity of the principal-value prescription to `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    /// Largest table difference against the smallest `ε`, relative to the
    /// largest coefficient.
    pub max_rel_change: f64,
}

/// Principal-value tables at each `ε` compared with the table at the
/// smallest one. The one-sided rule has no `ε`.
pub fn epsilon_study(fam: &FormFactorFamily, space: &FockSpace, epsilons: &[f64]) -> Result<Vec<EpsilonRow>> {
    let reference_eps = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    if !reference_eps.is_finite() || reference_eps <= 0.0 {
        return Err(Error::InvalidParameter("epsilon study needs positive epsilons".into()));
    }
    let reference = boundary_table(fam, space, Prescription::PrincipalValue { epsilon: reference_eps })?;
    epsilons
        .iter()
        .map(|&epsilon| {
            let t = boundary_table(fam, space, Prescription::PrincipalValue { epsilon })?;
            Ok(EpsilonRow { epsilon, max_rel_change: t.max_rel_diff(&reference) })
        })
        .collect()
}

/// Parameters of one end-to-end Ising build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingRun {
    pub sector: Sector,
    /// Double-cone radius, also the support radius of `g`.
    pub radius: f64,
    #[serde(default)]
    pub k_max: usize,
    #[serde(default = "default_mass")]
    pub mass: f64,
    pub half_range: f64,
    pub points: usize,
    pub n_max: usize,
    /// Input sectors of the commutator norms.
    pub sector_limit: usize,
    #[serde(default)]
    pub prescription: Prescription,
    /// Principal-value offsets of the `ε` study; empty skips it.
    #[serde(default)]
    pub epsilons: Vec<f64>,
}

fn default_mass() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingReport {
    pub sector: Sector,
    pub r: f64,
    pub k_max: usize,
    pub grid: (f64, usize),
    pub n_max: usize,
    pub prescription: Prescription,
    /// Restricted operator norm of each member's piece.
    pub per_order_norms: Vec<MemberNorm>,
    /// Weighted coefficient norms per `(m, n)`.
    pub coefficient_norms: Vec<OrderNorm>,
    pub locality_norms: LocalityNorms,
    pub reality: RealityReport,
    pub epsilon_study: Vec<EpsilonRow>,
}

/// Build the observable of `run`, measure it and return the report with
/// the build.
pub fn run_ising(run: &IsingRun) -> Result<(IsingReport, IsingBuild)> {
    let g = TestFunction1D::new(run.radius)?;
    let params = ModelParams::ising(run.mass);
    let grid = crate::fock::RapidityGrid::symmetric(run.half_range, run.points)?;
    let space = FockSpace::new(grid, run.n_max, ScatteringFunction::new(params))?;
    let fam = match run.sector {
        Sector::Even => even_family(&g, run.mass),
        Sector::Odd => odd_family(&g, run.mass, run.k_max),
    };
    let build = build_operator(&fam, &space, run.sector, run.prescription)?;
    let locality_norms = locality_battery(&build.operator, &LocalityGeometry::new(run.radius), run.sector_limit)?;
    let epsilon_study = if run.epsilons.is_empty() { Vec::new() } else { epsilon_study(&fam, &space, &run.epsilons)? };
    let report = IsingReport {
        sector: run.sector,
        r: run.radius,
        k_max: if run.sector == Sector::Even { 0 } else { run.k_max },
        grid: (run.half_range, run.points),
        n_max: run.n_max,
        prescription: run.prescription,
        per_order_norms: build.member_operator_norms(run.sector_limit)?,
        coefficient_norms: build.per_order_norms.clone(),
        locality_norms,
        reality: reality(&build.table),
        epsilon_study,
    };
    Ok((report, build))
}

/// Deviations from the self-adjoint and anti-self-adjoint coefficient
/// reality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealityReport {
    pub hermitian: f64,
    pub anti_hermitian: f64,
}

pub fn reality(table: &CoefficientTable) -> RealityReport {
    RealityReport { hermitian: reality_deviation(table, false), anti_hermitian: reality_deviation(table, true) }
}

/// The Ising space check shared by the builders.
pub fn require_ising(space: &FockSpace) -> Result<()> {
    if space.scattering().kind() != ModelKind::Ising {
        return Err(Error::Model(format!("Ising observables need S = −1, model is {}", space.scattering().kind())));
    }
    Ok(())
}
