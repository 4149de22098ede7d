//! Smeared fields `φ(f)`, `φ′(f)` and the commutator-norm harness.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fock::{FockOperator, FockSpace, FockState, Monomial, RapidityGrid, Side};
use crate::kinematics::{two_momentum, ModelParams, Region, SpacetimePoint};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result, C64};

/// Default Gauss-Legendre nodes per spacetime direction.
pub const DEFAULT_TRANSFORM_NODES: usize = 64;

/// `exp(−1/(1−u²))` on `|u| < 1`, zero outside.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Product bump `b((t−t₀)/h_t) · b((x−x₀)/h_x)` supported on the rectangle
/// `center ± half_widths`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction2D {
    pub center: SpacetimePoint,
    pub half_widths: (f64, f64),
}

impl TestFunction2D {
    pub fn new(center: SpacetimePoint, half_widths: (f64, f64)) -> Result<Self> {
        if !(half_widths.0 > 0.0 && half_widths.1 > 0.0) {
            return Err(Error::InvalidParameter(format!("half widths must be positive, got {half_widths:?}")));
        }
        Ok(Self { center, half_widths })
    }

    pub fn eval(&self, p: &SpacetimePoint) -> f64 {
        bump((p.t - self.center.t) / self.half_widths.0) * bump((p.x - self.center.x) / self.half_widths.1)
    }

    pub fn translated(&self, a: &SpacetimePoint) -> Self {
        Self { center: self.center.add(a), half_widths: self.half_widths }
    }

    /// `f ∘ (−id)`.
    pub fn point_reflected(&self) -> Self {
        Self { center: self.center.neg(), half_widths: self.half_widths }
    }

    pub fn supported_in(&self, region: &Region) -> bool {
        region.contains_rectangle(&self.center, self.half_widths)
    }
}

/// `f̃^±(θ) = ∫ f(x) e^{±i p(θ)·x} d²x` on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTransformPair {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

pub fn transform_pair(f: &TestFunction2D, grid: &RapidityGrid, params: &ModelParams) -> FieldTransformPair {
    transform_pair_with_nodes(f, grid, params, DEFAULT_TRANSFORM_NODES)
}

/// Tensor-product Gauss-Legendre rule over the support rectangle. The bump
/// is a product, so the double sum factorizes into two one-dimensional sums.
pub fn transform_pair_with_nodes(f: &TestFunction2D, grid: &RapidityGrid, params: &ModelParams, nodes: usize) -> FieldTransformPair {
    let (u, w) = gauss_legendre(nodes);
    let (ht, hx) = f.half_widths;
    let profile: Vec<f64> = u.iter().zip(&w).map(|(&ui, &wi)| wi * bump(ui)).collect();
    let one_dim = |k: f64, c: f64, h: f64| -> C64 {
        u.iter()
            .zip(&profile)
            .map(|(&ui, &pi)| C64::from_polar(pi * h, k * (c + h * ui)))
            .fold(C64::new(0.0, 0.0), |a, b| a + b)
    };
    let mut plus = Vec::with_capacity(grid.len());
    let mut minus = Vec::with_capacity(grid.len());
    for &theta in grid.points() {
        let (p0, p1) = two_momentum(theta, params);
        plus.push(one_dim(p0, f.center.t, ht) * one_dim(-p1, f.center.x, hx));
        minus.push(one_dim(-p0, f.center.t, ht) * one_dim(p1, f.center.x, hx));
    }
    FieldTransformPair { plus, minus }
}

fn field_from_pair(space: &Arc<FockSpace>, pair: &FieldTransformPair, side: Side) -> Result<FockOperator> {
    let create = Monomial::new(space, 1, 0, side, pair.plus.clone())?;
    let annihilate = Monomial::new(space, 0, 1, side, pair.minus.clone())?;
    Ok(FockOperator::from_monomials(space, vec![create, annihilate]))
}

/// `φ(f) = Σ_i w_i (f̃⁺(θ_i) z†(θ_i) + f̃⁻(θ_i) z(θ_i))`.
pub fn smeared_field(f: &TestFunction2D, space: &Arc<FockSpace>) -> Result<FockOperator> {
    let pair = transform_pair(f, space.grid(), &space.scattering().params);
    field_from_pair(space, &pair, Side::Left)
}

/// `φ′(f) = Σ_i w_i (f̃⁺(θ_i) z′†(θ_i) + f̃⁻(θ_i) z′(θ_i))` for real `f`,
/// built directly from the primed operators.
pub fn smeared_field_prime(f: &TestFunction2D, space: &Arc<FockSpace>) -> Result<FockOperator> {
    let pair = transform_pair(f, space.grid(), &space.scattering().params);
    field_from_pair(space, &pair, Side::Right)
}

/// `φ′(f) = J φ(f ∘ (−id)) J`.
pub fn smeared_field_prime_by_reflection(f: &TestFunction2D, space: &Arc<FockSpace>) -> Result<FockOperator> {
    Ok(smeared_field(&f.point_reflected(), space)?.reflected())
}

/// Restricted norms entering a relative commutator norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// `‖[A,B]‖ / (‖A‖ ‖B‖)`, all restricted to input sectors `≤ L`.
    pub relative_norm: f64,
    pub commutator_norm: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    /// Norm of single-creation images discarded by the truncation while
    /// evaluating the commutator on its top singular vector, relative to
    /// `‖A‖ ‖B‖`.
    pub dropped_norm: f64,
}

const POWER_ITERATIONS: usize = 40;
const POWER_TOLERANCE: f64 = 1e-7;
const POWER_SEED: u64 = 0x5eed_c0de;

/// Top singular value of `P_{≤N} X P_{≤L}` by power iteration on `X†X`,
/// with the top singular vector and the squared dropped norm of `X v`.
pub fn restricted_norm(x: &FockOperator, sector_limit: usize) -> Result<(f64, FockState, f64)> {
    let space = x.space();
    let xd = x.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = FockState::random_with(space, sector_limit, &mut rng)?;
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let u = x.apply(&v)?;
        let s_new = u.norm();
        if s_new == 0.0 {
            return Ok((0.0, v, 0.0));
        }
        let w = xd.apply_limited(&u, sector_limit)?;
        let nw = w.norm();
        if nw == 0.0 {
            sigma = s_new;
            break;
        }
        let converged = (s_new - sigma).abs() <= POWER_TOLERANCE * s_new;
        sigma = s_new;
        v = w.scaled(C64::new(1.0 / nw, 0.0));
        if converged {
            break;
        }
    }
    let mut dropped = 0.0;
    let u = x.apply_tracked(&v, space.n_max(), &mut dropped)?;
    Ok((sigma.max(u.norm()), v, dropped))
}

/// `‖[A,B]‖ / (‖A‖ ‖B‖)` on input sectors `≤ sector_limit`.
pub fn relative_commutator_norm(a: &FockOperator, b: &FockOperator, sector_limit: usize) -> Result<CommutatorReport> {
    let space = a.space();
    space.check_same(b.space())?;
    if sector_limit + 2 > space.n_max() {
        return Err(Error::Dimension(format!(
            "sector limit {sector_limit} needs N_max >= {}, have {}",
            sector_limit + 2,
            space.n_max()
        )));
    }
    let c = a.commutator(b)?;
    let (nc, _, dropped) = restricted_norm(&c, sector_limit)?;
    let (na, _, _) = restricted_norm(a, sector_limit)?;
    let (nb, _, _) = restricted_norm(b, sector_limit)?;
    let denom = na * nb;
    if denom == 0.0 {
        return Err(Error::Evaluation("operator with zero restricted norm".into()));
    }
    Ok(CommutatorReport {
        relative_norm: nc / denom,
        commutator_norm: nc,
        norm_a: na,
        norm_b: nb,
        dropped_norm: dropped.sqrt() / denom,
    })
}

/// Geometries used by the locality studies. `r` is the half width of the
/// square supports, `tau` a time offset that keeps the configuration from
/// being mirror symmetric.
pub mod geometry {
    use super::*;

    /// Two bumps whose supports are spacelike separated by a margin `d`:
    /// `f` at `(0, −x₀)`, `g` at `(τ, x₀)` with `x₀ = (d + 4r + |τ|)/2`.
    pub fn spacelike_pair(r: f64, d: f64, tau: f64) -> Result<(TestFunction2D, TestFunction2D)> {
        let x0 = 0.5 * (d + 4.0 * r + tau.abs());
        Ok((
            TestFunction2D::new(SpacetimePoint::new(0.0, -x0), (r, r))?,
            TestFunction2D::new(SpacetimePoint::new(tau, x0), (r, r))?,
        ))
    }

    /// A bump of half width `r` with time center `tau` inside the left
    /// wedge with apex `(0, −a)`.
    pub fn in_left_wedge(a: f64, r: f64, tau: f64) -> Result<TestFunction2D> {
        TestFunction2D::new(SpacetimePoint::new(tau, -(a + 2.0 * r + tau.abs())), (r, r))
    }

    /// A bump of half width `r` with time center `tau` inside the right
    /// wedge with apex `(0, a)`.
    pub fn in_right_wedge(a: f64, r: f64, tau: f64) -> Result<TestFunction2D> {
        TestFunction2D::new(SpacetimePoint::new(tau, a + 2.0 * r + tau.abs()), (r, r))
    }

    /// `f` in `W′_{(0,−d/2)}` and `g` in `W_{(0,d/2)}`, wedge apexes `d` apart.
    pub fn wedge_pair(r: f64, d: f64, tau: f64) -> Result<(TestFunction2D, TestFunction2D)> {
        Ok((in_left_wedge(0.5 * d, r, 0.0)?, in_right_wedge(0.5 * d, r, tau)?))
    }
}
