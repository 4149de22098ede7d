//! Rapidity kinematics, scattering functions and causal regions.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64, I};

/// Denominator magnitude below which `S` is treated as sitting on a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Free,
    Ising,
    SinhGordon,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "free" => Ok(Self::Free),
            "ising" => Ok(Self::Ising),
            "sinh_gordon" | "sinhgordon" => Ok(Self::SinhGordon),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Free => "free",
            Self::Ising => "ising",
            Self::SinhGordon => "sinh_gordon",
        })
    }
}

/// Mass, coupling and model selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mass: f64,
    /// Only read for sinh-Gordon, where it must lie in `(0, π)`.
    pub coupling: f64,
    pub kind: ModelKind,
}

impl ModelParams {
    pub fn new(kind: ModelKind, mass: f64, coupling: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if kind == ModelKind::SinhGordon && !(coupling > 0.0 && coupling < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "sinh-Gordon coupling must lie in (0, pi), got {coupling}"
            )));
        }
        Ok(Self { mass, coupling, kind })
    }

    pub fn free(mass: f64) -> Self {
        Self::new(ModelKind::Free, mass, 0.0).expect("valid mass")
    }

    pub fn ising(mass: f64) -> Self {
        Self::new(ModelKind::Ising, mass, 0.0).expect("valid mass")
    }

    pub fn sinh_gordon(mass: f64, b: f64) -> Result<Self> {
        Self::new(ModelKind::SinhGordon, mass, b)
    }
}

/// `p(θ) = μ (cosh θ, sinh θ)`.
pub fn two_momentum(theta: f64, params: &ModelParams) -> (f64, f64) {
    (params.mass * theta.cosh(), params.mass * theta.sinh())
}

/// The two-particle scattering function of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringFunction {
    pub params: ModelParams,
}

impl ScatteringFunction {
    pub fn new(params: ModelParams) -> Self {
        Self { params }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind
    }

    pub fn is_constant(&self) -> bool {
        self.params.kind != ModelKind::SinhGordon
    }

    /// `S(ζ)` at a complex rapidity difference.
    pub fn eval(&self, zeta: C64) -> Result<C64> {
        match self.params.kind {
            ModelKind::Free => Ok(C64::new(1.0, 0.0)),
            ModelKind::Ising => Ok(C64::new(-1.0, 0.0)),
            ModelKind::SinhGordon => {
                let sb = self.params.coupling.sin();
                let sh = zeta.sinh();
                let den = sh + I * sb;
                if den.norm() < POLE_THRESHOLD {
                    return Err(Error::Pole(format!("S has a pole at zeta = {zeta}")));
                }
                Ok((sh - I * sb) / den)
            }
        }
    }

    /// `S(θ)` at a real argument. Never hits a pole since `sin b > 0`.
    pub fn eval_real(&self, theta: f64) -> C64 {
        match self.params.kind {
            ModelKind::Free => C64::new(1.0, 0.0),
            ModelKind::Ising => C64::new(-1.0, 0.0),
            ModelKind::SinhGordon => {
                let sb = self.params.coupling.sin();
                let sh = theta.sinh();
                C64::new(sh, -sb) / C64::new(sh, sb)
            }
        }
    }
}

/// Free function form of [`ScatteringFunction::eval`].
pub fn s_eval(s: &ScatteringFunction, zeta: C64) -> Result<C64> {
    s.eval(zeta)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub const ORIGIN: Self = Self { t: 0.0, x: 0.0 };

    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// Minkowski product with signature (+,-).
    pub fn dot(&self, other: &Self) -> f64 {
        self.t * other.t - self.x * other.x
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.t - other.t, self.x - other.x)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.t + other.t, self.x + other.x)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.t, -self.x)
    }
}

/// `p(θ)·x` with signature (+,-).
pub fn momentum_dot(theta: f64, params: &ModelParams, x: &SpacetimePoint) -> f64 {
    let (p0, p1) = two_momentum(theta, params);
    p0 * x.t - p1 * x.x
}

pub fn is_spacelike(x: &SpacetimePoint, y: &SpacetimePoint) -> bool {
    let d = x.sub(y);
    d.dot(&d) < 0.0
}

/// `x` is spacelike to `y` and lies to its left.
pub fn is_spacelike_left(x: &SpacetimePoint, y: &SpacetimePoint) -> bool {
    is_spacelike(x, y) && x.x < y.x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `{x : x¹ − a¹ > |x⁰ − a⁰|}`.
    RightWedge { apex: SpacetimePoint },
    /// `{x : a¹ − x¹ > |x⁰ − a⁰|}`.
    LeftWedge { apex: SpacetimePoint },
    /// `{x : |x⁰| + |x¹| < r}`.
    DoubleCone { radius: f64 },
}

impl Region {
    pub fn double_cone(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("double cone radius must be positive, got {radius}")));
        }
        Ok(Self::DoubleCone { radius })
    }

    pub fn contains(&self, p: &SpacetimePoint) -> bool {
        match *self {
            Region::RightWedge { apex } => p.x - apex.x > (p.t - apex.t).abs(),
            Region::LeftWedge { apex } => apex.x - p.x > (p.t - apex.t).abs(),
            Region::DoubleCone { radius } => p.t.abs() + p.x.abs() < radius,
        }
    }

    /// Whether the closed rectangle `center ± half_widths` lies inside the region.
    pub fn contains_rectangle(&self, center: &SpacetimePoint, half_widths: (f64, f64)) -> bool {
        let (ht, hx) = half_widths;
        [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
            .iter()
            .all(|&(a, b)| self.contains(&SpacetimePoint::new(center.t + a * ht, center.x + b * hx)))
    }
}

pub fn region_contains(region: &Region, p: &SpacetimePoint) -> bool {
    region.contains(p)
}
