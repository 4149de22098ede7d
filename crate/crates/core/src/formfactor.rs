//! Numerical checks on candidate form-factor families `{F_k}`: exchange
//! symmetry, S-periodicity, residues at `ζ_n − ζ_m = iπ` and a growth probe.

pub mod expr;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kinematics::ScatteringFunction;
use crate::{par, Error, Result, C64, I};

/// Distance kept between random samples and declared pole hyperplanes.
pub const POLE_CLEARANCE: f64 = 0.05;
/// Default radius of the residue contour.
pub const DEFAULT_CONTOUR_RADIUS: f64 = 0.1;
/// Trapezoidal nodes on the residue contour.
pub const CONTOUR_NODES: usize = 64;

const MAX_RESAMPLES: usize = 10_000;

pub type Member = Arc<dyn Fn(&[C64]) -> Result<C64> + Send + Sync>;

/// A pole hyperplane `ζ_b − ζ_a ∈ iπ(2ℤ+1)` of member `k` (1-indexed slots).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleSpec {
    pub k: usize,
    pub a: usize,
    pub b: usize,
}

/// A sequence of meromorphic functions `F_k : ℂ^k → ℂ`. Members that are
/// not present are identically zero.
#[derive(Clone)]
pub struct FormFactorFamily {
    pub name: String,
    pub s: ScatteringFunction,
    pub radius: f64,
    members: BTreeMap<usize, Member>,
    pub declared_poles: Vec<PoleSpec>,
}

impl std::fmt::Debug for FormFactorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormFactorFamily")
            .field("name", &self.name)
            .field("s", &self.s)
            .field("radius", &self.radius)
            .field("members", &self.members.keys().collect::<Vec<_>>())
            .field("declared_poles", &self.declared_poles)
            .finish()
    }
}

impl FormFactorFamily {
    pub fn new(name: impl Into<String>, s: ScatteringFunction, radius: f64) -> Self {
        Self { name: name.into(), s, radius, members: BTreeMap::new(), declared_poles: Vec::new() }
    }

    pub fn with_member(mut self, k: usize, f: Member) -> Self {
        self.members.insert(k, f);
        self
    }

    /// Declare poles on every pair of slots of member `k`.
    pub fn with_all_pair_poles(mut self, k: usize) -> Self {
        for a in 1..=k {
            for b in a + 1..=k {
                self.declared_poles.push(PoleSpec { k, a, b });
            }
        }
        self
    }

    pub fn with_pole(mut self, pole: PoleSpec) -> Self {
        self.declared_poles.push(pole);
        self
    }

    pub fn orders(&self) -> Vec<usize> {
        self.members.keys().copied().collect()
    }

    pub fn has_member(&self, k: usize) -> bool {
        self.members.contains_key(&k)
    }

    pub fn eval(&self, zeta: &[C64]) -> Result<C64> {
        match self.members.get(&zeta.len()) {
            Some(f) => {
                let v = f(zeta)?;
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation(format!("non-finite value of F_{}", zeta.len())))
                }
            }
            None => Ok(C64::new(0.0, 0.0)),
        }
    }

    pub fn poles_of(&self, k: usize) -> impl Iterator<Item = &PoleSpec> {
        self.declared_poles.iter().filter(move |p| p.k == k)
    }

    /// Whether a declared pole of member `k` connects slot `a` and slot `b`.
    pub fn has_pole_between(&self, k: usize, a: usize, b: usize) -> bool {
        self.poles_of(k).any(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }

    /// Distance of `ζ` from the declared pole hyperplanes of its member,
    /// optionally ignoring one pair.
    pub fn pole_distance(&self, zeta: &[C64], skip: Option<(usize, usize)>) -> f64 {
        self.poles_of(zeta.len())
            .filter(|p| skip.is_none_or(|(a, b)| !((p.a == a && p.b == b) || (p.a == b && p.b == a))))
            .map(|p| odd_ipi_distance(zeta[p.b - 1] - zeta[p.a - 1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Distance of `z` from the lattice `iπ(2ℤ+1)`.
pub fn odd_ipi_distance(z: C64) -> f64 {
    let j = ((z.im / PI - 1.0) / 2.0).round();
    (z - I * PI * (2.0 * j + 1.0)).norm()
}

/// Aggregate of one check over random samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub k: usize,
    pub samples: usize,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    pub resampled: usize,
    pub seed: u64,
}

impl CheckReport {
    fn from_errors(check: &str, k: usize, samples: usize, errors: &[f64], resampled: usize, seed: u64) -> Self {
        let max = errors.iter().copied().fold(0.0, f64::max);
        let mean = if errors.is_empty() { 0.0 } else { errors.iter().sum::<f64>() / errors.len() as f64 };
        Self { check: check.into(), k, samples, max_rel_err: max, mean_rel_err: mean, resampled, seed }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

fn rel_err(a: C64, b: C64, floor: f64) -> f64 {
    let d = (a - b).norm();
    let s = a.norm().max(b.norm()).max(floor);
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

fn random_point(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    (0..k).map(|_| C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..PI))).collect()
}

/// Draw a sample and evaluate `measure` on it; samples closer than the
/// clearance to a declared pole, or whose evaluation fails, are redrawn.
fn sampled<F>(fam: &FormFactorFamily, k: usize, n_samples: usize, seed: u64, measure: F) -> Result<(Vec<f64>, usize)>
where
    F: Fn(&[C64]) -> Result<Vec<f64>> + Sync,
{
    if !fam.has_member(k) {
        return Err(Error::Evaluation(format!("family {} has no member F_{k}", fam.name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_samples);
    let mut resampled = 0;
    while points.len() < n_samples {
        let z = random_point(&mut rng, k);
        if fam.pole_distance(&z, None) < POLE_CLEARANCE {
            resampled += 1;
        } else {
            points.push(z);
        }
        if resampled > MAX_RESAMPLES {
            return Err(Error::Evaluation("could not find samples away from the declared poles".into()));
        }
    }
    let results = par::map(points.len(), |i| measure(&points[i]));
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(e) => errors.extend(e),
            Err(Error::Evaluation(_)) | Err(Error::Pole(_)) => {
                resampled += 1;
                let mut tries = 0;
                loop {
                    tries += 1;
                    let z = random_point(&mut rng, k);
                    if fam.pole_distance(&z, None) < POLE_CLEARANCE {
                        resampled += 1;
                        continue;
                    }
                    match measure(&z) {
                        Ok(e) => {
                            errors.extend(e);
                            break;
                        }
                        Err(Error::Evaluation(_)) | Err(Error::Pole(_)) if tries < MAX_RESAMPLES => resampled += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok((errors, resampled))
}

/// `(D(π)F)(ζ) / F(ζ)`-style comparison: returns `F(ζ)` and
/// `Π S(ζ_b − ζ_a) F(ζ∘π)` over the inversions of `π`.
fn permuted_pair(fam: &FormFactorFamily, z: &[C64], perm: &[usize]) -> Result<(C64, C64)> {
    let k = z.len();
    let mut inv = vec![0; k];
    for (pos, &p) in perm.iter().enumerate() {
        inv[p] = pos;
    }
    let mut factor = C64::new(1.0, 0.0);
    for a in 0..k {
        for b in a + 1..k {
            if inv[a] > inv[b] {
                factor *= fam.s.eval(z[b] - z[a])?;
            }
        }
    }
    let zp: Vec<C64> = perm.iter().map(|&p| z[p]).collect();
    Ok((fam.eval(z)?, factor * fam.eval(&zp)?))
}

/// `F_k(…ζ_j, ζ_{j+1}…) = S(ζ_{j+1} − ζ_j) F_k(…ζ_{j+1}, ζ_j…)` for every
/// adjacent transposition.
pub fn check_s_symmetry(fam: &FormFactorFamily, k: usize, n_samples: usize, seed: u64) -> Result<CheckReport> {
    let (errs, res) = sampled(fam, k, n_samples, seed, |z| {
        (0..k.saturating_sub(1))
            .map(|j| {
                let mut perm: Vec<usize> = (0..k).collect();
                perm.swap(j, j + 1);
                let (a, b) = permuted_pair(fam, z, &perm)?;
                Ok(rel_err(a, b, f64::MIN_POSITIVE))
            })
            .collect()
    })?;
    Ok(CheckReport::from_errors("s_symmetry", k, n_samples, &errs, res, seed))
}

/// Exchange symmetry under an arbitrary permutation of the slots.
pub fn check_permutation(fam: &FormFactorFamily, k: usize, perm: &[usize], n_samples: usize, seed: u64) -> Result<CheckReport> {
    if perm.len() != k {
        return Err(Error::InvalidParameter(format!("permutation of {} slots for F_{k}", perm.len())));
    }
    let (errs, res) = sampled(fam, k, n_samples, seed, |z| {
        let (a, b) = permuted_pair(fam, z, perm)?;
        Ok(vec![rel_err(a, b, f64::MIN_POSITIVE)])
    })?;
    Ok(CheckReport::from_errors("permutation", k, n_samples, &errs, res, seed))
}

/// `F_k(…, ζ_j + 2πi, …) = Π_{i≠j} S(ζ_i − ζ_j) F_k(…, ζ_j, …)` for every `j`.
pub fn check_s_periodicity(fam: &FormFactorFamily, k: usize, n_samples: usize, seed: u64) -> Result<CheckReport> {
    let (errs, res) = sampled(fam, k, n_samples, seed, |z| {
        let base = fam.eval(z)?;
        (0..k)
            .map(|j| {
                let mut shifted = z.to_vec();
                shifted[j] += I * (2.0 * PI);
                let lhs = fam.eval(&shifted)?;
                let mut factor = C64::new(1.0, 0.0);
                for i in (0..k).filter(|&i| i != j) {
                    factor *= fam.s.eval(z[i] - z[j])?;
                }
                Ok(rel_err(lhs, factor * base, f64::MIN_POSITIVE))
            })
            .collect()
    })?;
    Ok(CheckReport::from_errors("s_periodicity", k, n_samples, &errs, res, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub k: usize,
    pub pair: (usize, usize),
    pub numerical: [f64; 2],
    pub expected: [f64; 2],
    /// `|numerical − expected|` relative to the larger of both and of the
    /// contour scale `ρ · mean|F_k|`.
    pub rel_err: f64,
}

/// Compare `(1/2πi) ∮ F_k dζ_n` around `ζ_n − ζ_m = iπ` with
/// `−(1/2πi) Π_{j=m}^{n} S(ζ_j − ζ_m) (1 − Π_{p=1}^{k} S(ζ_m − ζ_p)) F_{k−2}(ζ̂)`.
/// Slots are 1-indexed with `m < n`; `base` must satisfy `ζ_n − ζ_m = iπ`.
pub fn check_residue(fam: &FormFactorFamily, k: usize, pair: (usize, usize), base: &[C64], radius: f64) -> Result<ResidueReport> {
    let (m, n) = pair;
    if !(1 <= m && m < n && n <= k) || base.len() != k {
        return Err(Error::InvalidParameter(format!("pair ({m},{n}) invalid for F_{k} with {} arguments", base.len())));
    }
    if (base[n - 1] - base[m - 1] - I * PI).norm() > 1e-12 {
        return Err(Error::InvalidParameter("base point must satisfy ζ_n − ζ_m = iπ".into()));
    }
    let clearance = fam.pole_distance(base, Some((m, n)));
    if clearance < 2.0 * radius {
        return Err(Error::Contour(format!(
            "another declared pole lies at distance {clearance:.3} from the contour centre (radius {radius})"
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for j in 0..CONTOUR_NODES {
        let phi = 2.0 * PI * j as f64 / CONTOUR_NODES as f64;
        let e = C64::from_polar(1.0, phi);
        let mut z = base.to_vec();
        z[n - 1] += radius * e;
        let v = fam.eval(&z)?;
        scale += v.norm();
        acc += v * e;
    }
    let numerical = acc * (radius / CONTOUR_NODES as f64);
    let scale = radius * scale / CONTOUR_NODES as f64;

    let s = &fam.s;
    let zm = base[m - 1];
    let mut first = C64::new(1.0, 0.0);
    for zj in &base[m - 1..n] {
        first *= s.eval(zj - zm)?;
    }
    let mut second = C64::new(1.0, 0.0);
    for zp in base {
        second *= s.eval(zm - zp)?;
    }
    let hat: Vec<C64> = base.iter().enumerate().filter(|&(i, _)| i != m - 1 && i != n - 1).map(|(_, v)| *v).collect();
    let lower = fam.eval(&hat)?;
    let expected = -first * (C64::new(1.0, 0.0) - second) * lower / (2.0 * PI * I);
    Ok(ResidueReport {
        k,
        pair,
        numerical: [numerical.re, numerical.im],
        expected: [expected.re, expected.im],
        rel_err: rel_err(numerical, expected, scale),
    })
}

/// Residue checks at random base points for every pair `m < n`.
pub fn check_residues(fam: &FormFactorFamily, k: usize, n_samples: usize, seed: u64, radius: f64) -> Result<CheckReport> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("F_{k} has no residue pairs")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = Vec::new();
    let mut resampled = 0;
    for m in 1..=k {
        for n in m + 1..=k {
            let mut got = 0;
            while got < n_samples {
                let mut z = random_point(&mut rng, k);
                z[n - 1] = z[m - 1] + I * PI;
                if fam.pole_distance(&z, Some((m, n))) < 2.0 * radius + POLE_CLEARANCE {
                    resampled += 1;
                    if resampled > MAX_RESAMPLES {
                        return Err(Error::Contour("no admissible residue base points".into()));
                    }
                    continue;
                }
                match check_residue(fam, k, (m, n), &z, radius) {
                    Ok(r) => {
                        errors.push(r.rel_err);
                        got += 1;
                    }
                    Err(Error::Evaluation(_)) | Err(Error::Pole(_)) => resampled += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(CheckReport::from_errors("residue", k, n_samples, &errors, resampled, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthDirection {
    /// 1-indexed argument that is moved into the strip.
    pub argument: usize,
    /// `(X, log|F_k|)` with `X = μ |Im cosh ζ_j|`.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `log|F_k|` against `X` over the upper half of the samples.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub k: usize,
    pub declared_radius: f64,
    pub directions: Vec<GrowthDirection>,
}

/// Move `ζ_j = s + it` through `t ∈ heights` with the other arguments fixed
/// at `base`, and fit the exponential rate of `|F_k|` against the
/// Paley-Wiener variable `μ |Im cosh ζ_j|`. Diagnostic only.
pub fn growth_probe(fam: &FormFactorFamily, k: usize, base: &[C64], arguments: &[usize], heights: &[f64], mass: f64) -> Result<GrowthReport> {
    if base.len() != k {
        return Err(Error::InvalidParameter(format!("base point has {} arguments, F_{k} needs {k}", base.len())));
    }
    let mut directions = Vec::new();
    for &j in arguments {
        if j == 0 || j > k {
            return Err(Error::InvalidParameter(format!("argument {j} out of range for F_{k}")));
        }
        let mut samples = Vec::new();
        for &t in heights {
            let mut z = base.to_vec();
            z[j - 1] = C64::new(base[j - 1].re, t);
            let v = fam.eval(&z)?;
            let x = mass * z[j - 1].cosh().im.abs();
            samples.push((x, v.norm().max(f64::MIN_POSITIVE).ln()));
        }
        let half = &samples[samples.len() / 2..];
        directions.push(GrowthDirection { argument: j, rate: slope(half), samples });
    }
    Ok(GrowthReport { k, declared_radius: fam.radius, directions })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
