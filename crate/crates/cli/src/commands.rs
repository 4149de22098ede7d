use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use zflab::fields::{geometry, relative_commutator_norm, smeared_field, smeared_field_prime};
use zflab::fock::symmetrizer::{self, Convention};
use zflab::fock::{FockSpace, FockState, RapidityGrid};
use zflab::formfactor::expr::FamilySpec;
use zflab::formfactor::{check_residues, check_s_periodicity, check_s_symmetry, CheckReport, FormFactorFamily};
use zflab::ising::{even_family, odd_family, run_ising, IsingReport, IsingRun, Sector, TestFunction1D};
use zflab::kinematics::{ModelKind, ModelParams, ScatteringFunction};
use zflab::serial::operator_to_json;
use zflab::C64;

use crate::config::RunConfig;

/// Pass/fail of a finished command; errors are reported separately.
pub struct Outcome {
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct GridInfo {
    pub theta_min: f64,
    pub theta_max: f64,
    pub points: usize,
}

impl GridInfo {
    fn of(g: &RapidityGrid) -> Self {
        Self { theta_min: g.theta_min(), theta_max: g.theta_max(), points: g.len() }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value < tolerance }
    }
}

fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    Ok(out.flush()?)
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<String> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let path = out.join(name);
    std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(text)
}

// ---- verify-algebra ----

#[derive(Debug, Serialize)]
pub struct AlgebraReport {
    pub command: &'static str,
    pub model: ModelParams,
    pub grid: GridInfo,
    pub n_max: usize,
    pub max_rank: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Exchange relations are checked on this many index pairs; every fourth
/// pair is diagonal.
const ZF_PAIRS: usize = 64;

fn random_tensor(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let s = a.iter().chain(b).map(|x| x.norm()).fold(0.0, f64::max);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn state_rel(a: &FockState, b: &FockState, scale: f64) -> f64 {
    let d = a.sub(b).norm();
    if scale == 0.0 {
        d
    } else {
        d / scale
    }
}

pub fn algebra_report(cfg: &RunConfig) -> Result<AlgebraReport> {
    let params = cfg.model_params()?;
    let n_max = cfg.grid.n_max;
    let max_rank = cfg.algebra.max_rank.unwrap_or(n_max);
    if max_rank > n_max {
        return Err(zflab::Error::Dimension(format!("requested rank {max_rank} exceeds n_max = {n_max}")).into());
    }
    if n_max < 2 {
        return Err(zflab::Error::Dimension(format!("exchange relations need n_max >= 2, have {n_max}")).into());
    }
    let space = FockSpace::new(cfg.grid()?, n_max, ScatteringFunction::new(params))?;
    let tol = cfg.tolerances.algebra;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);

    let (mut idem, mut selfadj, mut involution, mut braid): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for r in 1..=max_rank {
        let f = random_tensor(&mut rng, space.dim(r));
        let g = random_tensor(&mut rng, space.dim(r));
        let pf = symmetrizer::symmetrize(&space, &f, r)?;
        idem = idem.max(max_rel(&pf, &symmetrizer::symmetrize(&space, &pf, r)?));
        let pg = symmetrizer::symmetrize(&space, &g, r)?;
        let (l, rr) = (space.inner(r, &g, &pf), space.inner(r, &pg, &f));
        selfadj = selfadj.max((l - rr).norm() / l.norm().max(rr.norm()).max(f64::MIN_POSITIVE));
        let t = |d: &[C64], j: usize| symmetrizer::transposition(&space, d, r, j, Convention::Standard);
        for j in 0..r.saturating_sub(1) {
            involution = involution.max(max_rel(&t(&t(&f, j), j), &f));
            if j + 2 < r {
                let lhs = t(&t(&t(&f, j), j + 1), j);
                let rhs = t(&t(&t(&f, j + 1), j), j + 1);
                braid = braid.max(max_rel(&lhs, &rhs));
            }
        }
    }

    let n = space.n();
    let th = space.grid().points().to_vec();
    let w = space.grid().weights().to_vec();
    let s = |x: f64| space.scattering().eval_real(x);
    let low = FockState::random_with(&space, n_max - 2, &mut rng)?;
    let mid = FockState::random_with(&space, n_max - 1, &mut rng)?;
    let full = FockState::random_with(&space, n_max, &mut rng)?;
    let (mut mixed, mut creators, mut annihilators, mut adjoint): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for p in 0..ZF_PAIRS {
        let i = rng.gen_range(0..n);
        let j = if p % 4 == 0 { i } else { rng.gen_range(0..n) };
        let lhs = low.create(j).annihilate(i);
        let mut rhs = low.annihilate(i).create(j).scaled(s(th[j] - th[i]));
        if i == j {
            rhs.axpy(C64::new(1.0 / w[i], 0.0), &low);
        }
        mixed = mixed.max(state_rel(&lhs, &rhs, lhs.norm().max(rhs.norm())));
        let a = low.create(j).create(i);
        let b = low.create(i).create(j).scaled(s(th[i] - th[j]));
        creators = creators.max(state_rel(&a, &b, low.norm() / (w[i] * w[j])));
        let a = full.annihilate(j).annihilate(i);
        let b = full.annihilate(i).annihilate(j).scaled(s(th[i] - th[j]));
        annihilators = annihilators.max(state_rel(&a, &b, full.norm() / w[i].min(w[j])));
        let up = mid.create(i);
        let (x, y) = (up.inner(&full), mid.inner(&full.annihilate(i)));
        adjoint = adjoint.max((x - y).norm() / (up.norm() * full.norm()).max(f64::MIN_POSITIVE));
    }

    let checks = vec![
        Check::below("symmetrizer_idempotent", idem, tol),
        Check::below("symmetrizer_self_adjoint", selfadj, tol),
        Check::below("transposition_involution", involution, tol),
        Check::below("transposition_braid", braid, tol),
        Check::below("zf_mixed", mixed, tol),
        Check::below("zf_creators", creators, tol),
        Check::below("zf_annihilators", annihilators, tol),
        Check::below("creation_annihilation_adjoint", adjoint, tol),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(AlgebraReport {
        command: "verify-algebra",
        model: params,
        grid: GridInfo::of(space.grid()),
        n_max,
        max_rank,
        seed: cfg.run.seed,
        checks,
        pass,
    })
}

pub fn verify_algebra(cfg: &RunConfig) -> Result<Outcome> {
    let report = algebra_report(cfg)?;
    emit(&write_json(&cfg.run.out, "algebra_report.json", &report)?)?;
    Ok(Outcome { pass: report.pass })
}

// ---- locality-sweep ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pair {
    /// `[φ(f), φ(g)]` with spacelike separated supports.
    PhiPhi,
    /// `[φ(f), φ′(g)]` with `f` left and `g` right of a wedge gap.
    PhiPhiPrime,
}

/// One CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub pair: Pair,
    pub grid_points: usize,
    /// Half width of the rapidity range.
    pub theta_range: f64,
    pub separation: f64,
    pub relative_norm: f64,
    pub dropped_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct SeriesSummary {
    pub pair: Pair,
    pub separation: f64,
    /// Whether the pair must commute in the continuum for this model.
    pub expect_local: bool,
    pub finest: f64,
    /// Finest level below the coarsest one.
    pub decaying: bool,
    /// Every refinement step lowered the norm.
    pub monotone: bool,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub model: ModelParams,
    pub n_max: usize,
    pub sector_limit: usize,
    pub half_width: f64,
    pub tau: f64,
    pub tolerance: f64,
    pub rows: Vec<SweepRow>,
    pub series: Vec<SeriesSummary>,
    pub pass: bool,
}

/// The grid of refinement level `f`: range and interval count scaled by `f`.
fn level_grid(cfg: &RunConfig, f: f64) -> Result<RapidityGrid> {
    let [a, b] = cfg.grid.theta_range;
    let intervals = cfg.grid.points.saturating_sub(1) as f64 * f;
    let points = 2 * ((intervals / 2.0).round() as usize).max(1) + 1;
    Ok(RapidityGrid::new(a * f, b * f, points)?)
}

pub fn sweep_report(cfg: &RunConfig) -> Result<SweepReport> {
    let params = cfg.model_params()?;
    let sw = &cfg.sweep;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for pair in [Pair::PhiPhi, Pair::PhiPhiPrime] {
        for &d in &sw.separations {
            let (f, g) = match pair {
                Pair::PhiPhi => geometry::spacelike_pair(sw.half_width, d, sw.tau)?,
                Pair::PhiPhiPrime => geometry::wedge_pair(sw.half_width, d, sw.tau)?,
            };
            let mut norms = Vec::new();
            for &level in &sw.refinements {
                let grid = level_grid(cfg, level)?;
                let (points, half) = (grid.len(), 0.5 * (grid.theta_max() - grid.theta_min()));
                let space = FockSpace::new(grid, cfg.grid.n_max, ScatteringFunction::new(params))?;
                let a = smeared_field(&f, &space)?;
                let b = match pair {
                    Pair::PhiPhi => smeared_field(&g, &space)?,
                    Pair::PhiPhiPrime => smeared_field_prime(&g, &space)?,
                };
                let r = relative_commutator_norm(&a, &b, cfg.run.sector_limit)?;
                norms.push(r.relative_norm);
                rows.push(SweepRow {
                    pair,
                    grid_points: points,
                    theta_range: half,
                    separation: d,
                    relative_norm: r.relative_norm,
                    dropped_norm: r.dropped_norm,
                });
            }
            let expect_local = pair == Pair::PhiPhiPrime || params.kind == ModelKind::Free;
            let finest = *norms.last().expect("refinements are non-empty");
            let decaying = finest < norms[0];
            let monotone = norms.windows(2).all(|w| w[1] < w[0]);
            let pass = !expect_local || (finest < cfg.tolerances.locality && decaying);
            series.push(SeriesSummary { pair, separation: d, expect_local, finest, decaying, monotone, pass });
        }
    }
    let pass = series.iter().all(|s| s.pass);
    Ok(SweepReport {
        command: "locality-sweep",
        model: params,
        n_max: cfg.grid.n_max,
        sector_limit: cfg.run.sector_limit,
        half_width: sw.half_width,
        tau: sw.tau,
        tolerance: cfg.tolerances.locality,
        rows,
        series,
        pass,
    })
}

pub fn locality_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let report = sweep_report(cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(row)?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    std::fs::create_dir_all(&cfg.run.out)?;
    std::fs::write(cfg.run.out.join("locality_sweep.csv"), &text)?;
    write_json(&cfg.run.out, "locality_sweep.json", &report)?;
    emit(&text)?;
    Ok(Outcome { pass: report.pass })
}

// ---- check-formfactors ----

/// Which family `check-formfactors` examines.
#[derive(Debug, Clone)]
pub enum FamilyChoice {
    Even,
    Odd,
    File(PathBuf),
}

#[derive(Debug, Serialize)]
pub struct FormFactorCheck {
    #[serde(flatten)]
    pub report: CheckReport,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct FormFactorReport {
    pub command: &'static str,
    pub family: String,
    pub orders: Vec<usize>,
    pub seed: u64,
    pub checks: Vec<FormFactorCheck>,
    pub pass: bool,
}

pub fn load_family(choice: &FamilyChoice, cfg: &RunConfig) -> Result<FormFactorFamily> {
    let g = TestFunction1D::new(cfg.run.radius)?;
    Ok(match choice {
        FamilyChoice::Even => even_family(&g, cfg.model.mass),
        FamilyChoice::Odd => odd_family(&g, cfg.model.mass, cfg.ising.k_max),
        FamilyChoice::File(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading family {}", p.display()))?;
            let spec: FamilySpec = toml::from_str(&text).with_context(|| format!("parsing family {}", p.display()))?;
            spec.build().with_context(|| format!("building family {}", p.display()))?
        }
    })
}

pub fn formfactor_report(choice: &FamilyChoice, cfg: &RunConfig) -> Result<FormFactorReport> {
    let fam = load_family(choice, cfg)?;
    let ff = &cfg.formfactors;
    let tol = &cfg.tolerances;
    let seed = cfg.run.seed;
    let mut checks = Vec::new();
    let mut push = |report: CheckReport, tolerance: f64| {
        let pass = report.passes(tolerance);
        checks.push(FormFactorCheck { report, tolerance, pass });
    };
    let orders = fam.orders();
    for &k in &orders {
        if k >= 2 {
            push(check_s_symmetry(&fam, k, ff.samples, seed)?, tol.symmetry);
        }
        if k >= 1 {
            push(check_s_periodicity(&fam, k, ff.samples, seed)?, tol.periodicity);
        }
        if k >= 2 {
            push(check_residues(&fam, k, ff.residue_samples, seed, ff.contour_radius)?, tol.residue);
        }
    }
    if checks.is_empty() {
        bail!("family {} has no member with a check (orders {orders:?})", fam.name);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(FormFactorReport { command: "check-formfactors", family: fam.name.clone(), orders, seed, checks, pass })
}

pub fn check_formfactors(choice: &FamilyChoice, cfg: &RunConfig) -> Result<Outcome> {
    let report = formfactor_report(choice, cfg)?;
    emit(&write_json(&cfg.run.out, "formfactor_report.json", &report)?)?;
    Ok(Outcome { pass: report.pass })
}

// ---- build-ising ----

#[derive(Debug, Serialize)]
pub struct BuildReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub report: IsingReport,
    pub tolerance: f64,
    /// Wedge commutators below tolerance and the inside control above it.
    pub pass: bool,
    pub operator_file: String,
}

pub const OPERATOR_FILE: &str = "ising_operator.json";

pub fn build_ising(cfg: &RunConfig) -> Result<Outcome> {
    let [a, b] = cfg.grid.theta_range;
    if (a + b).abs() > 1e-12 * a.abs().max(b.abs()) {
        bail!("build-ising needs a symmetric rapidity range, got [{a}, {b}]");
    }
    let run = IsingRun {
        sector: cfg.ising.sector,
        radius: cfg.run.radius,
        k_max: if cfg.ising.sector == Sector::Even { 0 } else { cfg.ising.k_max },
        mass: cfg.model.mass,
        half_range: b,
        points: cfg.grid.points,
        n_max: cfg.grid.n_max,
        sector_limit: cfg.run.sector_limit,
        prescription: cfg.ising.prescription,
        epsilons: cfg.ising.epsilons.clone(),
    };
    let (report, build) = run_ising(&run)?;
    let tol = cfg.tolerances.locality;
    let l = &report.locality_norms;
    let pass = l.left_field < tol && l.right_field < tol && l.negative_control > tol;
    write_json(&cfg.run.out, OPERATOR_FILE, &operator_to_json(&build.operator)?)?;
    let out = BuildReport { command: "build-ising", report, tolerance: tol, pass, operator_file: OPERATOR_FILE.into() };
    emit(&write_json(&cfg.run.out, "ising_report.json", &out)?)?;
    Ok(Outcome { pass })
}
