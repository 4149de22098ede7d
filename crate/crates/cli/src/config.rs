use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use toml::Table;
use zflab::fock::RapidityGrid;
use zflab::ising::{Prescription, Sector};
use zflab::kinematics::{ModelKind, ModelParams};

/// The shipped defaults, merged under every user config.
pub const DEFAULTS: &str = include_str!("../defaults.toml");

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub model: ModelSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub tolerances: Tolerances,
    pub algebra: AlgebraSection,
    pub sweep: SweepSection,
    pub formfactors: FormFactorSection,
    pub ising: IsingSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: ModelKind,
    pub mass: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub theta_range: [f64; 2],
    pub points: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub radius: f64,
    pub out: PathBuf,
    pub sector_limit: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub algebra: f64,
    pub symmetry: f64,
    pub periodicity: f64,
    pub residue: f64,
    pub locality: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    pub max_rank: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub separations: Vec<f64>,
    pub half_width: f64,
    pub tau: f64,
    pub refinements: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFactorSection {
    pub samples: usize,
    pub residue_samples: usize,
    pub contour_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingSection {
    pub sector: Sector,
    pub k_max: usize,
    pub prescription: Prescription,
    pub epsilons: Vec<f64>,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub theta_range: Option<[f64; 2]>,
    pub n_max: Option<usize>,
    pub radius: Option<f64>,
    pub sector: Option<Sector>,
    pub k_max: Option<usize>,
    pub separations: Option<Vec<f64>>,
}

/// Recursive merge: tables merge key by key, anything else is replaced.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl RunConfig {
    /// Defaults, then the file at `path`, then `over`.
    pub fn load(path: Option<&Path>, over: &Overrides) -> Result<Self> {
        let mut table: Table = toml::from_str(DEFAULTS).expect("shipped defaults parse");
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            let user: Table = toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
            merge(&mut table, user);
        }
        let mut cfg: RunConfig = toml::Value::Table(table).try_into().context("invalid config")?;
        cfg.apply(over);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.model {
            self.model.name = m;
        }
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(p) = &o.out {
            self.run.out = p.clone();
        }
        if let Some(n) = o.grid_points {
            self.grid.points = n;
        }
        if let Some(r) = o.theta_range {
            self.grid.theta_range = r;
        }
        if let Some(n) = o.n_max {
            self.grid.n_max = n;
        }
        if let Some(r) = o.radius {
            self.run.radius = r;
        }
        if let Some(s) = o.sector {
            self.ising.sector = s;
        }
        if let Some(k) = o.k_max {
            self.ising.k_max = k;
        }
        if let Some(s) = &o.separations {
            self.sweep.separations = s.clone();
        }
    }

    fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!("config version {} is not supported (expected {CONFIG_VERSION})", self.version);
        }
        self.model_params()?;
        self.grid()?;
        if self.grid.n_max == 0 {
            bail!("n_max must be at least 1");
        }
        if !(self.run.radius > 0.0) {
            bail!("radius must be positive");
        }
        if self.sweep.separations.is_empty() || self.sweep.separations.iter().any(|d| !(*d > 0.0)) {
            bail!("separations must be a non-empty list of positive margins");
        }
        if !(self.sweep.half_width > 0.0) {
            bail!("sweep half_width must be positive");
        }
        if self.sweep.refinements.is_empty() || self.sweep.refinements.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            bail!("sweep refinements must lie in (0, 1]");
        }
        for (name, t) in [
            ("algebra", self.tolerances.algebra),
            ("symmetry", self.tolerances.symmetry),
            ("periodicity", self.tolerances.periodicity),
            ("residue", self.tolerances.residue),
            ("locality", self.tolerances.locality),
        ] {
            if !(t > 0.0) {
                bail!("tolerance {name} must be positive");
            }
        }
        if self.formfactors.samples == 0 || !(self.formfactors.contour_radius > 0.0) {
            bail!("form-factor checks need samples > 0 and a positive contour radius");
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.model.name, self.model.mass, self.model.coupling)?)
    }

    pub fn grid(&self) -> Result<RapidityGrid> {
        let [a, b] = self.grid.theta_range;
        Ok(RapidityGrid::new(a, b, self.grid.points)?)
    }
}
