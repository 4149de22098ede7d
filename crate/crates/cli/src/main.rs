//! `zflab` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
//! configuration or precondition error.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use zflab::ising::Sector;
use zflab::kinematics::ModelKind;

use commands::FamilyChoice;
use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "zflab", version, about = "Locality checks for truncated Zamolodchikov-Faddeev fields")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file merged over the shipped defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// free, ising or sinh_gordon.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports, tables and tensors.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    theta_range: Option<Vec<f64>>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// even or odd.
    #[arg(long, global = true)]
    sector: Option<String>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Comma-separated support margins.
    #[arg(long, global = true, value_delimiter = ',')]
    separations: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetrizer, exchange-relation and adjointness checks.
    VerifyAlgebra,
    /// Commutator norms under grid refinement, written as CSV.
    LocalitySweep,
    /// Symmetry, periodicity and residue checks of a form-factor family.
    CheckFormfactors {
        #[arg(long, value_enum, default_value = "even")]
        family: FamilyKind,
        /// Family description for `--family file`.
        #[arg(long, required_if_eq("family", "file"))]
        family_file: Option<PathBuf>,
    },
    /// Assemble an Ising observable and run the locality battery.
    BuildIsing,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Even,
    Odd,
    File,
}

impl Common {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            model: self.model.as_deref().map(str::parse::<ModelKind>).transpose()?,
            seed: self.seed,
            out: self.out.clone(),
            grid_points: self.grid_points,
            theta_range: self.theta_range.as_ref().map(|v| [v[0], v[1]]),
            n_max: self.nmax,
            radius: self.radius,
            sector: self.sector.as_deref().map(str::parse::<Sector>).transpose()?,
            k_max: self.kmax,
            separations: self.separations.clone(),
        })
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = RunConfig::load(cli.common.config.as_deref(), &cli.common.overrides()?)?;
    let outcome = match &cli.command {
        Command::VerifyAlgebra => commands::verify_algebra(&cfg),
        Command::LocalitySweep => commands::locality_sweep(&cfg),
        Command::CheckFormfactors { family, family_file } => {
            let choice = match family {
                FamilyKind::Even => FamilyChoice::Even,
                FamilyKind::Odd => FamilyChoice::Odd,
                FamilyKind::File => FamilyChoice::File(family_file.clone().context("--family file needs --family-file")?),
            };
            commands::check_formfactors(&choice, &cfg)
        }
        Command::BuildIsing => commands::build_ising(&cfg),
    }?;
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("zflab: checks failed, see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("zflab: {e:#}");
            ExitCode::from(2)
        }
    }
}
