//! Command-line front end: config ingestion, subcommand dispatch, and
//! CSV/JSON emission.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use blockspec::config::{parse_config, RunConfig};
use blockspec::density::density_grid;
use blockspec::error::Error;
use blockspec::montecarlo::{compare, run_trials};
use blockspec::reduced::build_reduced;
use blockspec::{annulus_mass, Result};

#[derive(Parser)]
#[command(
    name = "blockspec",
    about = "Spectral predictions and Monte Carlo validation for block-structured asymmetric random matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration and exit.
    Validate(CommonArgs),
    /// Print the predicted spectral radius and Perron-Frobenius eigenpair as JSON.
    Radius(CommonArgs),
    /// Write the radial density table (r, u, f, p, M, psi_c) as CSV.
    Density(CommonArgs),
    /// Print the predicted mass of the annulus r1 <= |z| <= r2 as JSON.
    Mass {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
    },
    /// Sample matrices and write all eigenvalues (re, im, trial) as CSV.
    Sample(CommonArgs),
    /// Sample matrices and write the comparison report as JSON.
    Compare(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Validate(c)
            | Command::Radius(c)
            | Command::Density(c)
            | Command::Sample(c)
            | Command::Compare(c) => c,
            Command::Mass { common, .. } => common,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the config's grid size.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Output file; falls back to the config's output_path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RadiusReport {
    radius: f64,
    pf_value: f64,
    pf_vector: Vec<f64>,
}

#[derive(Serialize)]
struct MassReport {
    r1: f64,
    r2: f64,
    mass: f64,
}

fn main() -> ExitCode {
    // BLOCKSPEC_THREADS caps the worker pool; results never depend on it.
    if let Ok(v) = std::env::var("BLOCKSPEC_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidAlpha(_)
        | Error::InvalidG(_)
        | Error::InvalidD
        | Error::InvalidStructure(_)
        | Error::ParseError { .. }
        | Error::ValidationError { .. } => 2,
        Error::NoConvergence { .. } | Error::SolverFailure { .. } | Error::NotConverged => 3,
        Error::EigensolverFailure(_) | Error::NonPositiveMatrix => 4,
        _ => 1,
    }
}

fn run(command: &Command) -> Result<()> {
    let common = command.common();
    let text = fs::read_to_string(&common.config)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(gp) = common.grid_points {
        cfg.grid_points = gp;
    }

    match command {
        Command::Validate(_) => Ok(()),
        Command::Radius(_) => {
            let reduced = build_reduced(&cfg.structure)?;
            let report = RadiusReport {
                radius: reduced.support_radius(),
                pf_value: reduced.pf_value,
                pf_vector: reduced.pf_vector.clone(),
            };
            emit(common, &cfg, &json(&report)?)
        }
        Command::Density(_) => {
            let density = density_grid(&cfg.structure, cfg.grid_points, &cfg.solver)?;
            emit(common, &cfg, &density_csv(&density))
        }
        Command::Mass { r1, r2, .. } => {
            if !(*r1 >= 0.0 && r1 <= r2) {
                return Err(Error::ValidationError {
                    field: "r1/r2".to_string(),
                    message: format!("need 0 <= r1 <= r2, got r1={r1}, r2={r2}"),
                });
            }
            let mass = annulus_mass(&cfg.structure, *r1, *r2, &cfg.solver)?;
            let report = MassReport {
                r1: *r1,
                r2: *r2,
                mass,
            };
            emit(common, &cfg, &json(&report)?)
        }
        Command::Sample(_) => {
            let spec = run_trials(&cfg.structure, cfg.n, cfg.trials, cfg.seed)?;
            let mut text = String::from("re,im,trial\n");
            for (idx, z) in spec.eigenvalues.iter().enumerate() {
                let trial = idx / spec.n;
                text.push_str(&format!("{},{},{}\n", z.re, z.im, trial));
            }
            emit(common, &cfg, &text)
        }
        Command::Compare(_) => {
            let spec = run_trials(&cfg.structure, cfg.n, cfg.trials, cfg.seed)?;
            let report = compare(&spec, &cfg.structure, &cfg.solver)?;
            emit(common, &cfg, &json(&report)?)
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    Ok(text)
}

fn density_csv(density: &blockspec::RadialDensity) -> String {
    let d = density.psi_grid.len();
    let mut text = String::from("r,u,f,p,M");
    for c in 1..=d {
        text.push_str(&format!(",psi_{c}"));
    }
    text.push('\n');
    for k in 0..density.r_grid.len() {
        text.push_str(&format!(
            "{},{},{},{},{}",
            density.r_grid[k], density.u_grid[k], density.f[k], density.p[k], density.m[k]
        ));
        for c in 0..d {
            text.push_str(&format!(",{}", density.psi_grid[c][k]));
        }
        text.push('\n');
    }
    text
}

fn emit(common: &CommonArgs, cfg: &RunConfig, text: &str) -> Result<()> {
    let target = common.out.clone().or_else(|| {
        if cfg.output_path.is_empty() {
            None
        } else {
            Some(PathBuf::from(&cfg.output_path))
        }
    });
    match target {
        Some(path) => fs::write(path, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
