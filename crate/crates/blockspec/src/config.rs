//! JSON run configuration: strict parsing (unknown keys are errors) and
//! validation against the component invariants.

use serde::Deserialize;

use crate::block_model::{BlockStructure, EntryDistribution};
use crate::error::{Error, Result};
use crate::solver::SolverParams;

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GRID_POINTS: usize = 513;

/// Minimum matrix dimension accepted for sampling runs.
pub const MIN_N: usize = 10;
/// Minimum number of radial grid nodes.
pub const MIN_GRID_POINTS: usize = 9;

fn default_n() -> usize {
    DEFAULT_N
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: Vec<f64>,
    g: Vec<Vec<f64>>,
    #[serde(default)]
    distribution: EntryDistribution,
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_grid_points")]
    grid_points: usize,
    #[serde(default)]
    solver: SolverParams,
    #[serde(default)]
    output_path: String,
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub structure: BlockStructure,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub solver: SolverParams,
    pub output_path: String,
}

/// Parses a JSON document into a validated [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let structure = BlockStructure::new(raw.alpha, raw.g, raw.distribution).map_err(|e| {
        let field = match &e {
            Error::InvalidG(_) => "g",
            _ => "alpha",
        };
        Error::ValidationError {
            field: field.to_string(),
            message: e.to_string(),
        }
    })?;
    if raw.n < MIN_N || raw.n < structure.block_count() {
        return Err(Error::ValidationError {
            field: "n".to_string(),
            message: format!("must be at least max({MIN_N}, D), got {}", raw.n),
        });
    }
    if raw.trials == 0 {
        return Err(Error::ValidationError {
            field: "trials".to_string(),
            message: "must be at least 1".to_string(),
        });
    }
    if raw.grid_points < MIN_GRID_POINTS {
        return Err(Error::ValidationError {
            field: "grid_points".to_string(),
            message: format!("must be at least {MIN_GRID_POINTS}, got {}", raw.grid_points),
        });
    }
    raw.solver.validate().map_err(|e| match e {
        Error::ValidationError { field, message } => Error::ValidationError {
            field: format!("solver.{field}"),
            message,
        },
        other => other,
    })?;
    Ok(RunConfig {
        structure,
        n: raw.n,
        trials: raw.trials,
        seed: raw.seed,
        grid_points: raw.grid_points,
        solver: raw.solver,
        output_path: raw.output_path,
    })
}
