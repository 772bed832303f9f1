//! Limiting spectral density, cumulative radial mass, and spectral radius of
//! block-structured asymmetric random matrices, with a Monte Carlo eigenvalue
//! harness to validate the predictions at finite N.
//!
//! The model: an N x N matrix partitioned into D^2 rectangular blocks, where
//! entries in block `(c, d)` are iid with standard deviation `g_cd / sqrt(N)`
//! and block `c` spans a fraction `alpha_c` of the rows. The predicted
//! spectrum fills a disk of radius `sqrt(rho(G))`, `G_cd = alpha_c g_cd^2`,
//! with a radially symmetric density obtained from a fixed-point system.

pub mod block_model;
pub mod config;
pub mod density;
pub mod error;
pub mod montecarlo;
pub mod reduced;
pub mod solver;

pub use block_model::{block_index, sample_matrix, BlockStructure, EntryDistribution, SampledMatrix};
pub use config::{parse_config, RunConfig};
pub use density::{annulus_mass, cartesian_cross_check, cumulative_mass, density_grid, RadialDensity};
pub use error::{Error, Result};
pub use montecarlo::{compare, run_trials, spectrum, ComparisonReport, EmpiricalSpectrum};
pub use reduced::{build_reduced, perron_eigenpair, spectral_radius, ReducedPair};
pub use solver::{b_values, iterate_once, solve, t_continuation, FixedPointSolution, SolverParams};
