//! Finite-N eigenvalue sampling and comparison against the predicted radial
//! law.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::block_model::{sample_matrix, BlockStructure, SampledMatrix};
use crate::density::cumulative_mass;
use crate::error::{Error, Result};
use crate::reduced::build_reduced;
use crate::solver::{t_continuation, SolverParams};

/// Number of radial histogram bins.
pub const HISTOGRAM_BINS: usize = 50;
/// Histogram upper edge as a multiple of the predicted radius, leaving room
/// to expose outliers.
pub const HISTOGRAM_OVERSHOOT: f64 = 1.2;

/// Concatenated spectra of a batch of sampled matrices.
#[derive(Debug, Clone)]
pub struct EmpiricalSpectrum {
    /// All eigenvalues in trial order, `n` per trial.
    pub eigenvalues: Vec<Complex64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `max |lambda|` over the whole batch.
    pub empirical_radius: f64,
    /// `HISTOGRAM_BINS + 1` radial bin edges from 0 to `1.2 sqrt(rho(G))`.
    pub bins: Vec<f64>,
    /// Eigenvalue counts per bin; moduli at or beyond the top edge land in
    /// the last bin.
    pub counts: Vec<u64>,
}

/// Agreement between an empirical spectrum and the predicted law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Sup distance between the empirical radial CDF and the predicted
    /// cumulative mass, over the bin edges.
    pub ks_radial: f64,
    /// `| empirical radius - sqrt(rho(G)) | / sqrt(rho(G))`.
    pub radius_rel_err: f64,
    pub per_bin: Vec<BinComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinComparison {
    pub r_lo: f64,
    pub r_hi: f64,
    pub empirical_mass: f64,
    pub theory_mass: f64,
    pub diff: f64,
}

/// All `n` eigenvalues of a sampled matrix, via Hessenberg reduction and the
/// implicitly shifted QR algorithm. The eigensolver is forced to run
/// sequentially so the output is a deterministic function of the matrix;
/// parallelism belongs at the trial level.
pub fn spectrum(matrix: &SampledMatrix) -> Result<Vec<Complex64>> {
    if matrix
        .entries
        .iter()
        .any(|e| !e.re.is_finite() || !e.im.is_finite())
    {
        return Err(Error::EigensolverFailure(
            "matrix has non-finite entries".to_string(),
        ));
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let n = matrix.n;
    let mat = faer::Mat::from_fn(n, n, |i, j| matrix.entry(i, j));
    mat.eigenvalues()
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))
}

/// Samples `trials` matrices with trial indices `0..trials` and concatenates
/// their spectra. Trials are independent jobs and run in parallel; the
/// result is assembled in trial order and does not depend on thread count.
pub fn run_trials(
    structure: &BlockStructure,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalSpectrum> {
    assert!(n >= 10, "n must be at least 10");
    assert!(trials >= 1, "at least one trial required");
    let radius = build_reduced(structure)?.support_radius();

    let per_trial: Vec<Vec<Complex64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| spectrum(&sample_matrix(structure, n, seed, trial)?))
        .collect::<Result<Vec<_>>>()?;
    let eigenvalues: Vec<Complex64> = per_trial.into_iter().flatten().collect();

    let empirical_radius = eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let top = HISTOGRAM_OVERSHOOT * radius;
    let bins: Vec<f64> = (0..=HISTOGRAM_BINS)
        .map(|k| top * k as f64 / HISTOGRAM_BINS as f64)
        .collect();
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    let width = top / HISTOGRAM_BINS as f64;
    for z in &eigenvalues {
        let idx = ((z.norm() / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[idx] += 1;
    }
    Ok(EmpiricalSpectrum {
        eigenvalues,
        n,
        trials,
        seed,
        empirical_radius,
        bins,
        counts,
    })
}

/// Compares an empirical spectrum against the predicted law: per-bin masses,
/// radial Kolmogorov-Smirnov distance over the bin edges, and the relative
/// error of the spectral radius.
pub fn compare(
    empirical: &EmpiricalSpectrum,
    structure: &BlockStructure,
    params: &SolverParams,
) -> Result<ComparisonReport> {
    assert!(!empirical.eigenvalues.is_empty());
    let reduced = build_reduced(structure)?;
    let radius = reduced.support_radius();

    let mut edge_mass = Vec::with_capacity(empirical.bins.len());
    for &edge in &empirical.bins {
        let u = (edge.min(radius)).powi(2);
        let sol = t_continuation(u, &reduced, params, None)?;
        edge_mass.push(cumulative_mass(&sol, structure)?);
    }

    let mut radii: Vec<f64> = empirical.eigenvalues.iter().map(|z| z.norm()).collect();
    radii.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let total = radii.len() as f64;
    let cdf_at = |r: f64| -> f64 { radii.partition_point(|&x| x <= r) as f64 / total };

    let ks_radial = empirical
        .bins
        .iter()
        .zip(&edge_mass)
        .map(|(&edge, &mass)| (cdf_at(edge) - mass).abs())
        .fold(0.0f64, f64::max);

    let per_bin = (0..HISTOGRAM_BINS)
        .map(|k| {
            let empirical_mass = empirical.counts[k] as f64 / total;
            let theory_mass = edge_mass[k + 1] - edge_mass[k];
            BinComparison {
                r_lo: empirical.bins[k],
                r_hi: empirical.bins[k + 1],
                empirical_mass,
                theory_mass,
                diff: empirical_mass - theory_mass,
            }
        })
        .collect();

    Ok(ComparisonReport {
        ks_radial,
        radius_rel_err: (empirical.empirical_radius - radius).abs() / radius,
        per_bin,
    })
}

/// Chi-square statistic of the eigenvalue arguments against the uniform law
/// on `(-pi, pi]`, with `bins` angular cells.
pub fn angular_chi_square(eigenvalues: &[Complex64], bins: usize) -> f64 {
    assert!(bins >= 2);
    let mut counts = vec![0u64; bins];
    for z in eigenvalues {
        let frac = (z.arg() + std::f64::consts::PI) / std::f64::consts::TAU;
        let idx = ((frac * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let expected = eigenvalues.len() as f64 / bins as f64;
    counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Number of eigenvalues within `tol` of the real axis.
pub fn real_axis_count(eigenvalues: &[Complex64], tol: f64) -> usize {
    eigenvalues.iter().filter(|z| z.im.abs() <= tol).count()
}
