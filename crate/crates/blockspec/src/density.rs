//! Radial spectral density, cumulative mass, and Cartesian cross-checks.
//!
//! With `phi(u) = sum_c alpha_c u psi_c(u)`, the planar density at radius
//! `r = sqrt(u)` is `f(r) = phi'(u) / pi`, the radial density is
//! `p(r) = 2 pi r f(r)`, and the mass of the disk of radius `R` has the
//! closed form `M(R) = phi(R^2)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::block_model::BlockStructure;
use crate::error::{Error, Result};
use crate::reduced::{build_reduced, ReducedPair};
use crate::solver::{b_values, t_continuation, FixedPointSolution, SolverParams};

/// Grid nodes are solved in independent runs of this many consecutive
/// u-nodes; warm starts never cross a chunk boundary, so results do not
/// depend on how chunks are scheduled across threads.
const CHUNK: usize = 64;

/// Density clamp: values below this are treated as discretization noise.
const NEGATIVE_F_TOL: f64 = -1e-8;

/// The density profile on a radial grid.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    /// Strictly increasing radii from 0 to the support radius.
    pub r_grid: Vec<f64>,
    /// `r^2`, uniformly spaced.
    pub u_grid: Vec<f64>,
    /// Planar density per unit area, clamped to be nonnegative.
    pub f: Vec<f64>,
    /// Radial density `2 pi r f(r)` per unit radius.
    pub p: Vec<f64>,
    /// Cumulative mass of the disk of radius `r`, in `[0, 1]`.
    pub m: Vec<f64>,
    /// Support radius `sqrt(rho(G))`.
    pub radius: f64,
    /// `psi_grid[c][k]` is `psi_c` at node `k`.
    pub psi_grid: Vec<Vec<f64>>,
}

/// Solves the fixed-point system on a uniform u-grid over `[0, rho(G)]` and
/// differentiates `phi` by centered differences (one-sided at the ends).
pub fn density_grid(
    structure: &BlockStructure,
    grid_points: usize,
    params: &SolverParams,
) -> Result<RadialDensity> {
    assert!(grid_points >= 9, "grid needs at least 9 nodes");
    let reduced = build_reduced(structure)?;
    let rho = reduced.pf_value;
    let nodes: Vec<f64> = (0..grid_points)
        .map(|k| rho * k as f64 / (grid_points - 1) as f64)
        .collect();

    let solutions: Vec<FixedPointSolution> = nodes
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let mut out = Vec::with_capacity(chunk.len());
            let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;
            for (offset, &u) in chunk.iter().enumerate() {
                let ws = warm.as_ref().map(|(h, hh)| (h.as_slice(), hh.as_slice()));
                let sol = t_continuation(u, &reduced, params, ws).map_err(|e| {
                    Error::SolverFailure {
                        node: chunk_idx * CHUNK + offset,
                        source: Box::new(e),
                    }
                })?;
                warm = Some((sol.h.clone(), sol.hhat.clone()));
                out.push(sol);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let d = reduced.dim();
    let mut psi_grid = vec![vec![0.0; grid_points]; d];
    for (k, sol) in solutions.iter().enumerate() {
        for (c, column) in psi_grid.iter_mut().enumerate() {
            column[k] = sol.psi[c];
        }
    }
    let phi: Vec<f64> = solutions
        .iter()
        .map(|sol| weighted_mass_term(&reduced.alpha, sol))
        .collect();

    let du = rho / (grid_points - 1) as f64;
    let mut f = vec![0.0; grid_points];
    for k in 0..grid_points {
        let dphi = if k == 0 {
            (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * du)
        } else if k == grid_points - 1 {
            (3.0 * phi[k] - 4.0 * phi[k - 1] + phi[k - 2]) / (2.0 * du)
        } else {
            (phi[k + 1] - phi[k - 1]) / (2.0 * du)
        };
        let fk = dphi / std::f64::consts::PI;
        debug_assert!(fk >= NEGATIVE_F_TOL, "density {fk} below noise floor");
        f[k] = fk.max(0.0);
    }

    let r_grid: Vec<f64> = nodes.iter().map(|u| u.sqrt()).collect();
    let p: Vec<f64> = r_grid
        .iter()
        .zip(&f)
        .map(|(r, fk)| 2.0 * std::f64::consts::PI * r * fk)
        .collect();
    let m: Vec<f64> = phi.iter().map(|&x| x.clamp(0.0, 1.0)).collect();

    Ok(RadialDensity {
        r_grid,
        u_grid: nodes,
        f,
        p,
        m,
        radius: rho.sqrt(),
        psi_grid,
    })
}

#[inline]
fn weighted_mass_term(alpha: &[f64], sol: &FixedPointSolution) -> f64 {
    alpha
        .iter()
        .zip(&sol.psi)
        .map(|(a, psi)| a * sol.u * psi)
        .sum()
}

/// Mass of the disk of radius `R` from a converged solution at `u = R^2`:
/// `M(R) = sum_c alpha_c R^2 psi_c(R^2)`, clamped to `[0, 1]`.
pub fn cumulative_mass(solution: &FixedPointSolution, structure: &BlockStructure) -> Result<f64> {
    if !solution.converged {
        return Err(Error::NotConverged);
    }
    Ok(weighted_mass_term(&structure.alpha, solution).clamp(0.0, 1.0))
}

/// Mass of the annulus `r1 <= |z| <= r2`; radii beyond the support radius
/// are clamped to it.
pub fn annulus_mass(
    structure: &BlockStructure,
    r1: f64,
    r2: f64,
    params: &SolverParams,
) -> Result<f64> {
    assert!(r1 >= 0.0 && r1 <= r2, "need 0 <= r1 <= r2");
    if r1 == r2 {
        return Ok(0.0);
    }
    let reduced = build_reduced(structure)?;
    let radius = reduced.support_radius();
    let mass_at = |r: f64| -> Result<f64> {
        let r = r.min(radius);
        let sol = t_continuation(r * r, &reduced, params, None)?;
        cumulative_mass(&sol, structure)
    };
    Ok(mass_at(r2)? - mass_at(r1)?)
}

/// One comparison point of the two differentiation routes.
#[derive(Debug, Clone)]
pub struct CrossCheckPoint {
    pub z: Complex64,
    /// Real part of `-(1/pi) d/dz sum_c alpha_c b_c` by 2-D centered
    /// differences.
    pub f_cartesian: f64,
    /// Imaginary residue of the same derivative; should vanish.
    pub f_cartesian_imag: f64,
    /// Radial-route density at `|z|`.
    pub f_radial: f64,
    pub abs_diff: f64,
}

/// Evaluates the density at interior points by literal `d/dz` differentiation
/// of the `b` components and reports the disagreement with the radial route.
pub fn cartesian_cross_check(
    structure: &BlockStructure,
    z_list: &[Complex64],
    step: f64,
    params: &SolverParams,
) -> Result<Vec<CrossCheckPoint>> {
    assert!(step > 0.0);
    let reduced = build_reduced(structure)?;
    let radius = reduced.support_radius();
    let b_sum_at = |z: Complex64| -> Result<Complex64> {
        let sol = t_continuation(z.norm_sqr(), &reduced, params, None)?;
        let b = b_values(&sol, z)?;
        Ok(reduced
            .alpha
            .iter()
            .zip(&b)
            .map(|(&a, &bc)| a * bc)
            .sum())
    };
    let mut out = Vec::with_capacity(z_list.len());
    for &z in z_list {
        assert!(
            z.norm() < radius - 2.0 * step,
            "cross-check points must be interior"
        );
        let dx = (b_sum_at(z + step)? - b_sum_at(z - step)?) / (2.0 * step);
        let dy = (b_sum_at(z + Complex64::new(0.0, step))?
            - b_sum_at(z - Complex64::new(0.0, step))?)
            / (2.0 * step);
        // d/dz = (d/dx - i d/dy) / 2
        let ddz = 0.5 * (dx - Complex64::new(0.0, 1.0) * dy);
        let f_complex = -ddz / std::f64::consts::PI;
        let f_radial = radial_density_at(&reduced, z.norm_sqr(), params)?;
        out.push(CrossCheckPoint {
            z,
            f_cartesian: f_complex.re,
            f_cartesian_imag: f_complex.im,
            f_radial,
            abs_diff: (f_complex.re - f_radial).abs(),
        });
    }
    Ok(out)
}

/// Radial-route density at one interior `u`, using the same centered
/// difference of `phi` the grid uses (spacing `rho / 512`).
fn radial_density_at(reduced: &ReducedPair, u: f64, params: &SolverParams) -> Result<f64> {
    let du = reduced.pf_value / 512.0;
    let lo = t_continuation((u - du).max(0.0), reduced, params, None)?;
    let hi = t_continuation(u + du, reduced, params, None)?;
    let phi_lo = weighted_mass_term(&reduced.alpha, &lo);
    let phi_hi = weighted_mass_term(&reduced.alpha, &hi);
    Ok((phi_hi - phi_lo) / (hi.u - lo.u) / std::f64::consts::PI)
}
