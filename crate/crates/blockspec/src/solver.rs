//! Fixed-point solver for the regularized self-consistent equations in real
//! coordinates.
//!
//! At radius-squared `u = |z|^2` and regularization `t > 0` the system for
//! the nonnegative vectors `(h, hhat)` is
//!
//! ```text
//! h_c    = (A_c) / (u + A_c B_c)      A_c = [G^T h]_c    + t
//! hhat_c = (B_c) / (u + A_c B_c)      B_c = [Ghat^T hhat]_c + t
//! ```
//!
//! where the transposed action means the drive on class `c` is weighted by
//! the fractions of the summed-over classes: `[G^T h]_c = sum_d alpha_d
//! g_dc^2 h_d`. The common denominator is tracked as `psi_c = 1 / (u + A_c
//! B_c)`, the quantity the density and mass formulas consume.
//!
//! As `t -> 0` the system acquires a soft mode: `(h, hhat) -> (s h, hhat/s)`
//! leaves `psi` invariant, and the physical scale is fixed by the weighted
//! sum rule `sum_c alpha_c h_c = sum_c alpha_c hhat_c`. Plain damped
//! iteration contracts that mode at rate `1 - O(t)`, so the solver rescales
//! each iterate onto the sum-rule manifold, where the remaining modes
//! contract at `t`-independent rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduced::ReducedPair;

/// Iteration controls and the regularization schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// Sup-norm convergence threshold on successive `(h, hhat)` iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Convex damping factor in (0, 1].
    pub damping: f64,
    /// First level of the regularization schedule.
    pub t0: f64,
    /// Final regularization; the solution at `t_min` is reported as the
    /// `t -> 0` limit.
    pub t_min: f64,
    /// Threshold on `sum_c alpha_c h_c` at `t_min` separating interior from
    /// exterior points.
    pub vanish_threshold: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: 1e-12,
            max_iter: 1_000_000,
            damping: 0.5,
            t0: 1.0,
            t_min: 1e-6,
            vanish_threshold: 1e-4,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, message: String| Error::ValidationError {
            field: name.to_string(),
            message,
        };
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(field("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(field("max_iter", "must be positive".to_string()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(field(
                "damping",
                format!("must lie in (0, 1], got {}", self.damping),
            ));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(field("t0", format!("must be positive, got {}", self.t0)));
        }
        if self.t_min.is_nan() || self.t_min <= 0.0 || self.t_min >= self.t0 {
            return Err(field(
                "t_min",
                format!("must satisfy 0 < t_min < t0, got {}", self.t_min),
            ));
        }
        if self.vanish_threshold.is_nan() || self.vanish_threshold <= 0.0 {
            return Err(field(
                "vanish_threshold",
                format!("must be positive, got {}", self.vanish_threshold),
            ));
        }
        Ok(())
    }
}

/// Converged state of the fixed-point system at one `(u, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    /// Radius squared, `u = |z|^2`.
    pub u: f64,
    pub t: f64,
    pub h: Vec<f64>,
    pub hhat: Vec<f64>,
    /// `psi_c = 1 / (u + ([Ghat^T hhat]_c + t)([G^T h]_c + t))`.
    pub psi: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Whether `sum_c alpha_c h_c` clears the vanish threshold; meaningful
    /// for solutions at `t_min`.
    pub interior: bool,
}

impl FixedPointSolution {
    /// `sum_c alpha_c h_c`, the weighted trace that stays bounded away from
    /// zero inside the support and vanishes outside.
    pub fn weighted_h_sum(&self, alpha: &[f64]) -> f64 {
        dot(alpha, &self.h)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scratch buffers for the iteration loop.
struct Workspace {
    drive_h: Vec<f64>,
    drive_hh: Vec<f64>,
}

impl Workspace {
    fn new(d: usize) -> Self {
        Workspace {
            drive_h: vec![0.0; d],
            drive_hh: vec![0.0; d],
        }
    }
}

/// One damped update of `(h, hhat)`. Raw updates land in `[0, 1/t]`, and the
/// convex combination with the previous iterate stays there.
fn step(
    h: &mut [f64],
    hhat: &mut [f64],
    u: f64,
    t: f64,
    reduced: &ReducedPair,
    damping: f64,
    ws: &mut Workspace,
) -> f64 {
    reduced.g_mat.apply_transposed(h, &mut ws.drive_h);
    reduced.ghat_mat.apply_transposed(hhat, &mut ws.drive_hh);
    let mut diff = 0.0f64;
    for c in 0..h.len() {
        let a = ws.drive_h[c] + t;
        let b = ws.drive_hh[c] + t;
        let psi = 1.0 / (u + a * b);
        let new_h = (1.0 - damping) * h[c] + damping * a * psi;
        let new_hh = (1.0 - damping) * hhat[c] + damping * b * psi;
        diff = diff.max((new_h - h[c]).abs()).max((new_hh - hhat[c]).abs());
        h[c] = new_h;
        hhat[c] = new_hh;
    }
    diff
}

/// Rescales `(h, hhat) -> (s h, hhat / s)` onto the sum-rule manifold
/// `sum alpha h = sum alpha hhat`, clamping `s` so both vectors stay within
/// `[0, 1/t]`. Returns the sup-norm change it introduced.
fn rebalance(h: &mut [f64], hhat: &mut [f64], alpha: &[f64], t: f64) -> f64 {
    let sum_h = dot(alpha, h);
    let sum_hh = dot(alpha, hhat);
    if !(sum_h > 0.0 && sum_hh > 0.0 && sum_h.is_finite() && sum_hh.is_finite()) {
        return 0.0;
    }
    let cap = 1.0 / t;
    let mut s = (sum_hh / sum_h).sqrt();
    let h_max = h.iter().cloned().fold(0.0f64, f64::max);
    let hh_max = hhat.iter().cloned().fold(0.0f64, f64::max);
    if h_max > 0.0 {
        s = s.min(cap / h_max);
    }
    if hh_max > 0.0 {
        s = s.max(hh_max / cap);
    }
    if !s.is_finite() || s <= 0.0 || s == 1.0 {
        return 0.0;
    }
    let mut diff = 0.0f64;
    for x in h.iter_mut() {
        let nx = *x * s;
        diff = diff.max((nx - *x).abs());
        *x = nx;
    }
    for x in hhat.iter_mut() {
        let nx = *x / s;
        diff = diff.max((nx - *x).abs());
        *x = nx;
    }
    diff
}

/// One damped fixed-point update; returns the new `(h, hhat)`.
///
/// Inputs must lie entrywise in `[0, 1/t]`; the output remains there.
pub fn iterate_once(
    h: &[f64],
    hhat: &[f64],
    u: f64,
    t: f64,
    reduced: &ReducedPair,
    damping: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut ws = Workspace::new(reduced.dim());
    let mut new_h = h.to_vec();
    let mut new_hh = hhat.to_vec();
    step(&mut new_h, &mut new_hh, u, t, reduced, damping, &mut ws);
    (new_h, new_hh)
}

fn psi_of(h: &[f64], hhat: &[f64], u: f64, t: f64, reduced: &ReducedPair) -> Vec<f64> {
    let d = reduced.dim();
    let mut drive_h = vec![0.0; d];
    let mut drive_hh = vec![0.0; d];
    reduced.g_mat.apply_transposed(h, &mut drive_h);
    reduced.ghat_mat.apply_transposed(hhat, &mut drive_hh);
    (0..d)
        .map(|c| 1.0 / (u + (drive_h[c] + t) * (drive_hh[c] + t)))
        .collect()
}

/// Solves the system at fixed `(u, t)` by damped iteration with sum-rule
/// rescaling, from the all-zeros cold start unless a warm start is given.
pub fn solve(
    u: f64,
    t: f64,
    reduced: &ReducedPair,
    params: &SolverParams,
    warm_start: Option<(&[f64], &[f64])>,
) -> Result<FixedPointSolution> {
    assert!(u >= 0.0 && u.is_finite(), "u must be nonnegative");
    assert!(t > 0.0 && t.is_finite(), "t must be positive");
    let d = reduced.dim();
    let cap = 1.0 / t;
    let (mut h, mut hhat) = match warm_start {
        Some((wh, whh)) => {
            assert_eq!(wh.len(), d);
            assert_eq!(whh.len(), d);
            (
                wh.iter().map(|&x| x.clamp(0.0, cap)).collect::<Vec<_>>(),
                whh.iter().map(|&x| x.clamp(0.0, cap)).collect::<Vec<_>>(),
            )
        }
        None => (vec![0.0; d], vec![0.0; d]),
    };
    let mut ws = Workspace::new(d);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        let step_diff = step(&mut h, &mut hhat, u, t, reduced, params.damping, &mut ws);
        let balance_diff = rebalance(&mut h, &mut hhat, &reduced.alpha, t);
        iterations += 1;
        if step_diff.max(balance_diff) < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            t,
            iterations,
            last_h: h,
            last_hhat: hhat,
        });
    }
    let psi = psi_of(&h, &hhat, u, t, reduced);
    let interior = dot(&reduced.alpha, &h) >= params.vanish_threshold;
    Ok(FixedPointSolution {
        u,
        t,
        h,
        hhat,
        psi,
        iterations,
        converged,
        interior,
    })
}

/// Continues the solution from `t0` down to `t_min` along the geometric
/// schedule `t_k = t0 2^-k`, warm-starting each level from the previous one,
/// and returns the `t_min` solution.
pub fn t_continuation(
    u: f64,
    reduced: &ReducedPair,
    params: &SolverParams,
    warm_start: Option<(&[f64], &[f64])>,
) -> Result<FixedPointSolution> {
    let mut levels = Vec::new();
    let mut t = params.t0;
    while t > params.t_min {
        levels.push(t);
        t *= 0.5;
    }
    levels.push(params.t_min);
    let mut current: Option<FixedPointSolution> = None;
    for &level in &levels {
        let ws = match &current {
            Some(sol) => Some((sol.h.as_slice(), sol.hhat.as_slice())),
            None => warm_start,
        };
        current = Some(solve(u, level, reduced, params, ws)?);
    }
    Ok(current.expect("schedule has at least one level"))
}

/// The off-diagonal resolvent components `b_c` at a point `z` with
/// `|z|^2 = solution.u`: `-z psi_c` inside the support and `-1/conj(z)`
/// outside.
pub fn b_values(
    solution: &FixedPointSolution,
    z: num_complex::Complex64,
) -> Result<Vec<num_complex::Complex64>> {
    let u = z.norm_sqr();
    assert!(
        (u - solution.u).abs() <= 1e-9 * solution.u.max(1.0),
        "|z|^2 = {u} does not match the solution's u = {}",
        solution.u
    );
    if solution.interior {
        Ok(solution.psi.iter().map(|&p| -z * p).collect())
    } else if z == num_complex::Complex64::new(0.0, 0.0) {
        Err(Error::ZeroZOutsideSupport)
    } else {
        let b = -z.conj().inv();
        Ok(vec![b; solution.psi.len()])
    }
}
