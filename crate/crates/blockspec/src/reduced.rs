//! Reduced D x D matrices `G` and `Ghat` and their Perron-Frobenius data.
//!
//! `G_cd = alpha_c g_cd^2` and `Ghat_cd = alpha_c g_dc^2`; both have the same
//! spectral radius, whose square root is the radius of the limiting spectral
//! support.

use crate::block_model::BlockStructure;
use crate::error::{Error, Result};

/// Successive-iterate sup-distance tolerance for power iteration. The
/// eigenvalue estimate carries an error of roughly this size times the
/// eigenvalue, independent of the spectral gap, so it sits two orders below
/// the 1e-12 accuracy the eigenvalue is held to.
const POWER_TOL: f64 = 1e-14;
/// Residual `||Mv - lambda v||_inf` required of a converged eigenpair.
const POWER_RESIDUAL_TOL: f64 = 1e-11;
const POWER_MAX_ITER: usize = 100_000;

/// Dense row-major D x D matrix of positive reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            data.extend_from_slice(row);
        }
        SquareMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    /// `M v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.dim)) {
            *o = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
    }

    /// `M^T v`, i.e. the left action `v^T M` of a row vector.
    pub fn apply_transposed(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (x, row) in v.iter().zip(self.data.chunks_exact(self.dim)) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m * x;
            }
        }
    }

    pub fn transpose(&self) -> SquareMatrix {
        let mut data = vec![0.0; self.dim * self.dim];
        for r in 0..self.dim {
            for c in 0..self.dim {
                data[c * self.dim + r] = self.get(r, c);
            }
        }
        SquareMatrix {
            dim: self.dim,
            data,
        }
    }
}

/// The pair `(G, Ghat)` with the Perron-Frobenius eigenpair of `G`.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    pub g_mat: SquareMatrix,
    pub ghat_mat: SquareMatrix,
    /// Block fractions of the originating structure.
    pub alpha: Vec<f64>,
    /// Perron-Frobenius eigenvalue of `G`; equals the spectral radius of both
    /// matrices.
    pub pf_value: f64,
    /// Perron-Frobenius eigenvector of `G`, entries positive, summing to 1.
    pub pf_vector: Vec<f64>,
}

impl ReducedPair {
    pub fn dim(&self) -> usize {
        self.g_mat.dim()
    }

    /// Radius of the limiting spectral support, `sqrt(rho(G))`.
    pub fn support_radius(&self) -> f64 {
        self.pf_value.sqrt()
    }
}

/// Builds `G` and `Ghat` entrywise and computes the Perron-Frobenius
/// eigenpair of `G` by power iteration.
pub fn build_reduced(structure: &BlockStructure) -> Result<ReducedPair> {
    structure
        .validate()
        .map_err(|e| Error::InvalidStructure(e.to_string()))?;
    let d = structure.block_count();
    let mut g_rows = vec![vec![0.0; d]; d];
    let mut ghat_rows = vec![vec![0.0; d]; d];
    for c in 0..d {
        for e in 0..d {
            g_rows[c][e] = structure.alpha[c] * structure.g_entry(c, e).powi(2);
            ghat_rows[c][e] = structure.alpha[c] * structure.g_entry(e, c).powi(2);
        }
    }
    let g_mat = SquareMatrix::from_rows(g_rows);
    let ghat_mat = SquareMatrix::from_rows(ghat_rows);
    let (pf_value, pf_vector) = perron_eigenpair(&g_mat)?;
    Ok(ReducedPair {
        g_mat,
        ghat_mat,
        alpha: structure.alpha.clone(),
        pf_value,
        pf_vector,
    })
}

/// Largest eigenvalue and eigenvector of a strictly positive matrix by power
/// iteration from the all-ones vector. The vector is normalized to sum 1;
/// the returned pair satisfies `||Mv - lambda v||_inf <= 1e-10`.
pub fn perron_eigenpair(m: &SquareMatrix) -> Result<(f64, Vec<f64>)> {
    let d = m.dim();
    if d == 0 || m.data.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::NonPositiveMatrix);
    }
    let mut v = vec![1.0 / d as f64; d];
    let mut mv = vec![0.0; d];
    let mut value = 0.0;
    let mut converged = false;
    for _ in 0..POWER_MAX_ITER {
        m.apply(&v, &mut mv);
        let sum: f64 = mv.iter().sum();
        value = sum; // sum(Mv) with sum(v) = 1 estimates the eigenvalue
        let mut diff = 0.0f64;
        for (w, x) in mv.iter_mut().zip(v.iter()) {
            *w /= sum;
            diff = diff.max((*w - x).abs());
        }
        std::mem::swap(&mut v, &mut mv);
        if diff < POWER_TOL {
            m.apply(&v, &mut mv);
            value = mv.iter().sum();
            let residual = mv
                .iter()
                .zip(v.iter())
                .map(|(w, x)| (w - value * x).abs())
                .fold(0.0f64, f64::max);
            if residual <= POWER_RESIDUAL_TOL * value.max(1.0) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            t: 0.0,
            iterations: POWER_MAX_ITER,
            last_h: v,
            last_hhat: Vec::new(),
        });
    }
    if d <= 2 {
        // built-in closed-form oracle for tiny matrices
        let closed = if d == 1 {
            m.get(0, 0)
        } else {
            let tr = m.get(0, 0) + m.get(1, 1);
            let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
            0.5 * (tr + (tr * tr - 4.0 * det).sqrt())
        };
        debug_assert!(
            (value - closed).abs() <= 1e-12 * closed.max(1.0),
            "power iteration {value} vs closed form {closed}"
        );
    }
    Ok((value, v))
}

/// Predicted spectral radius `sqrt(rho(G))` of the limiting measure.
pub fn spectral_radius(structure: &BlockStructure) -> Result<f64> {
    Ok(build_reduced(structure)?.support_radius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::EntryDistribution;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fig1a() -> BlockStructure {
        BlockStructure::new(
            vec![0.3, 0.7],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            EntryDistribution::ComplexGaussian,
        )
        .unwrap()
    }

    /// Closed-form largest eigenvalue of a 2x2 matrix.
    fn eig2x2(m: &SquareMatrix) -> f64 {
        let tr = m.get(0, 0) + m.get(1, 1);
        let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
        0.5 * (tr + (tr * tr - 4.0 * det).sqrt())
    }

    #[test]
    fn scalar_case() {
        let s = BlockStructure::new(
            vec![1.0],
            vec![vec![1.5]],
            EntryDistribution::ComplexGaussian,
        )
        .unwrap();
        let r = build_reduced(&s).unwrap();
        assert_abs_diff_eq!(r.pf_value, 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(r.support_radius(), 1.5, epsilon = 1e-14);
        assert_eq!(r.pf_vector, vec![1.0]);
    }

    #[test]
    fn reduced_entries_match_formula() {
        let r = build_reduced(&fig1a()).unwrap();
        let g_expect = [[0.3, 1.2], [6.3, 11.2]];
        let ghat_expect = [[0.3, 2.7], [2.8, 11.2]];
        for c in 0..2 {
            for d in 0..2 {
                assert_abs_diff_eq!(r.g_mat.get(c, d), g_expect[c][d], epsilon = 1e-15);
                assert_abs_diff_eq!(r.ghat_mat.get(c, d), ghat_expect[c][d], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn power_iteration_matches_2x2_closed_form() {
        let r = build_reduced(&fig1a()).unwrap();
        let closed = eig2x2(&r.g_mat);
        assert_abs_diff_eq!(r.pf_value, closed, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pf_value, 11.854301761872524, epsilon = 1e-9);
        assert_abs_diff_eq!(r.support_radius(), 3.443007662186148, epsilon = 1e-9);
        // eigenpair residual
        let mut mv = vec![0.0; 2];
        r.g_mat.apply(&r.pf_vector, &mut mv);
        for c in 0..2 {
            assert_abs_diff_eq!(mv[c], r.pf_value * r.pf_vector[c], epsilon = 1e-10);
            assert!(r.pf_vector[c] > 0.0);
        }
        assert_abs_diff_eq!(r.pf_vector.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn transpose_preserves_value() {
        let r = build_reduced(&fig1a()).unwrap();
        let (vt, _) = perron_eigenpair(&r.g_mat.transpose()).unwrap();
        assert_abs_diff_eq!(vt, r.pf_value, epsilon = 1e-10);
    }

    #[test]
    fn rejects_non_positive() {
        let m = SquareMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(
            perron_eigenpair(&m),
            Err(Error::NonPositiveMatrix)
        ));
    }

    #[test]
    fn column_or_row_dependent_g_has_hilbert_schmidt_radius() {
        // g_cd = gamma_d (or gamma_c) for all c: rho(G) = sum_d alpha_d gamma_d^2
        let alpha = vec![0.2, 0.5, 0.3];
        let gamma = [1.3, 0.4, 2.2];
        let expect: f64 = alpha
            .iter()
            .zip(gamma.iter())
            .map(|(a, c)| a * c * c)
            .sum();

        let by_column = vec![gamma.to_vec(); 3];
        let s = BlockStructure::new(alpha.clone(), by_column, EntryDistribution::ComplexGaussian)
            .unwrap();
        assert_abs_diff_eq!(
            spectral_radius(&s).unwrap().powi(2),
            expect,
            epsilon = 1e-10
        );

        let by_row: Vec<Vec<f64>> = gamma.iter().map(|&c| vec![c; 3]).collect();
        let s = BlockStructure::new(alpha, by_row, EntryDistribution::ComplexGaussian).unwrap();
        assert_abs_diff_eq!(
            spectral_radius(&s).unwrap().powi(2),
            expect,
            epsilon = 1e-10
        );
    }

    fn arb_structure(max_d: usize) -> impl Strategy<Value = BlockStructure> {
        (1..=max_d)
            .prop_flat_map(|d| {
                (
                    proptest::collection::vec(0.1f64..1.0, d),
                    proptest::collection::vec(0.2f64..3.0, d * d),
                )
            })
            .prop_map(|(raw_alpha, raw_g)| {
                let total: f64 = raw_alpha.iter().sum();
                let alpha: Vec<f64> = raw_alpha.iter().map(|a| a / total).collect();
                let d = alpha.len();
                let g: Vec<Vec<f64>> = (0..d).map(|c| raw_g[c * d..(c + 1) * d].to_vec()).collect();
                BlockStructure::new(alpha, g, EntryDistribution::ComplexGaussian).unwrap()
            })
    }

    proptest! {
        #[test]
        fn g_and_ghat_share_spectral_radius(s in arb_structure(6)) {
            let r = build_reduced(&s).unwrap();
            let (vhat, vec_hat) = perron_eigenpair(&r.ghat_mat).unwrap();
            prop_assert!((r.pf_value - vhat).abs() <= 1e-10 * r.pf_value.max(1.0));
            prop_assert!(vec_hat.iter().all(|&x| x > 0.0));
        }

        #[test]
        fn radius_invariant_under_block_permutation(s in arb_structure(5), rot in 0usize..5) {
            let d = s.block_count();
            let shift = rot % d;
            let perm: Vec<usize> = (0..d).map(|c| (c + shift) % d).collect();
            let alpha: Vec<f64> = perm.iter().map(|&p| s.alpha[p]).collect();
            let g: Vec<Vec<f64>> = perm
                .iter()
                .map(|&p| perm.iter().map(|&q| s.g_entry(p, q)).collect())
                .collect();
            let permuted =
                BlockStructure::new(alpha, g, EntryDistribution::ComplexGaussian).unwrap();
            let r1 = spectral_radius(&s).unwrap();
            let r2 = spectral_radius(&permuted).unwrap();
            prop_assert!((r1 - r2).abs() <= 1e-10 * r1.max(1.0));
        }

        #[test]
        fn radius_monotone_in_g(s in arb_structure(4), c in 0usize..4, e in 0usize..4) {
            let d = s.block_count();
            let (c, e) = (c % d, e % d);
            let mut g = s.g.clone();
            g[c][e] *= 1.25;
            let bumped =
                BlockStructure::new(s.alpha.clone(), g, EntryDistribution::ComplexGaussian)
                    .unwrap();
            prop_assert!(spectral_radius(&bumped).unwrap() > spectral_radius(&s).unwrap());
        }
    }
}
