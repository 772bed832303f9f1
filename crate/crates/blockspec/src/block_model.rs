//! Block-structured random matrix model: parameters, block geometry, and
//! deterministic sampling of finite-N instances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(alpha) == 1`.
pub const ALPHA_SUM_TOL: f64 = 1e-12;

/// Entry law for the underlying iid noise, always with mean 0 and variance 1/N.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDistribution {
    RealGaussian,
    #[default]
    ComplexGaussian,
    Rademacher,
}

/// Parameters of the block model: `D` blocks with fractions `alpha` and
/// per-block standard-deviation multipliers `g`.
///
/// Entry `(i, j)` of a sampled matrix is `g[c_i][c_j] * J_ij` where `J_ij`
/// is iid with mean 0 and variance 1/N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStructure {
    /// Block fractions; strictly positive, summing to 1.
    pub alpha: Vec<f64>,
    /// D x D matrix of strictly positive standard-deviation multipliers.
    pub g: Vec<Vec<f64>>,
    /// Entry law of the iid noise.
    #[serde(default)]
    pub distribution: EntryDistribution,
}

impl BlockStructure {
    /// Builds and validates a structure.
    pub fn new(alpha: Vec<f64>, g: Vec<Vec<f64>>, distribution: EntryDistribution) -> Result<Self> {
        let s = BlockStructure {
            alpha,
            g,
            distribution,
        };
        s.validate()?;
        Ok(s)
    }

    /// Number of blocks per axis.
    pub fn block_count(&self) -> usize {
        self.alpha.len()
    }

    /// `g[c][d]` with 0-based block labels.
    pub fn g_entry(&self, c: usize, d: usize) -> f64 {
        self.g[c][d]
    }

    /// Checks every structural invariant: `D >= 1`, all `alpha_c > 0` with
    /// `sum(alpha) = 1` within `1e-12`, and all `g_cd > 0`.
    pub fn validate(&self) -> Result<()> {
        let d = self.alpha.len();
        if d == 0 {
            return Err(Error::InvalidD);
        }
        for (c, &a) in self.alpha.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::InvalidAlpha(format!(
                    "alpha[{c}] = {a} must be finite and strictly positive"
                )));
            }
        }
        let sum: f64 = self.alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::InvalidAlpha(format!(
                "alpha sums to {sum}, expected 1 within {ALPHA_SUM_TOL:e}"
            )));
        }
        if self.g.len() != d {
            return Err(Error::InvalidG(format!(
                "g has {} rows, expected {d}",
                self.g.len()
            )));
        }
        for (c, row) in self.g.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidG(format!(
                    "g row {c} has {} entries, expected {d}",
                    row.len()
                )));
            }
            for (e, &v) in row.iter().enumerate() {
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::InvalidG(format!(
                        "g[{c}][{e}] = {v} must be finite and strictly positive"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Block sizes for dimension `n`: each block starts at `floor(alpha_c n)`
    /// and the `n - sum(floor(alpha_c n))` leftover rows are assigned to
    /// blocks in increasing label order, one each.
    pub fn block_sizes(&self, n: usize) -> Vec<usize> {
        let mut sizes: Vec<usize> = self
            .alpha
            .iter()
            .map(|&a| (a * n as f64).floor() as usize)
            .collect();
        let assigned: usize = sizes.iter().sum();
        // at most D - 1 rows are left over since each floor drops less than 1
        debug_assert!(n - assigned < sizes.len());
        for size in sizes.iter_mut().take(n - assigned) {
            *size += 1;
        }
        sizes
    }

    /// 0-based block label of each row for dimension `n`, derived from
    /// [`Self::block_sizes`].
    pub fn row_labels(&self, n: usize) -> Vec<usize> {
        let sizes = self.block_sizes(n);
        let mut labels = Vec::with_capacity(n);
        for (c, &s) in sizes.iter().enumerate() {
            labels.extend(std::iter::repeat_n(c, s));
        }
        labels
    }
}

/// Block label (1-based) of row `i` (1-based) among `n` by the interval rule:
/// the unique `c` with `i/n` in `(sum_{d<c} alpha_d, sum_{d<=c} alpha_d]`.
pub fn block_index(i: usize, n: usize, alpha: &[f64]) -> Result<usize> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let x = i as f64 / n as f64;
    let mut cum = 0.0;
    for (c, &a) in alpha.iter().enumerate() {
        cum += a;
        if x <= cum {
            return Ok(c + 1);
        }
    }
    // x can exceed the accumulated sum only through roundoff at i = n.
    Ok(alpha.len())
}

/// One realization of the model with its sampling key.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrix {
    pub n: usize,
    /// Row-major, length `n * n`.
    pub entries: Vec<Complex64>,
    pub block_sizes: Vec<usize>,
    pub seed: u64,
    pub trial_index: u64,
}

impl SampledMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }
}

/// Samples an `n x n` instance. The output is a pure function of
/// `(structure, n, seed, trial_index)`: each entry is generated from its own
/// counter-based stream keyed by `(seed, trial_index, i, j)`, so the result
/// does not depend on evaluation order or thread count.
pub fn sample_matrix(
    structure: &BlockStructure,
    n: usize,
    seed: u64,
    trial_index: u64,
) -> Result<SampledMatrix> {
    structure
        .validate()
        .map_err(|e| Error::InvalidStructure(e.to_string()))?;
    if n < structure.block_count() {
        return Err(Error::InvalidStructure(format!(
            "n = {n} is smaller than the block count D = {}",
            structure.block_count()
        )));
    }
    let labels = structure.row_labels(n);
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let g = structure.g_entry(labels[i], labels[j]);
            let mut rng = EntryRng::new(seed, trial_index, i as u64, j as u64);
            let noise = match structure.distribution {
                EntryDistribution::RealGaussian => {
                    let (z0, _) = rng.standard_normal_pair();
                    Complex64::new(z0 * inv_sqrt_n, 0.0)
                }
                EntryDistribution::ComplexGaussian => {
                    let (z0, z1) = rng.standard_normal_pair();
                    let s = inv_sqrt_n / std::f64::consts::SQRT_2;
                    Complex64::new(z0 * s, z1 * s)
                }
                EntryDistribution::Rademacher => {
                    let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign * inv_sqrt_n, 0.0)
                }
            };
            entries.push(g * noise);
        }
    }
    Ok(SampledMatrix {
        n,
        entries,
        block_sizes: structure.block_sizes(n),
        seed,
        trial_index,
    })
}

/// SplitMix64 finalizer; bijective on u64.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const SPLITMIX_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Counter-based stream for one matrix entry. The key tuple is absorbed
/// through the SplitMix64 finalizer, then draws advance an independent
/// SplitMix64 sequence.
#[derive(Debug, Clone)]
pub struct EntryRng {
    state: u64,
}

impl EntryRng {
    pub fn new(seed: u64, trial_index: u64, i: u64, j: u64) -> Self {
        let mut s = mix64(seed ^ 0x243f_6a88_85a3_08d3);
        s = mix64(s ^ trial_index);
        s = mix64(s ^ i);
        s = mix64(s ^ j);
        EntryRng { state: s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(SPLITMIX_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `(0, 1]`; never returns 0, so it is safe under `ln`.
    #[inline]
    fn uniform_open(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.uniform_open().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.uniform();
        (r * theta.cos(), r * theta.sin())
    }
}
