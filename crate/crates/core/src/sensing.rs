//! Sensing matrices, sparse test signals and recovery metrics.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with a `u64`. Independent
//! streams for sweep point `s`, trial `t` use [`stream_seed`]`(base, s, t)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative error below which a reconstruction counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 0.01;

const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Gaussian,
    /// Randomly oversampled partial DCT with refinement factor `F >= 1`.
    Dct {
        refinement: u32,
    },
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixKind::Gaussian => f.write_str("gaussian"),
            MatrixKind::Dct { refinement } => write!(f, "dct{refinement}"),
        }
    }
}

/// Accepts `gaussian`, `dct` (F = 1), or `dctF` / `dct:F`.
impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "gaussian" {
            return Ok(MatrixKind::Gaussian);
        }
        let bad = || Error::InvalidParameter {
            name: "matrix",
            value: f64::NAN,
            reason: "expected gaussian, dct, dctF or dct:F with F >= 1",
        };
        let rest = s.strip_prefix("dct").ok_or_else(bad)?;
        let rest = rest.strip_prefix(':').unwrap_or(rest);
        let refinement = if rest.is_empty() {
            1
        } else {
            rest.parse::<u32>().map_err(|_| bad())?
        };
        if refinement == 0 {
            return Err(bad());
        }
        Ok(MatrixKind::Dct { refinement })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub n: usize,
    pub k: usize,
    pub amp_lo: f64,
    pub amp_hi: f64,
    pub seed: u64,
}

impl SignalSpec {
    /// Amplitudes uniform on `[-5, 5)`.
    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            amp_lo: -5.0,
            amp_hi: 5.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::InvalidParameter {
                name: "k",
                value: self.k as f64,
                reason: "sparsity must satisfy 0 < k <= n",
            });
        }
        if !(self.amp_lo.is_finite() && self.amp_hi.is_finite() && self.amp_lo < self.amp_hi) {
            return Err(Error::InvalidParameter {
                name: "amp_lo",
                value: self.amp_lo,
                reason: "amplitude range must be finite with amp_lo < amp_hi",
            });
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `(stream, index)` under `base`: SplitMix64 applied to each
/// component in turn.
pub fn stream_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scales each column to unit l2 norm. Fails on a zero or non-finite column.
pub fn normalize_columns(a: &mut Array2<f64>) -> Result<()> {
    for (j, mut col) in a.axis_iter_mut(Axis(1)).enumerate() {
        let norm = col.dot(&col).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Dimension(format!("column {j} has norm {norm}")));
        }
        col.mapv_inplace(|v| v / norm);
    }
    Ok(())
}

/// An `m x n` sensing matrix with unit-norm columns.
pub fn gen_matrix(kind: MatrixKind, m: usize, n: usize, seed: u64) -> Result<Array2<f64>> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension(format!("matrix shape {m}x{n}")));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..MAX_REDRAWS {
        let mut a = match kind {
            MatrixKind::Gaussian => {
                Array2::from_shape_simple_fn((m, n), || rng.sample::<f64, _>(StandardNormal))
            }
            MatrixKind::Dct { refinement } => {
                if refinement == 0 {
                    return Err(Error::InvalidParameter {
                        name: "refinement",
                        value: 0.0,
                        reason: "DCT refinement factor must be >= 1",
                    });
                }
                let xi: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
                dct_matrix(&xi, n, refinement)
            }
        };
        if normalize_columns(&mut a).is_ok() {
            return Ok(a);
        }
    }
    Err(Error::Convergence {
        what: "non-degenerate sensing matrix draw",
        iterations: MAX_REDRAWS,
    })
}

/// `A_ij = cos(2 j pi xi_i / F) / sqrt(m)` with zero-based column index `j`,
/// before normalization.
pub fn dct_matrix(xi: &[f64], n: usize, refinement: u32) -> Array2<f64> {
    let m = xi.len();
    let scale = 1.0 / (m as f64).sqrt();
    let f = refinement as f64;
    Array2::from_shape_fn((m, n), |(i, j)| {
        scale * (2.0 * j as f64 * PI * xi[i] / f).cos()
    })
}

/// Largest absolute inner product between distinct columns.
pub fn mutual_coherence(a: ArrayView2<f64>) -> f64 {
    let g = a.t().dot(&a);
    let mut best: f64 = 0.0;
    for ((i, j), &v) in g.indexed_iter() {
        if i != j {
            best = best.max(v.abs());
        }
    }
    best
}

/// A `k`-sparse vector with uniformly random support and uniform amplitudes.
pub fn gen_signal(spec: &SignalSpec) -> Result<Array1<f64>> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let mut x = Array1::zeros(spec.n);
    let support = sample(&mut rng, spec.n, spec.k);
    for i in support.iter() {
        // A draw of exactly 0 would shrink the support; redraw it.
        let mut v = 0.0;
        while v == 0.0 {
            v = rng.random_range(spec.amp_lo..spec.amp_hi);
        }
        x[i] = v;
    }
    Ok(x)
}

/// `||x_hat - x|| / ||x||`.
pub fn relative_error(x_hat: ArrayView1<f64>, x: ArrayView1<f64>) -> Result<f64> {
    if x_hat.len() != x.len() {
        return Err(Error::Dimension(format!(
            "estimate has length {}, signal {}",
            x_hat.len(),
            x.len()
        )));
    }
    let norm = x.dot(&x).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let diff = &x_hat - &x;
    Ok(diff.dot(&diff).sqrt() / norm)
}

pub fn is_success(x_hat: ArrayView1<f64>, x: ArrayView1<f64>) -> Result<bool> {
    Ok(relative_error(x_hat, x)? < SUCCESS_THRESHOLD)
}

/// Row-major CSV, no header, shortest round-trip decimals.
pub fn write_matrix_csv<W: Write>(a: ArrayView2<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for row in a.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// One value per line.
pub fn write_vector_csv<W: Write>(x: ArrayView1<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for v in x.iter() {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
