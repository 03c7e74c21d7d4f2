//! Randomized dependence coefficient: canonical correlation between random
//! sinusoidal features of the empirical copulas of two samples.
//!
//! All matrices are `m x d` with one observation per row.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{tag, RandomStream};

fn default_k() -> usize {
    20
}
fn default_s() -> f64 {
    1.0 / 6.0
}
fn default_reg() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdcParams {
    /// Random features per sample.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Variance of the projection weights.
    #[serde(default = "default_s")]
    pub s: f64,
    /// Ridge added to both auto-covariance blocks.
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RdcParams {
    fn default() -> Self {
        Self {
            k: default_k(),
            s: default_s(),
            reg: default_reg(),
            seed: 0,
        }
    }
}

impl RdcParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("rdc needs at least one random feature".into()));
        }
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::Config(format!("rdc feature scale must be positive, got {}", self.s)));
        }
        if !(self.reg >= 0.0) {
            return Err(Error::Config(format!("rdc regularizer must be nonnegative, got {}", self.reg)));
        }
        Ok(())
    }
}

/// Average ranks divided by `m`, column by column.
pub fn empirical_copula(data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = data.nrows();
    if m < 2 {
        return Err(Error::Config(format!("empirical copula needs at least 2 rows, got {m}")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("empirical copula of non-finite data".into()));
    }
    let mut out = DMatrix::zeros(m, data.ncols());
    let mut order: Vec<usize> = (0..m).collect();
    for c in 0..data.ncols() {
        let col = data.column(c);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && col[order[end]] == col[order[start]] {
                end += 1;
            }
            // 1-based positions start+1 ..= end share their mean
            let rank = 0.5 * ((start + 1) + end) as f64 / m as f64;
            for &row in &order[start..end] {
                out[(row, c)] = rank;
            }
            start = end;
        }
    }
    Ok(out)
}

/// `sin(copula w_j + b_j)` for `j = 1..k`, with `w_j ~ N(0, s I)` and
/// `b_j ~ U(0, 2 pi)` drawn from `stream`.
pub fn random_features(copula: &DMatrix<f64>, params: &RdcParams, stream: &RandomStream) -> Result<DMatrix<f64>> {
    params.validate()?;
    let d = copula.ncols();
    let mut rng = stream.rng();
    let normal = Normal::new(0.0, params.s.sqrt()).map_err(|e| Error::Config(e.to_string()))?;
    let w = DMatrix::from_fn(d, params.k, |_, _| normal.sample(&mut rng));
    let b: Vec<f64> = (0..params.k).map(|_| rng.random::<f64>() * TAU).collect();
    let mut proj = copula * w;
    for (j, mut col) in proj.column_iter_mut().enumerate() {
        col.apply(|v| *v = (*v + b[j]).sin());
    }
    Ok(proj)
}

fn centered(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = a.clone();
    for mut col in c.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    c
}

/// `C^{-1/2}`-like whitening factor `W` with `W' C W = I` on the range of
/// `C`: the inverse Cholesky factor, or the eigen pseudo-inverse square
/// root when `C` is singular.
fn whitening(c: DMatrix<f64>) -> DMatrix<f64> {
    let n = c.nrows();
    if let Some(ch) = c.clone().cholesky() {
        if let Some(inv) = ch.l().try_inverse() {
            if inv.iter().all(|v| v.is_finite()) {
                return inv.transpose();
            }
        }
    }
    let eig = SymmetricEigen::new(c);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let tol = top * n as f64 * f64::EPSILON;
    let mut w = eig.eigenvectors.clone();
    for (j, mut col) in w.column_iter_mut().enumerate() {
        let l = eig.eigenvalues[j];
        col *= if l > tol { 1.0 / l.sqrt() } else { 0.0 };
    }
    w
}

/// Largest canonical correlation between the columns of `a` and `b`, with
/// ridge `reg` on both auto-covariances, clipped to `[0, 1]`.
pub fn largest_canonical_correlation(a: &DMatrix<f64>, b: &DMatrix<f64>, reg: f64) -> Result<f64> {
    let m = a.nrows();
    if m < 2 || b.nrows() != m {
        return Err(Error::Dimension {
            context: "canonical correlation rows",
            expected: m.max(2),
            actual: b.nrows(),
        });
    }
    let (a, b) = (centered(a), centered(b));
    let scale = 1.0 / (m - 1) as f64;
    let mut caa = a.transpose() * &a * scale;
    let mut cbb = b.transpose() * &b * scale;
    let cab = a.transpose() * &b * scale;
    if caa.iter().chain(cbb.iter()).chain(cab.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCovariance);
    }
    for i in 0..caa.nrows() {
        caa[(i, i)] += reg;
    }
    for i in 0..cbb.nrows() {
        cbb[(i, i)] += reg;
    }
    let t = whitening(caa).transpose() * cab * whitening(cbb);
    let sv = t.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if !top.is_finite() {
        return Err(Error::NonFiniteCovariance);
    }
    Ok(top.clamp(0.0, 1.0))
}

/// Copula columns that actually vary.
fn informative_columns(copula: &DMatrix<f64>) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..copula.ncols())
        .filter(|&c| {
            let col = copula.column(c);
            col.iter().any(|v| *v != col[0])
        })
        .collect();
    copula.select_columns(&keep)
}

/// Dependence between the rows of `x` and `y`, in `[0, 1]`.
///
/// Constant columns carry no information and are dropped after the copula
/// step; when nothing varies on either side the result is 0.
pub fn rdc(x: &DMatrix<f64>, y: &DMatrix<f64>, params: &RdcParams) -> Result<f64> {
    params.validate()?;
    if x.nrows() != y.nrows() {
        return Err(Error::Dimension {
            context: "rdc sample count",
            expected: x.nrows(),
            actual: y.nrows(),
        });
    }
    let cx = informative_columns(&empirical_copula(x)?);
    let cy = informative_columns(&empirical_copula(y)?);
    if cx.ncols() == 0 || cy.ncols() == 0 {
        return Ok(0.0);
    }
    let fx = random_features(&cx, params, &RandomStream::new(params.seed, vec![tag::RDC_FEATURES_X]))?;
    let fy = random_features(&cy, params, &RandomStream::new(params.seed, vec![tag::RDC_FEATURES_Y]))?;
    largest_canonical_correlation(&fx, &fy, params.reg)
}
