//! Learnability of the model error.
//!
//! If the one-step residual `r(k)` depends on the state-input pair
//! `z(k-1)` that produced it, the conditional mean of the residual given
//! `z` is not constant, so part of the error is a systematic model bias a
//! learner can absorb. Independent residuals are pure noise: no predictor
//! improves on the model. The randomized dependence coefficient between
//! stacked residuals and regressors measures which case holds.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformance::check_trajectory;
use crate::error::{Error, Result};
use crate::models::DiscreteModel;
use crate::rdc::{rdc, RdcParams};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnabilityReport {
    pub rho: f64,
    /// `per_pair[i][j] = rdc(R_i, Z_j)`.
    pub per_pair: Vec<Vec<f64>>,
    pub sample_count: usize,
    /// Standard deviation of each residual column.
    pub residual_std: Vec<f64>,
    /// Stacked residuals, one row per transition.
    #[serde(skip)]
    pub residuals: DMatrix<f64>,
    /// Stacked regressors `[x(k-1), u(k-1)]`.
    #[serde(skip)]
    pub regressors: DMatrix<f64>,
}

/// Full-state residuals `x(k) - f(x(k-1), u(k-1), 0)` and regressors
/// `[x(k-1), u(k-1)]`, stacked by trajectory and then step.
pub fn prediction_residuals(model: &DiscreteModel, measured: &[Trajectory]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = model.state_dim();
    let nu = model.input_dim();
    let blocks: Vec<Vec<(Vec<f64>, Vec<f64>)>> = measured
        .par_iter()
        .enumerate()
        .map(|(idx, t)| {
            check_trajectory(model, t).map_err(|e| Error::in_trajectory(idx, e))?;
            let s = t.states();
            (1..=t.steps())
                .map(|k| {
                    let u = &t.inputs()[k - 1];
                    let pred = model
                        .step_nominal(&s[k - 1], u)
                        .map_err(|e| Error::in_trajectory(idx, Error::at_step(k - 1, e)))?;
                    let r: Vec<f64> = (0..n).map(|i| s[k][i] - pred[i]).collect();
                    let z: Vec<f64> = s[k - 1].iter().chain(u).copied().collect();
                    Ok((r, z))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<&(Vec<f64>, Vec<f64>)> = blocks.iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::Empty("no measured transitions for the learnability test"));
    }
    let r = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
    let z = DMatrix::from_fn(rows.len(), n + nu, |i, j| rows[i].1[j]);
    Ok((r, z))
}

/// `rho = RDC(R, Z)` plus the residual-by-regressor dependence matrix.
pub fn run_learnability(model: &DiscreteModel, measured: &[Trajectory], params: &RdcParams) -> Result<LearnabilityReport> {
    params.validate()?;
    let (r, z) = prediction_residuals(model, measured)?;
    let rho = rdc(&r, &z, params)?;
    let pairs: Vec<(usize, usize)> = (0..r.ncols()).flat_map(|i| (0..z.ncols()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| rdc(&r.columns(i, 1).into_owned(), &z.columns(j, 1).into_owned(), params))
        .collect::<Result<_>>()?;
    let per_pair = values.chunks(z.ncols()).map(<[f64]>::to_vec).collect();
    let residual_std = (0..r.ncols())
        .map(|i| {
            let c = r.column(i);
            (c.variance() * r.nrows() as f64 / (r.nrows().max(2) - 1) as f64).sqrt()
        })
        .collect();
    Ok(LearnabilityReport {
        rho,
        per_pair,
        sample_count: r.nrows(),
        residual_std,
        residuals: r,
        regressors: z,
    })
}
