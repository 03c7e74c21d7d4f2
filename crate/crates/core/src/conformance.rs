//! Disturbance-set identification from measured data.
//!
//! With full-state measurement and additive disturbances, a box `W` makes
//! the model reachset-conformant exactly when every one-step residual lies
//! in `W`, so the tightest conformant box is the interval hull of the
//! residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::interval::{interval_hull, IntervalBox};
use crate::models::DiscreteModel;
use crate::trajectory::Trajectory;

/// Per-step disturbance realizations recovered from data, restricted to
/// the model's disturbed indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSet {
    pub residuals: Vec<Vec<f64>>,
    /// `(trajectory, step)` of each row.
    pub source: Vec<(usize, usize)>,
    pub dim: usize,
}

impl ResidualSet {
    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

pub(crate) fn check_trajectory(model: &DiscreteModel, t: &Trajectory) -> Result<()> {
    check_dim("measured state dimension", model.state_dim(), t.state_dim())?;
    if let Some(m) = t.input_dim() {
        check_dim("measured input dimension", model.input_dim(), m)?;
    }
    Ok(())
}

/// `x(k+1) - f(x(k), u(k), 0)` on the disturbed indices, for every step of
/// every trajectory, stacked in (trajectory, step) order.
pub fn extract_residuals(model: &DiscreteModel, measured: &[Trajectory]) -> Result<ResidualSet> {
    let idx = model.disturbed_indices();
    let per_traj: Vec<Vec<Vec<f64>>> = measured
        .par_iter()
        .enumerate()
        .map(|(m, t)| {
            let wrap = |e| Error::in_trajectory(m, e);
            check_trajectory(model, t).map_err(wrap)?;
            let s = t.states();
            (0..t.steps())
                .map(|k| {
                    let pred = model.step_nominal(&s[k], &t.inputs()[k]).map_err(|e| wrap(Error::at_step(k, e)))?;
                    let row: Vec<f64> = idx.iter().map(|&i| s[k + 1][i] - pred[i]).collect();
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(wrap(Error::at_step(k, Error::NonFiniteRollout)));
                    }
                    Ok(row)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut residuals = Vec::new();
    let mut source = Vec::new();
    for (m, rows) in per_traj.into_iter().enumerate() {
        for (k, r) in rows.into_iter().enumerate() {
            residuals.push(r);
            source.push((m, k));
        }
    }
    Ok(ResidualSet {
        residuals,
        source,
        dim: idx.len(),
    })
}

/// Interval hull of the residuals, each side pushed out by `margin` times
/// the dimension's width.
pub fn identify_disturbance_set(residuals: &ResidualSet, margin: f64) -> Result<IntervalBox> {
    if !(margin >= 0.0) {
        return Err(Error::Config(format!("conformance margin must be nonnegative, got {margin}")));
    }
    if residuals.is_empty() {
        return Err(Error::Empty("no residuals to identify a disturbance set from"));
    }
    Ok(interval_hull(&residuals.residuals)?.inflate(margin))
}

/// First residual found outside `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trajectory: usize,
    pub step: usize,
    pub dimension: usize,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub conformant: bool,
    pub checked_rows: usize,
    pub first_violation: Option<Violation>,
    /// Largest one-step prediction error outside the disturbed indices.
    /// Not part of the containment test, but a large value means the
    /// mismatch lives where the model assumes none.
    #[serde(default)]
    pub max_undisturbed_residual: f64,
}

/// One-step containment of every measured transition in `W`.
pub fn check_conformance(model: &DiscreteModel, w: &IntervalBox, measured: &[Trajectory]) -> Result<ConformanceReport> {
    check_dim("disturbance set", model.disturbance_dim(), w.dim())?;
    let rs = extract_residuals(model, measured)?;
    let first_violation = rs.residuals.iter().zip(&rs.source).find_map(|(r, &(trajectory, step))| {
        w.first_violation(r).map(|dimension| Violation {
            trajectory,
            step,
            dimension,
            residual: r.clone(),
        })
    });
    Ok(ConformanceReport {
        conformant: first_violation.is_none(),
        checked_rows: rs.len(),
        first_violation,
        max_undisturbed_residual: max_undisturbed_residual(model, measured)?,
    })
}

fn max_undisturbed_residual(model: &DiscreteModel, measured: &[Trajectory]) -> Result<f64> {
    let disturbed = model.disturbed_indices();
    let free: Vec<usize> = (0..model.state_dim()).filter(|i| !disturbed.contains(i)).collect();
    if free.is_empty() {
        return Ok(0.0);
    }
    let per_traj = measured
        .par_iter()
        .map(|t| {
            let s = t.states();
            let mut worst = 0.0_f64;
            for k in 0..t.steps() {
                let pred = model.step_nominal(&s[k], &t.inputs()[k])?;
                for &i in &free {
                    worst = worst.max((s[k + 1][i] - pred[i]).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_traj.into_iter().fold(0.0, f64::max))
}
