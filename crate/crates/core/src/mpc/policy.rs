use std::sync::Arc;

use crate::error::{check_dim, Result};
use crate::models::{DiscreteModel, Policy};

use super::cost::CostSpec;
use super::solver::{solve_ocp, OcpOptions, OcpSolution};

/// What the controller believes about future disturbances.
#[derive(Debug, Clone)]
enum Forecast {
    /// `w = 0` over the whole horizon.
    Zero,
    /// The realized episode disturbance, previewed up to the horizon and
    /// zero past the end of the episode.
    Preview(Arc<Vec<Vec<f64>>>),
}

/// Solver bookkeeping accumulated over one episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub solves: usize,
    pub iterations: usize,
    /// Solves that returned without meeting the tolerance.
    pub unconverged: usize,
}

/// Receding-horizon controller. One instance carries the warm start of a
/// single episode; use a fresh instance per scenario.
#[derive(Debug, Clone)]
pub struct MpcPolicy {
    model: DiscreteModel,
    cost: CostSpec,
    options: OcpOptions,
    forecast: Forecast,
    warm_start: Option<Vec<Vec<f64>>>,
    stats: SolveStats,
    last: Option<OcpSolution>,
}

/// Controller that plans with `w = 0`.
pub fn nominal_policy(model: &DiscreteModel, cost: &CostSpec, opts: &OcpOptions) -> Result<MpcPolicy> {
    MpcPolicy::new(model, cost, opts, Forecast::Zero)
}

/// Controller that plans with `w_traj(k..k+H)`, zero-padded.
pub fn oracle_policy(
    model: &DiscreteModel,
    cost: &CostSpec,
    opts: &OcpOptions,
    w_traj: Arc<Vec<Vec<f64>>>,
) -> Result<MpcPolicy> {
    for w in w_traj.iter() {
        check_dim("oracle disturbance", model.disturbance_dim(), w.len())?;
    }
    MpcPolicy::new(model, cost, opts, Forecast::Preview(w_traj))
}

impl MpcPolicy {
    fn new(model: &DiscreteModel, cost: &CostSpec, opts: &OcpOptions, forecast: Forecast) -> Result<Self> {
        opts.validate()?;
        cost.validate()?;
        check_dim("cost state dimension", model.state_dim(), cost.state_dim())?;
        check_dim("cost input dimension", model.input_dim(), cost.input_dim())?;
        check_dim("input box", model.input_dim(), opts.input_box.dim())?;
        let mut options = opts.clone();
        let warm_start = options.warm_start.take();
        Ok(Self {
            model: model.clone(),
            cost: cost.clone(),
            options,
            forecast,
            warm_start,
            stats: SolveStats::default(),
            last: None,
        })
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn last_solution(&self) -> Option<&OcpSolution> {
        self.last.as_ref()
    }

    /// Replace the warm start used by the next call.
    pub fn set_warm_start(&mut self, warm_start: Option<Vec<Vec<f64>>>) {
        self.warm_start = warm_start;
    }

    /// Disturbance forecast for the solve at step `k`.
    pub fn forecast_at(&self, k: usize) -> Vec<Vec<f64>> {
        let h = self.options.horizon;
        let d = self.model.disturbance_dim();
        match &self.forecast {
            Forecast::Zero => vec![vec![0.0; d]; h],
            Forecast::Preview(w) => (k..k + h).map(|i| w.get(i).cloned().unwrap_or_else(|| vec![0.0; d])).collect(),
        }
    }

    /// Full solve at `(x, k)` without touching the warm-start state.
    pub fn plan(&self, x: &[f64], k: usize) -> Result<OcpSolution> {
        let mut opts = self.options.clone();
        opts.warm_start = self.warm_start.clone();
        solve_ocp(&self.model, x, &self.forecast_at(k), &self.cost, &opts)
    }
}

impl Policy for MpcPolicy {
    fn act(&mut self, x: &[f64], k: usize) -> Result<Vec<f64>> {
        let sol = self.plan(x, k)?;
        self.stats.solves += 1;
        self.stats.iterations += sol.iterations;
        if !sol.converged() {
            self.stats.unconverged += 1;
            log::trace!("solve at step {k} ended with {:?}", sol.status);
        }
        // shift by one, repeating the last input
        let mut next = sol.inputs[1..].to_vec();
        next.push(sol.inputs[sol.inputs.len() - 1].clone());
        self.warm_start = Some(next);
        let u = sol.inputs[0].clone();
        self.last = Some(sol);
        Ok(u)
    }
}
