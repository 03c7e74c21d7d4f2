//! Knowledge advantage: how much an MPC that previews the realized
//! disturbance improves on one that plans with `w = 0`, averaged over
//! sampled initial states and disturbance sequences.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::interval::IntervalBox;
use crate::models::{rollout_closed_loop, BenchmarkPair};
use crate::mpc::{nominal_policy, oracle_policy, total_cost};
use crate::random::{tag, RandomStream};
use crate::trajectory::Trajectory;

/// `delta = clamp(1 - c_star / c_nom, 0, 1)`, and 0 when `c_nom = 0`.
pub fn relative_cost_difference(c_nom: f64, c_star: f64) -> Result<f64> {
    Ok(raw_relative_cost_difference(c_nom, c_star)?.clamp(0.0, 1.0))
}

fn raw_relative_cost_difference(c_nom: f64, c_star: f64) -> Result<f64> {
    for c in [c_nom, c_star] {
        if c < 0.0 || c.is_nan() {
            return Err(Error::NegativeCost(c));
        }
    }
    if c_nom == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - c_star / c_nom)
}

/// True once the last batch moved `eta` by less than `epsilon`.
pub fn has_converged(history: &[f64], epsilon: f64) -> bool {
    match history {
        [.., prev, last] => (last - prev).abs() < epsilon,
        _ => false,
    }
}

/// How initial states and disturbance sequences are combined per batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `n_b` fresh `(x0, w)` pairs per batch.
    #[default]
    Joint,
    /// `n_i` initial states times `n_j` disturbance sequences per batch.
    CrossProduct,
}

fn default_n() -> usize {
    10
}
fn default_epsilon() -> f64 {
    1e-3
}
fn default_max_batches() -> usize {
    100
}
fn default_failure_limit() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeConfig {
    /// Initial states per batch (cross-product pairing only).
    #[serde(default = "default_n")]
    pub n_i: usize,
    /// Disturbance sequences per batch (cross-product pairing only).
    #[serde(default = "default_n")]
    pub n_j: usize,
    /// Scenarios per batch (joint pairing).
    #[serde(default = "default_n")]
    pub n_b: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_batches")]
    pub max_batches: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub pairing: Pairing,
    /// Largest tolerated fraction of failed scenarios.
    #[serde(default = "default_failure_limit")]
    pub failure_limit: f64,
    /// Keep closed-loop trajectories of this many leading scenarios.
    #[serde(default)]
    pub record_trajectories: usize,
}

impl Default for KnowledgeConfig {
    fn default() -> Self {
        Self {
            n_i: default_n(),
            n_j: default_n(),
            n_b: default_n(),
            epsilon: default_epsilon(),
            max_batches: default_max_batches(),
            master_seed: 0,
            pairing: Pairing::Joint,
            failure_limit: default_failure_limit(),
            record_trajectories: 0,
        }
    }
}

impl KnowledgeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios_per_batch() == 0 {
            return Err(Error::Config("a batch needs at least one scenario".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("convergence threshold epsilon must be positive".into()));
        }
        if self.max_batches < 2 {
            return Err(Error::Config("max_batches must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.failure_limit) {
            return Err(Error::Config("failure limit must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn scenarios_per_batch(&self) -> usize {
        match self.pairing {
            Pairing::Joint => self.n_b,
            Pairing::CrossProduct => self.n_i * self.n_j,
        }
    }

    /// `(initial-state id, disturbance id)` of scenario `s` in a batch.
    fn ids(&self, s: usize) -> (usize, usize) {
        match self.pairing {
            Pairing::Joint => (s, s),
            Pairing::CrossProduct => (s / self.n_j, s % self.n_j),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub batch: usize,
    pub index: usize,
    /// Which sampled initial state (`i`) and disturbance sequence (`j`).
    pub i: usize,
    pub j: usize,
    pub cost_nominal: f64,
    pub cost_oracle: f64,
    /// Clamped to `[0, 1]`.
    pub delta: f64,
    /// `1 - c_star / c_nom` before clamping.
    pub delta_raw: f64,
    /// Solves that hit the iteration cap or stalled (both controllers).
    pub unconverged_solves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFailure {
    pub batch: usize,
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTrajectories {
    pub batch: usize,
    pub index: usize,
    pub nominal: Trajectory,
    pub oracle: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeReport {
    pub eta: f64,
    /// Successful scenarios in (batch, index) order.
    pub scenarios: Vec<ScenarioResult>,
    pub failures: Vec<ScenarioFailure>,
    /// `eta` after each batch.
    pub history: Vec<f64>,
    pub converged: bool,
    pub batches_run: usize,
    pub total_solves: usize,
    pub unconverged_solves: usize,
    #[serde(skip)]
    pub trajectories: Vec<ScenarioTrajectories>,
}

impl KnowledgeReport {
    pub fn deltas(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.delta).collect()
    }
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum
    }
}

struct Outcome {
    result: ScenarioResult,
    solves: usize,
    trajectories: Option<(Trajectory, Trajectory)>,
}

fn run_scenario(
    bench: &BenchmarkPair,
    w_set: &IntervalBox,
    cfg: &KnowledgeConfig,
    batch: usize,
    index: usize,
    keep: bool,
) -> Result<Outcome> {
    let (i, j) = cfg.ids(index);
    let (b, i64_, j64) = (batch as u64, i as u64, j as u64);
    let x0 = bench
        .x0_set
        .sample_uniform(&RandomStream::new(cfg.master_seed, vec![b, i64_, tag::INITIAL_STATE]));
    let mut rng = RandomStream::new(cfg.master_seed, vec![b, j64, tag::DISTURBANCE]).rng();
    let w: Vec<Vec<f64>> = (0..bench.horizon_steps).map(|_| w_set.sample_with(&mut rng)).collect();
    let w = Arc::new(w);

    let model = &bench.model;
    let mut nominal = nominal_policy(model, &bench.cost, &bench.ocp)?;
    let t_nom = rollout_closed_loop(model, &x0, &mut nominal, bench.horizon_steps, Some(&w))?;
    let mut oracle = oracle_policy(model, &bench.cost, &bench.ocp, w.clone())?;
    let t_star = rollout_closed_loop(model, &x0, &mut oracle, bench.horizon_steps, Some(&w))?;

    let cost_nominal = total_cost(&bench.cost, &t_nom)?;
    let cost_oracle = total_cost(&bench.cost, &t_star)?;
    if !cost_nominal.is_finite() || !cost_oracle.is_finite() {
        return Err(Error::NonFiniteRollout);
    }
    let delta_raw = raw_relative_cost_difference(cost_nominal, cost_oracle)?;
    Ok(Outcome {
        result: ScenarioResult {
            batch,
            index,
            i,
            j,
            cost_nominal,
            cost_oracle,
            delta: delta_raw.clamp(0.0, 1.0),
            delta_raw,
            unconverged_solves: nominal.stats().unconverged + oracle.stats().unconverged,
        },
        solves: nominal.stats().solves + oracle.stats().solves,
        trajectories: keep.then_some((t_nom, t_star)),
    })
}

/// Batched Monte-Carlo estimate of `eta` on the benchmark's model with
/// disturbances drawn uniformly from `w_set`.
///
/// Scenario `(batch, index)` draws from its own random streams, so the
/// report is identical for any number of worker threads. Scenarios whose
/// simulation fails are excluded and listed; more than
/// `cfg.failure_limit` of them is an error.
pub fn run_knowledge_advantage(bench: &BenchmarkPair, w_set: &IntervalBox, cfg: &KnowledgeConfig) -> Result<KnowledgeReport> {
    cfg.validate()?;
    check_dim("disturbance set", bench.model.disturbance_dim(), w_set.dim())?;
    let per_batch = cfg.scenarios_per_batch();
    let mut report = KnowledgeReport {
        eta: 0.0,
        scenarios: Vec::new(),
        failures: Vec::new(),
        history: Vec::new(),
        converged: false,
        batches_run: 0,
        total_solves: 0,
        unconverged_solves: 0,
        trajectories: Vec::new(),
    };
    let mut sum = Kahan::default();

    for batch in 0..cfg.max_batches {
        let outcomes: Vec<Result<Outcome>> = (0..per_batch)
            .into_par_iter()
            .map(|index| {
                let keep = batch * per_batch + index < cfg.record_trajectories;
                run_scenario(bench, w_set, cfg, batch, index, keep)
            })
            .collect();
        for (index, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(o) => {
                    sum.add(o.result.delta);
                    report.total_solves += o.solves;
                    report.unconverged_solves += o.result.unconverged_solves;
                    if let Some((nominal, oracle)) = o.trajectories {
                        report.trajectories.push(ScenarioTrajectories {
                            batch,
                            index,
                            nominal,
                            oracle,
                        });
                    }
                    report.scenarios.push(o.result);
                }
                Err(e) => {
                    log::warn!("scenario ({batch}, {index}) excluded: {e}");
                    report.failures.push(ScenarioFailure {
                        batch,
                        index,
                        message: e.to_string(),
                    });
                }
            }
        }
        report.batches_run = batch + 1;
        report.eta = if report.scenarios.is_empty() {
            0.0
        } else {
            (sum.sum() / report.scenarios.len() as f64).clamp(0.0, 1.0)
        };
        report.history.push(report.eta);
        log::info!("batch {batch}: eta = {:.6} over {} scenarios", report.eta, report.scenarios.len());
        if has_converged(&report.history, cfg.epsilon) {
            report.converged = true;
            break;
        }
    }

    let total = report.batches_run * per_batch;
    let failed = report.failures.len();
    if failed as f64 > cfg.failure_limit * total as f64 {
        return Err(Error::TooManyFailures {
            failed,
            total,
            limit: 100.0 * cfg.failure_limit,
        });
    }
    Ok(report)
}
