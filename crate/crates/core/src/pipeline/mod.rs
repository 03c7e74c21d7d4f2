//! End-to-end orchestration: data, identification, both test parts and
//! the verdict.

mod config;
pub mod io;
mod report;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{DataSource, LinearSystemSpec, OutputOptions, PipelineConfig, ScenarioOverrides, Thresholds};
pub use report::{verdict, DataSummary, LitmusReport, Provenance, Verdict, SCHEMA_VERSION};

use crate::conformance::{check_conformance, extract_residuals, identify_disturbance_set, ConformanceReport};
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::knowledge::run_knowledge_advantage;
use crate::learnability::run_learnability;
use crate::models::{rollout_closed_loop, BenchmarkPair, PlantDisturbance};
use crate::mpc::nominal_policy;
use crate::random::{tag, RandomStream};
use crate::trajectory::Trajectory;

/// `n_m` closed-loop plant runs under the nominal controller, from initial
/// states drawn uniformly from `X0`.
pub fn generate_data(system: &BenchmarkPair, trajectories: usize, master_seed: u64) -> Result<Vec<Trajectory>> {
    if trajectories == 0 {
        return Err(Error::Config("n_m must be at least 1 when generating data".into()));
    }
    let steps = system.horizon_steps;
    (0..trajectories)
        .into_par_iter()
        .map(|m| {
            let id = m as u64;
            let x0 = system
                .x0_set
                .sample_uniform(&RandomStream::new(master_seed, vec![id, tag::DATA_INITIAL_STATE]));
            let w: Option<Vec<Vec<f64>>> = match &system.plant_disturbance {
                PlantDisturbance::None => None,
                PlantDisturbance::Constant(c) => Some(vec![c.clone(); steps]),
                PlantDisturbance::Uniform(b) => {
                    let mut rng = RandomStream::new(master_seed, vec![id, tag::DATA_DISTURBANCE]).rng();
                    Some((0..steps).map(|_| b.sample_with(&mut rng)).collect())
                }
            };
            let mut policy = nominal_policy(&system.model, &system.cost, &system.ocp)?;
            let t = rollout_closed_loop(&system.plant, &x0, &mut policy, steps, w.as_deref())
                .map_err(|e| Error::in_trajectory(m, e))?;
            Ok(t.without_disturbances())
        })
        .collect()
}

/// Measured data as configured, with a label of where it came from.
pub fn load_data(cfg: &PipelineConfig, system: &BenchmarkPair) -> Result<(Vec<Trajectory>, String)> {
    match &cfg.data {
        DataSource::Generate { .. } => Ok((
            generate_data(system, cfg.trajectories(system), cfg.master_seed)?,
            "generated".into(),
        )),
        DataSource::File { path } => Ok((io::read_trajectories(path)?, path.display().to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub disturbance_set: IntervalBox,
    pub residual_rows: usize,
    pub conformance: ConformanceReport,
}

/// Identify `W` (or take the configured one) and verify the data conforms.
pub fn identify(cfg: &PipelineConfig, system: &BenchmarkPair, data: &[Trajectory]) -> Result<Identification> {
    let residuals = extract_residuals(&system.model, data)?;
    let disturbance_set = match &cfg.disturbance_set {
        Some(w) => w.clone(),
        None => identify_disturbance_set(&residuals, cfg.margin)?,
    };
    let conformance = check_conformance(&system.model, &disturbance_set, data)?;
    Ok(Identification {
        disturbance_set,
        residual_rows: residuals.len(),
        conformance,
    })
}

/// Identify, check conformance, run Part 1, run Part 2 only when
/// `eta >= tau_eta`, and decide.
///
/// A non-conformant model is an error. Part 1 not converging is not;
/// check `report.knowledge.converged`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<LitmusReport> {
    cfg.validate()?;
    let system = cfg.build_system()?;
    let (data, origin) = load_data(cfg, &system)?;
    run_pipeline_on(cfg, &system, &data, origin)
}

pub fn run_pipeline_on(cfg: &PipelineConfig, system: &BenchmarkPair, data: &[Trajectory], origin: String) -> Result<LitmusReport> {
    let id = identify(cfg, system, data)?;
    if !id.conformance.conformant {
        let v = id.conformance.first_violation.as_ref().expect("violation recorded");
        return Err(Error::NotConformant(format!(
            "trajectory {} step {} leaves W in dimension {} (residual {:?})",
            v.trajectory, v.step, v.dimension, v.residual
        )));
    }
    if id.conformance.max_undisturbed_residual > 1e-6 {
        log::warn!(
            "prediction error {:e} outside the disturbed indices; W cannot represent it",
            id.conformance.max_undisturbed_residual
        );
    }
    log::info!("identified W = {:?}", id.disturbance_set);
    let knowledge = run_knowledge_advantage(system, &id.disturbance_set, &cfg.knowledge_config())?;
    let learnability = if knowledge.eta >= cfg.thresholds.tau_eta {
        Some(run_learnability(&system.model, data, &cfg.rdc_params())?)
    } else {
        None
    };
    let verdict = verdict(knowledge.eta, learnability.as_ref().map(|l| l.rho), &cfg.thresholds);
    Ok(LitmusReport {
        schema_version: SCHEMA_VERSION,
        system: system.name.clone(),
        data: DataSummary {
            trajectories: data.len(),
            transitions: data.iter().map(Trajectory::steps).sum(),
            origin,
        },
        disturbance_set: id.disturbance_set,
        conformance: id.conformance,
        knowledge,
        learnability,
        thresholds: cfg.thresholds.clone(),
        verdict,
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            master_seed: cfg.master_seed,
            config: cfg.clone(),
        },
    })
}

/// Write `report.json` and the CSV plot data into `dir`.
pub fn write_outputs(dir: &Path, report: &LitmusReport, residuals_csv: bool) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(|e| Error::io(&path, e))?;
    write_plot_data(dir, report)?;
    let k = &report.knowledge;
    if !k.trajectories.is_empty() {
        io::write_scenario_trajectories(&dir.join("scenario_trajectories.csv"), k)?;
    }
    if let Some(l) = &report.learnability {
        if residuals_csv {
            io::write_residual_scatter(&dir.join("residuals.csv"), l, report.state_dim())?;
        }
    }
    Ok(())
}

/// CSV files that can be rebuilt from a saved report alone.
pub fn write_plot_data(dir: &Path, report: &LitmusReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_eta_history(&dir.join("eta_history.csv"), &report.knowledge)?;
    io::write_deltas(&dir.join("deltas.csv"), &report.knowledge)?;
    if let Some(l) = &report.learnability {
        io::write_per_pair(&dir.join("rdc_per_pair.csv"), l, report.state_dim())?;
    }
    Ok(())
}

impl LitmusReport {
    /// Residuals cover the full state, so `per_pair` has one row per state.
    fn state_dim(&self) -> usize {
        self.learnability.as_ref().map_or(0, |l| l.per_pair.len())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
