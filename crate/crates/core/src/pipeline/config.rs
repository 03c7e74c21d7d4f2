use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::knowledge::KnowledgeConfig;
use crate::models::{
    make_benchmark, BenchmarkCard, BenchmarkName, BenchmarkPair, DiscreteModel, DisturbanceMap, LinearDynamics,
    PlantDisturbance,
};
use crate::mpc::{CostSpec, OcpOptions};
use crate::rdc::RdcParams;

fn default_tau_eta() -> f64 {
    0.2
}
fn default_tau_rho() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_tau_eta")]
    pub tau_eta: f64,
    #[serde(default = "default_tau_rho")]
    pub tau_rho: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tau_eta: default_tau_eta(),
            tau_rho: default_tau_rho(),
        }
    }
}

/// Where measured trajectories come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Simulate `trajectories` closed-loop plant runs (benchmark default
    /// when absent).
    Generate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trajectories: Option<usize>,
    },
    /// Line-delimited trajectory records.
    File { path: PathBuf },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Generate { trajectories: None }
    }
}

/// Optional changes to the scenario of the selected system, mainly for
/// quick runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    /// Not part of the recorded provenance: where files go never changes
    /// results.
    #[serde(default, skip_serializing)]
    pub dir: Option<PathBuf>,
    /// Write the stacked residual/regressor scatter data.
    #[serde(default = "default_true")]
    pub residuals_csv: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: None,
            residuals_csv: true,
        }
    }
}

fn default_substeps() -> usize {
    1
}

/// User-supplied linear system `dx/dt = A x + B u + c` with additive
/// disturbances and a quadratic cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystemSpec {
    /// Rows of `A`.
    pub a: Vec<Vec<f64>>,
    /// Rows of `B`.
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    pub dt: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    pub disturbed_indices: Vec<usize>,
    pub x0: IntervalBox,
    pub input_box: IntervalBox,
    /// Diagonal of `Q` and `R`.
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_ref: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_ref: Option<Vec<f64>>,
    pub horizon: usize,
    pub episode_steps: usize,
    /// Uniform noise on the disturbed indices when generating data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant_noise: Option<IntervalBox>,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
}

fn default_trajectories() -> usize {
    50
}

impl LinearSystemSpec {
    fn build(&self) -> Result<BenchmarkPair> {
        let n = self.a.len();
        let m = self.b.first().map_or(0, Vec::len);
        let a: Vec<f64> = self.a.iter().flatten().copied().collect();
        let b: Vec<f64> = self.b.iter().flatten().copied().collect();
        if self.a.iter().any(|r| r.len() != n) || self.b.len() != n || self.b.iter().any(|r| r.len() != m) {
            return Err(Error::Config("linear system: A must be n x n and B n x m".into()));
        }
        let dynamics = Arc::new(LinearDynamics::new(n, m, a, b, self.c.clone().unwrap_or(vec![0.0; n]))?);
        let map = DisturbanceMap::Additive(self.disturbed_indices.clone());
        let model = DiscreteModel::new(dynamics, self.dt, self.substeps, map)?;
        let x_ref = self.x_ref.clone().unwrap_or(vec![0.0; n]);
        let u_ref = self.u_ref.clone().unwrap_or(vec![0.0; m]);
        let cost = CostSpec::diagonal(&self.q, &self.r, x_ref.clone(), u_ref.clone())?;
        let mut card = BenchmarkCard::new("linear_system", "User-supplied linear system.");
        card.push("dt", self.dt, "s", crate::models::ValueSource::Chosen, "");
        let plant_disturbance = match &self.plant_noise {
            Some(w) => PlantDisturbance::Uniform(w.clone()),
            None => PlantDisturbance::None,
        };
        let pair = BenchmarkPair {
            name: "linear_system".into(),
            plant: model.clone(),
            model,
            x0_set: self.x0.clone(),
            plant_disturbance,
            cost,
            horizon_steps: self.episode_steps,
            ocp: OcpOptions::new(self.horizon, self.input_box.clone()),
            equilibrium: (x_ref, u_ref),
            data_trajectories: self.trajectories,
            card,
        };
        pair.validate()?;
        Ok(pair)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_system: Option<LinearSystemSpec>,
    /// Seeds data generation, scenario sampling and random features. Seeds
    /// inside the `knowledge` and `rdc` tables are ignored.
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub data: DataSource,
    /// Side inflation of the identified hull, as a fraction of its width.
    #[serde(default)]
    pub margin: f64,
    /// Use this `W` instead of identifying one; the data must conform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance_set: Option<IntervalBox>,
    #[serde(default)]
    pub knowledge: KnowledgeConfig,
    #[serde(default)]
    pub rdc: RdcParams,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub scenario: ScenarioOverrides,
    #[serde(default)]
    pub output: OutputOptions,
}

impl PipelineConfig {
    pub fn for_benchmark(name: BenchmarkName) -> Self {
        Self {
            benchmark: Some(name),
            linear_system: None,
            master_seed: 0,
            data: DataSource::default(),
            margin: 0.0,
            disturbance_set: None,
            knowledge: KnowledgeConfig::default(),
            rdc: RdcParams::default(),
            thresholds: Thresholds::default(),
            scenario: ScenarioOverrides::default(),
            output: OutputOptions::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.benchmark, &self.linear_system) {
            (Some(_), Some(_)) => return Err(Error::Config("set either `benchmark` or `linear_system`, not both".into())),
            (None, None) => return Err(Error::Config("no system selected: set `benchmark` or `linear_system`".into())),
            _ => {}
        }
        let t = &self.thresholds;
        for (name, v) in [("tau_eta", t.tau_eta), ("tau_rho", t.tau_rho)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("threshold {name} must lie in (0, 1), got {v}")));
            }
        }
        if let DataSource::Generate { trajectories: Some(0) } = self.data {
            return Err(Error::Config("n_m must be at least 1 when generating data".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Config(format!("margin must be nonnegative, got {}", self.margin)));
        }
        if self.scenario.episode_steps == Some(0) {
            return Err(Error::Config("episode_steps must be at least 1".into()));
        }
        self.knowledge_config().validate()?;
        self.rdc_params().validate()
    }

    pub fn knowledge_config(&self) -> KnowledgeConfig {
        KnowledgeConfig {
            master_seed: self.master_seed,
            ..self.knowledge.clone()
        }
    }

    pub fn rdc_params(&self) -> RdcParams {
        RdcParams {
            seed: self.master_seed,
            ..self.rdc.clone()
        }
    }

    /// Label of the selected system.
    pub fn system_name(&self) -> String {
        match &self.benchmark {
            Some(b) => b.to_string(),
            None => "linear_system".into(),
        }
    }

    /// The selected system with scenario overrides applied.
    pub fn build_system(&self) -> Result<BenchmarkPair> {
        let mut pair = match (&self.benchmark, &self.linear_system) {
            (Some(name), _) => make_benchmark(*name)?,
            (None, Some(spec)) => spec.build()?,
            (None, None) => return Err(Error::Config("no system selected".into())),
        };
        let o = &self.scenario;
        if let Some(n) = o.episode_steps {
            pair.horizon_steps = n;
        }
        if let Some(h) = o.horizon {
            pair.ocp.horizon = h;
        }
        if let Some(it) = o.max_iterations {
            pair.ocp.max_iterations = it;
        }
        pair.validate()?;
        Ok(pair)
    }

    /// Number of trajectories to generate.
    pub fn trajectories(&self, system: &BenchmarkPair) -> usize {
        match self.data {
            DataSource::Generate { trajectories: Some(n) } => n,
            _ => system.data_trajectories,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = PipelineConfig::from_toml_str("benchmark = \"cart_pole_v3\"\n").unwrap();
        assert_eq!(cfg.benchmark, Some(BenchmarkName::CartPoleV3));
        assert_eq!(cfg.thresholds, Thresholds::default());
        assert_eq!(cfg.knowledge.n_b, 10);
    }

    #[test]
    fn parses_full_config() {
        let text = r#"
            benchmark = "cstr"
            master_seed = 7
            margin = 0.1
            [data]
            source = "generate"
            trajectories = 5
            [knowledge]
            n_b = 4
            epsilon = 0.01
            max_batches = 3
            [rdc]
            k = 10
            [thresholds]
            tau_eta = 0.3
            [scenario]
            episode_steps = 20
        "#;
        let cfg = PipelineConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.knowledge_config().master_seed, 7);
        assert_eq!(cfg.rdc_params().seed, 7);
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.horizon_steps, 20);
        assert_eq!(cfg.trajectories(&sys), 5);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_toml_str("benchmark = \"nope\"").is_err());
        assert!(PipelineConfig::from_toml_str("").is_err());
        assert!(PipelineConfig::from_toml_str("benchmark = \"cstr\"\n[data]\nsource = \"generate\"\ntrajectories = 0").is_err());
        assert!(PipelineConfig::from_toml_str("benchmark = \"cstr\"\n[thresholds]\ntau_eta = 1.5").is_err());
        assert!(PipelineConfig::from_toml_str("benchmark = \"cstr\"\nunknown = 1").is_err());
    }

    #[test]
    fn output_dir_is_not_provenance() {
        let mut cfg = PipelineConfig::for_benchmark(BenchmarkName::Cstr);
        cfg.output.dir = Some("/tmp/x".into());
        assert!(!serde_json::to_string(&cfg).unwrap().contains("/tmp/x"));
    }

    #[test]
    fn linear_system_builds() {
        let text = r#"
            [linear_system]
            a = [[0.0, 1.0], [0.0, 0.0]]
            b = [[0.0], [1.0]]
            dt = 0.1
            disturbed_indices = [1]
            x0 = { lower = [-1.0, -1.0], upper = [1.0, 1.0] }
            input_box = { lower = [-5.0], upper = [5.0] }
            q = [1.0, 1.0]
            r = [0.1]
            horizon = 10
            episode_steps = 30
            plant_noise = { lower = [-0.01], upper = [0.01] }
        "#;
        let cfg = PipelineConfig::from_toml_str(text).unwrap();
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.model.state_dim(), 2);
        assert_eq!(sys.plant_disturbance.dim(), 1);
        assert_eq!(cfg.system_name(), "linear_system");
    }
}
