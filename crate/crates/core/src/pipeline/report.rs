use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conformance::ConformanceReport;
use crate::interval::IntervalBox;
use crate::knowledge::KnowledgeReport;
use crate::learnability::LearnabilityReport;

use super::config::{PipelineConfig, Thresholds};

/// Bumped whenever the report layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Perfect disturbance knowledge would barely help.
    ModelBasedSufficient,
    /// Knowledge helps and the model error is systematic.
    RlPromising,
    /// Knowledge helps but the model error looks like irreducible noise.
    AleatoricLimited,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ModelBasedSufficient => "model-based-sufficient",
            Verdict::RlPromising => "rl-promising",
            Verdict::AleatoricLimited => "aleatoric-limited",
        })
    }
}

/// Decision from the two indicators. `rho` is only consulted when
/// `eta >= tau_eta`; a missing `rho` then counts as no dependence.
pub fn verdict(eta: f64, rho: Option<f64>, thresholds: &Thresholds) -> Verdict {
    if eta < thresholds.tau_eta {
        Verdict::ModelBasedSufficient
    } else if rho.unwrap_or(0.0) >= thresholds.tau_rho {
        Verdict::RlPromising
    } else {
        Verdict::AleatoricLimited
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub master_seed: u64,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub trajectories: usize,
    pub transitions: usize,
    /// `generated` or the file it was read from.
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LitmusReport {
    pub schema_version: u32,
    pub system: String,
    pub data: DataSummary,
    pub disturbance_set: IntervalBox,
    pub conformance: ConformanceReport,
    pub knowledge: KnowledgeReport,
    /// Present only when `eta >= tau_eta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learnability: Option<LearnabilityReport>,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
    pub provenance: Provenance,
}

impl LitmusReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let k = &self.knowledge;
        let mut s = format!(
            "{}: eta = {:.4} ({} scenarios, {} batches, {})",
            self.system,
            k.eta,
            k.scenarios.len(),
            k.batches_run,
            if k.converged { "converged" } else { "NOT converged" }
        );
        match &self.learnability {
            Some(l) => s.push_str(&format!(", rho = {:.4} ({} samples)", l.rho, l.sample_count)),
            None => s.push_str(", learnability skipped"),
        }
        s.push_str(&format!(" -> {}", self.verdict));
        s
    }
}
