use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Time-indexed record `x(0..=n)`, `u(0..n)` and optionally `w(0..n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrajectory", into = "RawTrajectory")]
pub struct Trajectory {
    states: Vec<Vec<f64>>,
    inputs: Vec<Vec<f64>>,
    disturbances: Option<Vec<Vec<f64>>>,
    dt: f64,
}

/// On-disk record. `disturbances` is omitted when absent.
#[derive(Serialize, Deserialize)]
struct RawTrajectory {
    dt: f64,
    states: Vec<Vec<f64>>,
    inputs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disturbances: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawTrajectory> for Trajectory {
    type Error = Error;
    fn try_from(raw: RawTrajectory) -> Result<Self> {
        Trajectory::new(raw.states, raw.inputs, raw.disturbances, raw.dt)
    }
}

impl From<Trajectory> for RawTrajectory {
    fn from(t: Trajectory) -> Self {
        RawTrajectory {
            dt: t.dt,
            states: t.states,
            inputs: t.inputs,
            disturbances: t.disturbances,
        }
    }
}

fn uniform_dim(rows: &[Vec<f64>], context: &'static str) -> Result<()> {
    if let Some(first) = rows.first() {
        for r in rows {
            check_dim(context, first.len(), r.len())?;
        }
    }
    Ok(())
}

impl Trajectory {
    pub fn new(
        states: Vec<Vec<f64>>,
        inputs: Vec<Vec<f64>>,
        disturbances: Option<Vec<Vec<f64>>>,
        dt: f64,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Empty("trajectory without states"));
        }
        check_dim("trajectory state count", inputs.len() + 1, states.len())?;
        if let Some(w) = &disturbances {
            check_dim("trajectory disturbance count", inputs.len(), w.len())?;
            uniform_dim(w, "disturbance vector")?;
        }
        uniform_dim(&states, "state vector")?;
        uniform_dim(&inputs, "input vector")?;
        if !(dt > 0.0) {
            return Err(Error::Config(format!("trajectory dt must be positive, got {dt}")));
        }
        Ok(Self {
            states,
            inputs,
            disturbances,
            dt,
        })
    }

    /// Single-state trajectory.
    pub fn from_initial(x0: Vec<f64>, dt: f64) -> Result<Self> {
        Self::new(vec![x0], Vec::new(), None, dt)
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn disturbances(&self) -> Option<&[Vec<f64>]> {
        self.disturbances.as_deref()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of transitions `n_k`.
    pub fn steps(&self) -> usize {
        self.inputs.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].len()
    }

    /// Input dimension, or `None` for a trajectory without transitions.
    pub fn input_dim(&self) -> Option<usize> {
        self.inputs.first().map(Vec::len)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn without_disturbances(mut self) -> Self {
        self.disturbances = None;
        self
    }
}
