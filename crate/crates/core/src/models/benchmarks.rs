use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::card::{fmt_box, fmt_vec, BenchmarkCard, ValueSource};
use super::{CartPole, Cstr, DiscreteModel, DisturbanceMap, Dynamics, Forced, GroundEffect, Quadrotor2d};
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::mpc::{diag, CostSpec, OcpOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkName {
    #[serde(rename = "cart_pole_v1")]
    CartPoleV1,
    #[serde(rename = "cart_pole_v2")]
    CartPoleV2,
    #[serde(rename = "cart_pole_v3")]
    CartPoleV3,
    #[serde(rename = "cstr")]
    Cstr,
    #[serde(rename = "quadrotor2d")]
    Quadrotor2d,
}

impl BenchmarkName {
    pub const ALL: [BenchmarkName; 5] = [
        BenchmarkName::CartPoleV1,
        BenchmarkName::CartPoleV2,
        BenchmarkName::CartPoleV3,
        BenchmarkName::Cstr,
        BenchmarkName::Quadrotor2d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkName::CartPoleV1 => "cart_pole_v1",
            BenchmarkName::CartPoleV2 => "cart_pole_v2",
            BenchmarkName::CartPoleV3 => "cart_pole_v3",
            BenchmarkName::Cstr => "cstr",
            BenchmarkName::Quadrotor2d => "quadrotor2d",
        }
    }

    fn valid_names() -> String {
        Self::ALL.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownBenchmark {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// How the plant is disturbed when generating measured data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PlantDisturbance {
    /// The plant's dynamics (mismatch, forcing, unmodeled effects) are the
    /// only difference from the model.
    None,
    /// `w(k) ~ Uniform(box)`, i.i.d. per step, on the plant's disturbed indices.
    Uniform(IntervalBox),
    /// The same `w` at every step.
    Constant(Vec<f64>),
}

impl PlantDisturbance {
    pub fn dim(&self) -> usize {
        match self {
            PlantDisturbance::None => 0,
            PlantDisturbance::Uniform(b) => b.dim(),
            PlantDisturbance::Constant(c) => c.len(),
        }
    }
}

/// Plant (truth), controller model and scenario for one experiment.
#[derive(Debug, Clone)]
pub struct BenchmarkPair {
    pub name: String,
    pub plant: DiscreteModel,
    /// The controller's model. Its disturbance map fixes which state
    /// dimensions the identified set `W` covers.
    pub model: DiscreteModel,
    pub x0_set: IntervalBox,
    pub plant_disturbance: PlantDisturbance,
    pub cost: CostSpec,
    /// Episode length `n_k`.
    pub horizon_steps: usize,
    pub ocp: OcpOptions,
    /// `(x_eq, u_eq)` of the model.
    pub equilibrium: (Vec<f64>, Vec<f64>),
    /// Default number of measured trajectories `n_m`.
    pub data_trajectories: usize,
    pub card: BenchmarkCard,
}

impl BenchmarkPair {
    pub fn validate(&self) -> Result<()> {
        let (p, m) = (&self.plant, &self.model);
        if p.state_dim() != m.state_dim() || p.input_dim() != m.input_dim() || p.dt() != m.dt() {
            return Err(Error::Config(format!("plant and model of {} are incompatible", self.name)));
        }
        if self.plant_disturbance.dim() != 0 && self.plant_disturbance.dim() != p.disturbance_dim() {
            return Err(Error::Config(format!("plant disturbance of {} does not match its map", self.name)));
        }
        if self.x0_set.dim() != m.state_dim() {
            return Err(Error::Config(format!("initial-state set of {} has wrong dimension", self.name)));
        }
        self.cost.validate()?;
        self.ocp.validate()
    }
}

/// Fully configured benchmark by name.
pub fn make_benchmark(name: BenchmarkName) -> Result<BenchmarkPair> {
    let pair = match name {
        BenchmarkName::CartPoleV1 | BenchmarkName::CartPoleV2 | BenchmarkName::CartPoleV3 => cart_pole(name)?,
        BenchmarkName::Cstr => cstr()?,
        BenchmarkName::Quadrotor2d => quadrotor()?,
    };
    pair.validate()?;
    Ok(pair)
}

const CART_POLE_DT: f64 = 0.02;
const CART_POLE_STEPS: usize = 500;
const CART_POLE_HORIZON: usize = 40;
const CART_POLE_FORCE: f64 = 10.0;
/// Constant angular-velocity offset per sample in the third experiment.
const CART_POLE_OMEGA_OFFSET: f64 = 0.005;

fn cart_pole(name: BenchmarkName) -> Result<BenchmarkPair> {
    let physics = CartPole::classic();
    let dynamics: Arc<dyn Dynamics> = Arc::new(physics.clone());
    let x0_set = IntervalBox::new(vec![-0.3, -0.2, -0.2, -0.2], vec![0.3, 0.2, 0.2, 0.2])?;
    let (plant, model, plant_disturbance, summary) = match name {
        BenchmarkName::CartPoleV1 => {
            let w = IntervalBox::symmetric(&[0.01])?;
            let map = DisturbanceMap::Additive(vec![1]);
            (
                DiscreteModel::new(dynamics.clone(), CART_POLE_DT, 1, map.clone())?,
                DiscreteModel::new(dynamics, CART_POLE_DT, 1, map)?,
                PlantDisturbance::Uniform(w),
                "Cart pole with uniform noise on the cart velocity.",
            )
        }
        BenchmarkName::CartPoleV2 => {
            let w = IntervalBox::symmetric(&[0.002; 4])?;
            let map = DisturbanceMap::Additive(vec![0, 1, 2, 3]);
            (
                DiscreteModel::new(dynamics.clone(), CART_POLE_DT, 1, map.clone())?,
                DiscreteModel::new(dynamics, CART_POLE_DT, 1, map)?,
                PlantDisturbance::Uniform(w),
                "Cart pole with uniform noise on all four states.",
            )
        }
        _ => {
            // the offset is a rate: 0.005 rad/s gained per sample, applied as a
            // constant angular acceleration inside the integrator
            let forced = Forced {
                inner: physics.clone(),
                forcing: vec![0.0, 0.0, 0.0, CART_POLE_OMEGA_OFFSET / CART_POLE_DT],
            };
            (
                DiscreteModel::new(Arc::new(forced), CART_POLE_DT, 1, DisturbanceMap::None)?,
                DiscreteModel::new(dynamics, CART_POLE_DT, 1, DisturbanceMap::Additive(vec![3]))?,
                PlantDisturbance::None,
                "Cart pole with a constant, unmodeled drift on the pole's angular velocity.",
            )
        }
    };
    let cost = CostSpec::new(diag(&[1.0, 0.1, 10.0, 0.1]), vec![0.01], vec![0.0; 4], vec![0.0], 0.0)?;
    let ocp = OcpOptions::new(CART_POLE_HORIZON, IntervalBox::symmetric(&[CART_POLE_FORCE])?);

    let mut card = BenchmarkCard::new(name.as_str(), summary);
    for (k, v) in physics.params() {
        card.push(&k, v, unit_of(&k), ValueSource::Chosen, "classic cart-pole constants");
    }
    card.push("state", "[s, v, theta, omega]", "m, m/s, rad, rad/s", ValueSource::Experiment, "theta = 0 upright");
    card.push("dt", CART_POLE_DT, "s", ValueSource::Chosen, "one RK4 step per sample");
    card.push("n_k", CART_POLE_STEPS, "steps", ValueSource::Chosen, "episode length");
    card.push("horizon", CART_POLE_HORIZON, "steps", ValueSource::Chosen, "20 steps at this dt does not stabilize the upright pole");
    card.push("force bound", format!("[-{CART_POLE_FORCE}, {CART_POLE_FORCE}]"), "N", ValueSource::Chosen, "");
    card.push("X0", fmt_box(x0_set.lower(), x0_set.upper()), "", ValueSource::Experiment, "");
    card.push("Q", "diag(1, 0.1, 10, 0.1)", "", ValueSource::Chosen, "");
    card.push("R", 0.01, "", ValueSource::Chosen, "");
    card.push("n_m", 50, "trajectories", ValueSource::Experiment, "");
    match &plant_disturbance {
        PlantDisturbance::Uniform(w) => card.push(
            "W_s",
            fmt_box(w.lower(), w.upper()),
            "",
            ValueSource::Experiment,
            &format!("additive on state indices {:?}", plant.disturbed_indices()),
        ),
        _ => card.push(
            "omega offset",
            CART_POLE_OMEGA_OFFSET,
            "rad/s per sample",
            ValueSource::Experiment,
            "applied as constant angular acceleration offset / dt",
        ),
    }
    card.push(
        "model disturbed indices",
        format!("{:?}", model.disturbed_indices()),
        "",
        ValueSource::Chosen,
        "dimensions covered by the identified W",
    );

    Ok(BenchmarkPair {
        name: name.to_string(),
        plant,
        model,
        x0_set,
        plant_disturbance,
        cost,
        horizon_steps: CART_POLE_STEPS,
        ocp,
        equilibrium: (vec![0.0; 4], vec![0.0]),
        data_trajectories: 50,
        card,
    })
}

const CSTR_DT: f64 = 60.0;
const CSTR_SUBSTEPS: usize = 10;
const CSTR_STEPS: usize = 600;
const CSTR_HORIZON: usize = 10;
const CSTR_DUTY: f64 = 50.0;
const CSTR_Q_B: f64 = 20.0;
const CSTR_Q_E: f64 = 2e-4;
/// Model pre-exponential factors relative to the plant's.
const CSTR_K0_A_FACTOR: f64 = 1.10;
const CSTR_K0_B_FACTOR: f64 = 0.95;
/// Temperature of the model's declared equilibrium.
const CSTR_EQ_TEMP: f64 = 360.0;

fn cstr() -> Result<BenchmarkPair> {
    let truth = Cstr::reference();
    let mut believed = truth.clone();
    believed.k0_a *= CSTR_K0_A_FACTOR;
    believed.k0_b *= CSTR_K0_B_FACTOR;
    let plant = DiscreteModel::new(Arc::new(truth.clone()), CSTR_DT, CSTR_SUBSTEPS, DisturbanceMap::None)?;
    let model = DiscreteModel::new(
        Arc::new(believed.clone()),
        CSTR_DT,
        CSTR_SUBSTEPS,
        DisturbanceMap::Additive(vec![0, 1, 2]),
    )?;
    let x0_set = IntervalBox::new(vec![0.7, 0.0, 340.0], vec![1.0, 0.3, 360.0])?;
    // q_B (1 - c_B)^2 + q_E Q^2
    let cost = CostSpec::new(
        diag(&[0.0, CSTR_Q_B, 0.0]),
        vec![CSTR_Q_E],
        vec![0.0, 1.0, 0.0],
        vec![0.0],
        0.0,
    )?;
    let ocp = OcpOptions::new(CSTR_HORIZON, IntervalBox::symmetric(&[CSTR_DUTY])?);
    let (x_eq, q_eq) = believed.steady_state(CSTR_EQ_TEMP);

    let mut card = BenchmarkCard::new(
        "cstr",
        "Stirred-tank reactor A <-> B; the model's pre-exponential factors are off by +10% (A) and -5% (B).",
    );
    for (k, v) in truth.params() {
        card.push(&format!("plant {k}"), v, unit_of(&k), ValueSource::Chosen, "reactor constants fixed once here");
    }
    card.push("model k0_a", believed.k0_a, "1/s", ValueSource::Experiment, "plant value x 1.10");
    card.push("model k0_b", believed.k0_b, "1/s", ValueSource::Experiment, "plant value x 0.95");
    card.push("state", "[c_A, c_B, T]", "mol/L, mol/L, K", ValueSource::Experiment, "");
    card.push("input", "heater/cooler duty Q", "kW", ValueSource::Chosen, "");
    card.push("dt", CSTR_DT, "s", ValueSource::Experiment, "");
    card.push("substeps", CSTR_SUBSTEPS, "", ValueSource::Chosen, "RK4 steps per sample");
    card.push("n_k", CSTR_STEPS, "steps", ValueSource::Experiment, "600 min");
    card.push("horizon", CSTR_HORIZON, "steps", ValueSource::Chosen, "");
    card.push("duty bound", format!("[-{CSTR_DUTY}, {CSTR_DUTY}]"), "kW", ValueSource::Chosen, "");
    card.push("X0", fmt_box(x0_set.lower(), x0_set.upper()), "", ValueSource::Chosen, "");
    card.push("q_B", CSTR_Q_B, "", ValueSource::Chosen, "stage cost q_B (1 - c_B)^2 + q_E Q^2");
    card.push("q_E", CSTR_Q_E, "1/kW^2", ValueSource::Chosen, "");
    card.push("n_m", 50, "trajectories", ValueSource::Chosen, "");
    card.push("equilibrium", fmt_vec(&x_eq), "", ValueSource::Derived, &format!("model steady state at Q = {q_eq:.4} kW"));
    card.push("model disturbed indices", "[0, 1, 2]", "", ValueSource::Chosen, "");

    Ok(BenchmarkPair {
        name: BenchmarkName::Cstr.to_string(),
        plant,
        model,
        x0_set,
        plant_disturbance: PlantDisturbance::None,
        cost,
        horizon_steps: CSTR_STEPS,
        ocp,
        equilibrium: (x_eq.to_vec(), vec![q_eq]),
        data_trajectories: 50,
        card,
    })
}

const QUAD_DT: f64 = 0.05;
const QUAD_STEPS: usize = 100;
const QUAD_HORIZON: usize = 20;
const QUAD_MAX_THRUST: f64 = 6.0;
const QUAD_HOVER_ALTITUDE: f64 = 1.0;

fn quadrotor() -> Result<BenchmarkPair> {
    let believed = Quadrotor2d::reference();
    let mut truth = believed.clone();
    truth.ground_effect = Some(GroundEffect {
        rotor_radius: 0.1,
        coefficient: 1.0,
    });
    let plant = DiscreteModel::new(Arc::new(truth.clone()), QUAD_DT, 1, DisturbanceMap::None)?;
    let model = DiscreteModel::new(
        Arc::new(believed.clone()),
        QUAD_DT,
        1,
        DisturbanceMap::Additive((0..6).collect()),
    )?;
    let x0_set = IntervalBox::new(vec![-0.5, 0.2, -0.2, -0.2, -0.2, -0.2], vec![0.5, 0.6, 0.2, 0.2, 0.2, 0.2])?;
    let hover = believed.hover_thrust();
    let x_ref = vec![0.0, QUAD_HOVER_ALTITUDE, 0.0, 0.0, 0.0, 0.0];
    let cost = CostSpec::new(
        diag(&[1.0, 1.0, 0.1, 0.1, 0.1, 0.01]),
        diag(&[0.01, 0.01]),
        x_ref.clone(),
        vec![hover; 2],
        0.0,
    )?;
    let ocp = OcpOptions::new(QUAD_HORIZON, IntervalBox::cube(0.0, QUAD_MAX_THRUST, 2)?);

    let mut card = BenchmarkCard::new(
        "quadrotor2d",
        "Planar quadrotor; the plant has rotor ground effect, the model does not.",
    );
    for (k, v) in truth.params() {
        card.push(&k, v, unit_of(&k), ValueSource::Chosen, "");
    }
    card.push("ground effect", "1 / (1 - c (r / 4 s_z)^2), s_z clipped at r / 2", "", ValueSource::Chosen, "plant only");
    card.push("state", "[s_x, s_z, v_x, v_z, theta, omega]", "", ValueSource::Experiment, "");
    card.push("input", "[T_1, T_2] rotor thrusts", "N", ValueSource::Experiment, "");
    card.push("dt", QUAD_DT, "s", ValueSource::Chosen, "");
    card.push("n_k", QUAD_STEPS, "steps", ValueSource::Chosen, "");
    card.push("horizon", QUAD_HORIZON, "steps", ValueSource::Chosen, "");
    card.push("thrust bound", format!("[0, {QUAD_MAX_THRUST}] each"), "N", ValueSource::Chosen, "");
    card.push("X0", fmt_box(x0_set.lower(), x0_set.upper()), "", ValueSource::Chosen, "starts close to the ground");
    card.push("x_ref", fmt_vec(&x_ref), "", ValueSource::Chosen, "hover");
    card.push("u_ref", fmt_vec(&[hover, hover]), "N", ValueSource::Derived, "hover thrust m g / 2");
    card.push("Q", "diag(1, 1, 0.1, 0.1, 0.1, 0.01)", "", ValueSource::Chosen, "");
    card.push("R", "diag(0.01, 0.01)", "", ValueSource::Chosen, "");
    card.push("n_m", 30, "trajectories", ValueSource::Experiment, "");
    card.push("model disturbed indices", "[0, 1, 2, 3, 4, 5]", "", ValueSource::Chosen, "");

    Ok(BenchmarkPair {
        name: BenchmarkName::Quadrotor2d.to_string(),
        plant,
        model,
        x0_set,
        plant_disturbance: PlantDisturbance::None,
        cost,
        horizon_steps: QUAD_STEPS,
        ocp,
        equilibrium: (x_ref, vec![hover; 2]),
        data_trajectories: 30,
        card,
    })
}

fn unit_of(param: &str) -> &'static str {
    match param {
        "gravity" => "m/s^2",
        "cart_mass" | "pole_mass" | "mass" => "kg",
        "half_length" | "arm" | "rotor_radius" => "m",
        "inertia" => "kg m^2",
        "volume" => "L",
        "flow" => "L/s",
        "feed_conc_a" => "mol/L",
        "feed_temp" => "K",
        "heat_capacity" => "kJ/(L K)",
        "k0_a" | "k0_b" => "1/s",
        "ea_a" | "ea_b" => "J/mol",
        "dh_a" | "dh_b" => "kJ/mol",
        _ => "",
    }
}
