//! Continuous-time dynamics, their RK4 discretization
//! `x(k+1) = f(x(k), u(k)) + E w(k)`, and rollouts.
//!
//! The output map is the identity, so measured outputs are full states.

mod benchmarks;
mod card;
mod cart_pole;
mod cstr;
mod linear;
mod quadrotor;

use std::fmt;
use std::sync::Arc;

use num_dual::{Dual64, DualNum};

use crate::error::{check_dim, Error, Result};
use crate::trajectory::Trajectory;

pub use benchmarks::{make_benchmark, BenchmarkName, BenchmarkPair, PlantDisturbance};
pub use card::{BenchmarkCard, CardEntry, ValueSource};
pub use cart_pole::CartPole;
pub use cstr::Cstr;
pub use linear::LinearDynamics;
pub use quadrotor::{GroundEffect, Quadrotor2d};

/// Scalar types a vector field can be evaluated on: plain `f64`, or a
/// forward-mode dual number for exact Jacobians.
pub trait Scalar: DualNum<Primitive = f64> + Copy {
    fn eval_field(field: &dyn Dynamics, x: &[Self], u: &[Self], dx: &mut [Self]);
}

impl Scalar for f64 {
    fn eval_field(field: &dyn Dynamics, x: &[Self], u: &[Self], dx: &mut [Self]) {
        field.derivative(x, u, dx)
    }
}

impl Scalar for Dual64 {
    fn eval_field(field: &dyn Dynamics, x: &[Self], u: &[Self], dx: &mut [Self]) {
        field.derivative_dual(x, u, dx)
    }
}

/// A vector field written once over any [`Scalar`].
pub trait VectorField: Send + Sync + fmt::Debug {
    fn label(&self) -> String;
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S], u: &[S], dx: &mut [S]);
    /// Named physical constants, for benchmark cards and reports.
    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }
}

/// Object-safe face of a [`VectorField`].
pub trait Dynamics: Send + Sync + fmt::Debug {
    fn label(&self) -> String;
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]);
    fn derivative_dual(&self, x: &[Dual64], u: &[Dual64], dx: &mut [Dual64]);
    fn params(&self) -> Vec<(String, f64)>;
}

impl<T: VectorField> Dynamics for T {
    fn label(&self) -> String {
        VectorField::label(self)
    }
    fn state_dim(&self) -> usize {
        VectorField::state_dim(self)
    }
    fn input_dim(&self) -> usize {
        VectorField::input_dim(self)
    }
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        self.eval(x, u, dx)
    }
    fn derivative_dual(&self, x: &[Dual64], u: &[Dual64], dx: &mut [Dual64]) {
        self.eval(x, u, dx)
    }
    fn params(&self) -> Vec<(String, f64)> {
        VectorField::params(self)
    }
}

/// Adds a constant term to another field: `f(x, u) + c`.
#[derive(Debug, Clone)]
pub struct Forced<F> {
    pub inner: F,
    pub forcing: Vec<f64>,
}

impl<F: VectorField> VectorField for Forced<F> {
    fn label(&self) -> String {
        format!("{} + constant forcing", self.inner.label())
    }
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S], u: &[S], dx: &mut [S]) {
        self.inner.eval(x, u, dx);
        for (d, c) in dx.iter_mut().zip(&self.forcing) {
            *d += *c;
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        let mut p = self.inner.params();
        p.extend(self.forcing.iter().enumerate().map(|(i, c)| (format!("forcing[{i}]"), *c)));
        p
    }
}

fn rk4_generic<S: Scalar>(dynamics: &dyn Dynamics, x: &[S], u: &[S], h: f64, out: &mut [S]) {
    let n = x.len();
    let zero = S::from(0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut tmp = vec![zero; n];
    S::eval_field(dynamics, x, u, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + k1[i] * (0.5 * h);
    }
    S::eval_field(dynamics, &tmp, u, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + k2[i] * (0.5 * h);
    }
    S::eval_field(dynamics, &tmp, u, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + k3[i] * h;
    }
    S::eval_field(dynamics, &tmp, u, &mut k4);
    for i in 0..n {
        out[i] = x[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(dynamics: &dyn Dynamics, x: &[f64], u: &[f64], dt: f64) -> Result<Vec<f64>> {
    check_dim("rk4 state", dynamics.state_dim(), x.len())?;
    check_dim("rk4 input", dynamics.input_dim(), u.len())?;
    if !(dt > 0.0) {
        return Err(Error::Config(format!("rk4 step size must be positive, got {dt}")));
    }
    let mut probe = vec![0.0; x.len()];
    dynamics.derivative(x, u, &mut probe);
    if probe.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteDerivative { state: x.to_vec() });
    }
    let mut out = vec![0.0; x.len()];
    rk4_generic(dynamics, x, u, dt, &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteDerivative { state: x.to_vec() });
    }
    Ok(out)
}

/// How a disturbance vector enters the discrete model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DisturbanceMap {
    None,
    /// `w` is added to the listed state indices after integration.
    Additive(Vec<usize>),
}

impl DisturbanceMap {
    pub fn dim(&self) -> usize {
        match self {
            DisturbanceMap::None => 0,
            DisturbanceMap::Additive(idx) => idx.len(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        match self {
            DisturbanceMap::None => &[],
            DisturbanceMap::Additive(idx) => idx,
        }
    }
}

/// Sampled-data model: `substeps` RK4 steps per period `dt`, then additive
/// disturbance injection.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    dynamics: Arc<dyn Dynamics>,
    dt: f64,
    substeps: usize,
    disturbance: DisturbanceMap,
}

impl DiscreteModel {
    pub fn new(dynamics: Arc<dyn Dynamics>, dt: f64, substeps: usize, disturbance: DisturbanceMap) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("sample time must be positive, got {dt}")));
        }
        if substeps == 0 {
            return Err(Error::Config("at least one integration substep is required".into()));
        }
        let n = dynamics.state_dim();
        let idx = disturbance.indices();
        for (k, &i) in idx.iter().enumerate() {
            if i >= n {
                return Err(Error::Config(format!("disturbed index {i} outside state dimension {n}")));
            }
            if idx[..k].contains(&i) {
                return Err(Error::Config(format!("disturbed index {i} listed twice")));
            }
        }
        Ok(Self {
            dynamics,
            dt,
            substeps,
            disturbance,
        })
    }

    pub fn dynamics(&self) -> &Arc<dyn Dynamics> {
        &self.dynamics
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn disturbance_map(&self) -> &DisturbanceMap {
        &self.disturbance
    }

    pub fn disturbed_indices(&self) -> &[usize] {
        self.disturbance.indices()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.disturbance.dim()
    }

    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.dynamics.input_dim()
    }

    /// Same dynamics and timing with a different disturbance map.
    pub fn with_disturbance(&self, disturbance: DisturbanceMap) -> Result<Self> {
        Self::new(self.dynamics.clone(), self.dt, self.substeps, disturbance)
    }

    /// Undisturbed transition `f(x, u, 0)`.
    pub fn step_nominal(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let h = self.dt / self.substeps as f64;
        let mut x = rk4_step(self.dynamics.as_ref(), x, u, h)?;
        for _ in 1..self.substeps {
            x = rk4_step(self.dynamics.as_ref(), &x, u, h)?;
        }
        Ok(x)
    }

    /// Transition `f(x, u, w)`. An empty `w` is read as zero.
    pub fn step(&self, x: &[f64], u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let mut next = self.step_nominal(x, u)?;
        if !w.is_empty() {
            check_dim("disturbance vector", self.disturbance_dim(), w.len())?;
            for (&i, wi) in self.disturbance.indices().iter().zip(w) {
                next[i] += wi;
            }
        }
        Ok(next)
    }

    /// Undisturbed transition without validation, for the solver's inner
    /// loop. Non-finite values propagate instead of erroring.
    pub(crate) fn step_unchecked(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let h = self.dt / self.substeps as f64;
        let mut cur = x.to_vec();
        for _ in 0..self.substeps {
            rk4_generic(self.dynamics.as_ref(), &cur, u, h, out);
            cur.copy_from_slice(out);
        }
    }

    /// Next state and the Jacobians `A = df/dx` (n x n) and `B = df/du`
    /// (n x m), both row-major, by forward-mode differentiation of the
    /// integrator.
    pub fn step_with_jacobians(&self, x: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = x.len();
        let m = u.len();
        let h = self.dt / self.substeps as f64;
        let mut next = vec![0.0; n];
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * m];
        let mut cur = vec![Dual64::from(0.0); n];
        let mut out = vec![Dual64::from(0.0); n];
        for dir in 0..n + m {
            for i in 0..n {
                cur[i] = Dual64::new(x[i], if i == dir { 1.0 } else { 0.0 });
            }
            let ud: Vec<Dual64> = (0..m)
                .map(|j| Dual64::new(u[j], if n + j == dir { 1.0 } else { 0.0 }))
                .collect();
            for _ in 0..self.substeps {
                rk4_generic(self.dynamics.as_ref(), &cur, &ud, h, &mut out);
                cur.copy_from_slice(&out);
            }
            for i in 0..n {
                if dir < n {
                    a[i * n + dir] = cur[i].eps;
                } else {
                    b[i * m + (dir - n)] = cur[i].eps;
                }
            }
            if dir == 0 {
                for i in 0..n {
                    next[i] = cur[i].re;
                }
            }
        }
        if n + m == 0 {
            next.copy_from_slice(x);
        }
        (next, a, b)
    }
}

/// Behaviour that maps a state and step index to an input.
pub trait Policy {
    fn act(&mut self, x: &[f64], k: usize) -> Result<Vec<f64>>;
}

impl<F> Policy for F
where
    F: FnMut(&[f64], usize) -> Result<Vec<f64>>,
{
    fn act(&mut self, x: &[f64], k: usize) -> Result<Vec<f64>> {
        self(x, k)
    }
}

/// `phi(k; x0, u, w)` for a fixed input sequence. `w_seq = None` is the
/// nominal (zero disturbance) rollout.
pub fn rollout_open_loop(
    model: &DiscreteModel,
    x0: &[f64],
    u_seq: &[Vec<f64>],
    w_seq: Option<&[Vec<f64>]>,
) -> Result<Trajectory> {
    check_dim("initial state", model.state_dim(), x0.len())?;
    if let Some(w) = w_seq {
        check_dim("disturbance sequence length", u_seq.len(), w.len())?;
    }
    let mut states = Vec::with_capacity(u_seq.len() + 1);
    states.push(x0.to_vec());
    for (k, u) in u_seq.iter().enumerate() {
        let w = w_seq.map(|w| w[k].as_slice()).unwrap_or(&[]);
        let next = model.step(&states[k], u, w).map_err(|e| Error::at_step(k, e))?;
        states.push(next);
    }
    Trajectory::new(states, u_seq.to_vec(), w_seq.map(<[_]>::to_vec), model.dt())
}

/// Closed-loop simulation for `steps` transitions with `u(k) = policy(x(k), k)`.
pub fn rollout_closed_loop(
    model: &DiscreteModel,
    x0: &[f64],
    policy: &mut dyn Policy,
    steps: usize,
    w_seq: Option<&[Vec<f64>]>,
) -> Result<Trajectory> {
    check_dim("initial state", model.state_dim(), x0.len())?;
    if let Some(w) = w_seq {
        if w.len() < steps {
            return Err(Error::Dimension {
                context: "disturbance sequence length",
                expected: steps,
                actual: w.len(),
            });
        }
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps);
    states.push(x0.to_vec());
    for k in 0..steps {
        let u = policy.act(&states[k], k).map_err(|e| Error::at_step(k, e))?;
        check_dim("policy output", model.input_dim(), u.len()).map_err(|e| Error::at_step(k, e))?;
        let w = w_seq.map(|w| w[k].as_slice()).unwrap_or(&[]);
        let next = model.step(&states[k], &u, w).map_err(|e| Error::at_step(k, e))?;
        states.push(next);
        inputs.push(u);
    }
    Trajectory::new(states, inputs, w_seq.map(|w| w[..steps].to_vec()), model.dt())
}
