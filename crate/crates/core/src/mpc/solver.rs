//! Single-shooting finite-horizon solver.
//!
//! The decision variable is the stacked input sequence. Each iteration
//! linearizes the prediction along the current inputs, takes the exact
//! gradient by an adjoint sweep, and scales the free components by the
//! Gauss-Newton curvature (a two-metric projected Newton step). Bound
//! handling follows the usual epsilon-active set; the step is accepted by
//! a backtracking Armijo search along the projection arc, so the cost never
//! increases.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::interval::IntervalBox;
use crate::models::DiscreteModel;

use super::cost::CostSpec;

fn default_max_iterations() -> usize {
    50
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpOptions {
    /// Prediction horizon `H` in steps.
    pub horizon: usize,
    pub input_box: IntervalBox,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Stop once the projected-gradient infinity norm falls below
    /// `gradient_tolerance * (1 + J)`.
    #[serde(default = "default_tolerance")]
    pub gradient_tolerance: f64,
    /// Initial guess; `u_ref` repeated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<Vec<Vec<f64>>>,
}

impl OcpOptions {
    pub fn new(horizon: usize, input_box: IntervalBox) -> Self {
        Self {
            horizon,
            input_box,
            max_iterations: default_max_iterations(),
            gradient_tolerance: default_tolerance(),
            warm_start: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("prediction horizon must be at least one step".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::Config("gradient tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached; the best iterate is returned.
    IterationLimit,
    /// No step along the projection arc decreased the cost.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSolution {
    pub inputs: Vec<Vec<f64>>,
    /// Predicted cost of `inputs`.
    pub cost: f64,
    /// Predicted cost of the (projected) initial guess.
    pub initial_cost: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub projected_gradient_norm: f64,
}

impl OcpSolution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
/// Relative decrease below which an accepted step counts as stationarity.
const STALL_DECREASE: f64 = 1e-13;

/// Predicted-cost problem for one solve. Forecast rows may be empty,
/// meaning zero disturbance.
pub(crate) struct Problem<'a> {
    model: &'a DiscreteModel,
    x0: &'a [f64],
    forecast: &'a [Vec<f64>],
    cost: &'a CostSpec,
    horizon: usize,
}

struct Linearization {
    cost: f64,
    states: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(
        model: &'a DiscreteModel,
        x0: &'a [f64],
        forecast: &'a [Vec<f64>],
        cost: &'a CostSpec,
        horizon: usize,
    ) -> Result<Self> {
        let n = model.state_dim();
        check_dim("initial state", n, x0.len())?;
        check_dim("cost state dimension", n, cost.state_dim())?;
        check_dim("cost input dimension", model.input_dim(), cost.input_dim())?;
        if forecast.len() < horizon {
            return Err(Error::Dimension {
                context: "disturbance forecast length",
                expected: horizon,
                actual: forecast.len(),
            });
        }
        for w in &forecast[..horizon] {
            if !w.is_empty() {
                check_dim("forecast disturbance", model.disturbance_dim(), w.len())?;
            }
        }
        Ok(Self {
            model,
            x0,
            forecast,
            cost,
            horizon,
        })
    }

    fn m(&self) -> usize {
        self.model.input_dim()
    }

    fn inject(&self, k: usize, x: &mut [f64]) {
        let w = &self.forecast[k];
        if !w.is_empty() {
            for (&i, wi) in self.model.disturbed_indices().iter().zip(w) {
                x[i] += wi;
            }
        }
    }

    /// Predicted cost; `NaN`/`inf` when the rollout leaves the finite range.
    pub(crate) fn cost(&self, z: &[f64]) -> f64 {
        let m = self.m();
        let mut x = self.x0.to_vec();
        let mut next = vec![0.0; x.len()];
        let mut total = 0.0;
        for k in 0..self.horizon {
            let u = &z[k * m..(k + 1) * m];
            total += self.cost.stage(&x, u);
            self.model.step_unchecked(&x, u, &mut next);
            self.inject(k, &mut next);
            std::mem::swap(&mut x, &mut next);
            if !total.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return f64::NAN;
            }
        }
        total + self.cost.terminal(&x)
    }

    fn linearize(&self, z: &[f64]) -> Linearization {
        let m = self.m();
        let mut states = Vec::with_capacity(self.horizon + 1);
        let mut a = Vec::with_capacity(self.horizon);
        let mut b = Vec::with_capacity(self.horizon);
        states.push(self.x0.to_vec());
        let mut total = 0.0;
        for k in 0..self.horizon {
            let u = &z[k * m..(k + 1) * m];
            total += self.cost.stage(&states[k], u);
            let (mut next, ak, bk) = self.model.step_with_jacobians(&states[k], u);
            self.inject(k, &mut next);
            states.push(next);
            a.push(ak);
            b.push(bk);
        }
        total += self.cost.terminal(&states[self.horizon]);
        Linearization {
            cost: total,
            states,
            a,
            b,
        }
    }

    /// Exact gradient of the predicted cost by reverse accumulation.
    fn gradient(&self, lin: &Linearization, z: &[f64]) -> Vec<f64> {
        let n = self.model.state_dim();
        let m = self.m();
        let cost = self.cost;
        let weighted = |w: &[f64], v: &[f64], r: &[f64]| -> Vec<f64> {
            let d = v.len();
            (0..d)
                .map(|i| 2.0 * (0..d).map(|j| w[i * d + j] * (v[j] - r[j])).sum::<f64>())
                .collect()
        };
        let mut grad = vec![0.0; self.horizon * m];
        let mut lambda = weighted(&cost.q, &lin.states[self.horizon], &cost.x_ref);
        for k in (0..self.horizon).rev() {
            let u = &z[k * m..(k + 1) * m];
            let gu = weighted(&cost.r, u, &cost.u_ref);
            let (ak, bk) = (&lin.a[k], &lin.b[k]);
            for j in 0..m {
                grad[k * m + j] = gu[j] + (0..n).map(|i| bk[i * m + j] * lambda[i]).sum::<f64>();
            }
            let gx = weighted(&cost.q, &lin.states[k], &cost.x_ref);
            lambda = (0..n)
                .map(|j| gx[j] + (0..n).map(|i| ak[i * n + j] * lambda[i]).sum::<f64>())
                .collect();
        }
        grad
    }

    /// Gauss-Newton curvature `2 sum_k S_k' Q S_k + 2 blockdiag(R)` with
    /// `S_k = d x_k / d z` accumulated forward through the Jacobians.
    fn gauss_newton(&self, lin: &Linearization) -> DMatrix<f64> {
        let n = self.model.state_dim();
        let m = self.m();
        let nz = self.horizon * m;
        let q = DMatrix::from_row_slice(n, n, &self.cost.q);
        let r = DMatrix::from_row_slice(m, m, &self.cost.r);
        let mut hess = DMatrix::zeros(nz, nz);
        let mut s = DMatrix::<f64>::zeros(n, nz);
        for k in 0..self.horizon {
            let cols = (k + 1) * m;
            let ak = DMatrix::from_row_slice(n, n, &lin.a[k]);
            let prev = s.columns(0, k * m).into_owned();
            s.columns_mut(0, k * m).copy_from(&(&ak * prev));
            s.columns_mut(k * m, m).copy_from(&DMatrix::from_row_slice(n, m, &lin.b[k]));
            let sk = s.columns(0, cols);
            let qs = &q * sk;
            let block = sk.transpose() * qs;
            let mut view = hess.view_mut((0, 0), (cols, cols));
            view += block * 2.0;
            let mut diag = hess.view_mut((k * m, k * m), (m, m));
            diag += &r * 2.0;
        }
        hess
    }
}

fn project(z: &mut [f64], lower: &[f64], upper: &[f64], m: usize) {
    for (idx, v) in z.iter_mut().enumerate() {
        let j = idx % m;
        *v = v.clamp(lower[j], upper[j]);
    }
}

fn projected_gradient_norm(z: &[f64], g: &[f64], lower: &[f64], upper: &[f64], m: usize) -> f64 {
    z.iter()
        .zip(g)
        .enumerate()
        .map(|(idx, (zi, gi))| {
            let j = idx % m;
            (zi - (zi - gi).clamp(lower[j], upper[j])).abs()
        })
        .fold(0.0, f64::max)
}

/// Solve `(H_FF + mu I) d = -g_F`, raising `mu` until the factorization
/// succeeds.
fn newton_direction(hess: &DMatrix<f64>, g: &[f64], free: &[usize]) -> Vec<f64> {
    let nf = free.len();
    let mut sub = DMatrix::zeros(nf, nf);
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            sub[(a, b)] = hess[(i, j)];
        }
    }
    let rhs = DVector::from_iterator(nf, free.iter().map(|&i| -g[i]));
    let scale = (0..nf).map(|i| sub[(i, i)].abs()).fold(0.0, f64::max).max(1e-12);
    let mut mu = 0.0;
    for _ in 0..12 {
        let mut reg = sub.clone();
        for i in 0..nf {
            reg[(i, i)] += mu;
        }
        if let Some(ch) = reg.cholesky() {
            let d = ch.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return d.iter().copied().collect();
            }
        }
        mu = if mu == 0.0 { 1e-10 * scale } else { mu * 100.0 };
    }
    rhs.iter().map(|v| v / scale).collect()
}

/// Minimize the predicted cost over `H` inputs inside `opts.input_box`.
///
/// The returned cost is never above the cost of the projected initial
/// guess. Running out of iterations is not an error; check
/// [`OcpSolution::status`].
pub fn solve_ocp(
    model: &DiscreteModel,
    x0: &[f64],
    w_forecast: &[Vec<f64>],
    cost: &CostSpec,
    opts: &OcpOptions,
) -> Result<OcpSolution> {
    opts.validate()?;
    let h = opts.horizon;
    let m = model.input_dim();
    check_dim("input box", m, opts.input_box.dim())?;
    let problem = Problem::new(model, x0, w_forecast, cost, h)?;
    let (lower, upper) = (opts.input_box.lower(), opts.input_box.upper());

    let mut z: Vec<f64> = match &opts.warm_start {
        Some(ws) => {
            check_dim("warm start length", h, ws.len())?;
            let mut z = Vec::with_capacity(h * m);
            for u in ws {
                check_dim("warm start input", m, u.len())?;
                z.extend_from_slice(u);
            }
            z
        }
        None => cost.u_ref.iter().copied().cycle().take(h * m).collect(),
    };
    project(&mut z, lower, upper, m);

    let initial_cost = problem.cost(&z);
    if !initial_cost.is_finite() {
        return Err(Error::NonFiniteRollout);
    }
    let mut current = initial_cost;
    let mut status = SolveStatus::IterationLimit;
    let mut pg_norm = f64::INFINITY;
    let mut iterations = 0;
    let min_width = opts
        .input_box
        .widths()
        .into_iter()
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min);

    while iterations < opts.max_iterations {
        let lin = problem.linearize(&z);
        let g = problem.gradient(&lin, &z);
        pg_norm = projected_gradient_norm(&z, &g, lower, upper, m);
        if pg_norm <= opts.gradient_tolerance * (1.0 + current.abs()) {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;

        let eps = pg_norm.min(1e-3 * min_width);
        let mut free = Vec::new();
        let mut d = vec![0.0; z.len()];
        let hess = problem.gauss_newton(&lin);
        for (idx, (&zi, &gi)) in z.iter().zip(&g).enumerate() {
            let j = idx % m;
            let at_lower = zi <= lower[j] + eps && gi > 0.0;
            let at_upper = zi >= upper[j] - eps && gi < 0.0;
            if lower[j] == upper[j] || at_lower || at_upper {
                d[idx] = -gi / hess[(idx, idx)].max(1e-12);
            } else {
                free.push(idx);
            }
        }
        if !free.is_empty() {
            let df = newton_direction(&hess, &g, &free);
            for (&i, v) in free.iter().zip(df) {
                d[i] = v;
            }
        }

        match line_search(&problem, &z, &d, &g, current, lower, upper, m) {
            Some((z_new, c_new)) => {
                let decrease = current - c_new;
                z = z_new;
                current = c_new;
                if decrease <= STALL_DECREASE * (1.0 + current.abs()) {
                    status = SolveStatus::Converged;
                    break;
                }
            }
            None => {
                // fall back to the plain projected gradient arc
                let diag_max = (0..z.len()).map(|i| hess[(i, i)]).fold(1e-12, f64::max);
                let steep: Vec<f64> = g.iter().map(|gi| -gi / diag_max).collect();
                match line_search(&problem, &z, &steep, &g, current, lower, upper, m) {
                    Some((z_new, c_new)) => {
                        z = z_new;
                        current = c_new;
                    }
                    None => {
                        status = SolveStatus::Stalled;
                        break;
                    }
                }
            }
        }
    }

    Ok(OcpSolution {
        inputs: z.chunks(m.max(1)).take(h).map(<[f64]>::to_vec).collect(),
        cost: current,
        initial_cost,
        iterations,
        status,
        projected_gradient_norm: pg_norm,
    })
}

#[allow(clippy::too_many_arguments)]
fn line_search(
    problem: &Problem<'_>,
    z: &[f64],
    d: &[f64],
    g: &[f64],
    current: f64,
    lower: &[f64],
    upper: &[f64],
    m: usize,
) -> Option<(Vec<f64>, f64)> {
    let mut alpha = 1.0;
    let mut trial = vec![0.0; z.len()];
    for _ in 0..MAX_BACKTRACKS {
        for i in 0..z.len() {
            trial[i] = z[i] + alpha * d[i];
        }
        project(&mut trial, lower, upper, m);
        let slope: f64 = g.iter().zip(&trial).zip(z).map(|((gi, ti), zi)| gi * (ti - zi)).sum();
        let c = problem.cost(&trial);
        if c.is_finite() && c < current && c <= current + ARMIJO * slope.min(0.0) {
            return Some((trial, c));
        }
        alpha *= 0.5;
    }
    None
}

/// Predicted cost and its exact gradient with respect to the stacked
/// inputs, for diagnostics and gradient checks.
pub fn predicted_cost_and_gradient(
    model: &DiscreteModel,
    x0: &[f64],
    inputs: &[Vec<f64>],
    w_forecast: &[Vec<f64>],
    cost: &CostSpec,
) -> Result<(f64, Vec<f64>)> {
    let h = inputs.len();
    let problem = Problem::new(model, x0, w_forecast, cost, h)?;
    let mut z = Vec::with_capacity(h * model.input_dim());
    for u in inputs {
        check_dim("input vector", model.input_dim(), u.len())?;
        z.extend_from_slice(u);
    }
    let lin = problem.linearize(&z);
    if !lin.cost.is_finite() {
        return Err(Error::NonFiniteRollout);
    }
    let g = problem.gradient(&lin, &z);
    Ok((lin.cost, g))
}

/// Predicted cost of an input sequence under a forecast.
pub fn predicted_cost(
    model: &DiscreteModel,
    x0: &[f64],
    inputs: &[Vec<f64>],
    w_forecast: &[Vec<f64>],
    cost: &CostSpec,
) -> Result<f64> {
    let problem = Problem::new(model, x0, w_forecast, cost, inputs.len())?;
    let z: Vec<f64> = inputs.iter().flatten().copied().collect();
    check_dim("stacked inputs", inputs.len() * model.input_dim(), z.len())?;
    Ok(problem.cost(&z))
}
