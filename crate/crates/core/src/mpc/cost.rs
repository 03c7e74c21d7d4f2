use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::trajectory::Trajectory;

/// Quadratic tracking cost
/// `l(x, u) = (x - x_ref)' Q (x - x_ref) + (u - u_ref)' R (u - u_ref) + offset`
/// with terminal term `(x - x_ref)' Q (x - x_ref)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    /// Row-major n x n, symmetric positive semidefinite.
    pub q: Vec<f64>,
    /// Row-major m x m, symmetric positive definite.
    pub r: Vec<f64>,
    pub x_ref: Vec<f64>,
    pub u_ref: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

fn is_symmetric(a: &[f64], n: usize) -> bool {
    (0..n).all(|i| (0..i).all(|j| (a[i * n + j] - a[j * n + i]).abs() <= 1e-12 * (1.0 + a[i * n + j].abs())))
}

fn min_eigenvalue(a: &[f64], n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(DMatrix::from_row_slice(n, n, a)).eigenvalues.min()
}

impl CostSpec {
    pub fn new(q: Vec<f64>, r: Vec<f64>, x_ref: Vec<f64>, u_ref: Vec<f64>, offset: f64) -> Result<Self> {
        let cost = Self {
            q,
            r,
            x_ref,
            u_ref,
            offset,
        };
        cost.validate()?;
        Ok(cost)
    }

    pub fn diagonal(q: &[f64], r: &[f64], x_ref: Vec<f64>, u_ref: Vec<f64>) -> Result<Self> {
        Self::new(diag(q), diag(r), x_ref, u_ref, 0.0)
    }

    pub fn state_dim(&self) -> usize {
        self.x_ref.len()
    }

    pub fn input_dim(&self) -> usize {
        self.u_ref.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.state_dim();
        let m = self.input_dim();
        check_dim("cost Q entries", n * n, self.q.len())?;
        check_dim("cost R entries", m * m, self.r.len())?;
        if !is_symmetric(&self.q, n) || !is_symmetric(&self.r, m) {
            return Err(Error::Config("cost weights must be symmetric".into()));
        }
        if min_eigenvalue(&self.q, n) < -1e-12 {
            return Err(Error::Config("state weight Q must be positive semidefinite".into()));
        }
        if m > 0 && min_eigenvalue(&self.r, m) <= 0.0 {
            return Err(Error::Config("input weight R must be positive definite".into()));
        }
        if !(self.offset >= 0.0) {
            return Err(Error::Config(format!("stage offset must be nonnegative, got {}", self.offset)));
        }
        Ok(())
    }

    pub fn state_cost(&self, x: &[f64]) -> f64 {
        quad_form(&self.q, x, &self.x_ref)
    }

    pub fn input_cost(&self, u: &[f64]) -> f64 {
        quad_form(&self.r, u, &self.u_ref)
    }

    pub fn stage(&self, x: &[f64], u: &[f64]) -> f64 {
        self.state_cost(x) + self.input_cost(u) + self.offset
    }

    pub fn terminal(&self, x: &[f64]) -> f64 {
        self.state_cost(x)
    }
}

pub(crate) fn diag(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut out = vec![0.0; n * n];
    for (i, v) in d.iter().enumerate() {
        out[i * n + i] = *v;
    }
    out
}

fn quad_form(w: &[f64], v: &[f64], reference: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        let di = v[i] - reference[i];
        if di == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            let wij = w[i * n + j];
            if wij != 0.0 {
                row += wij * (v[j] - reference[j]);
            }
        }
        acc += di * row;
    }
    acc
}

/// Cost `J` of a whole trajectory: every stage plus the terminal state.
pub fn total_cost(cost: &CostSpec, traj: &Trajectory) -> Result<f64> {
    check_dim("cost state dimension", cost.state_dim(), traj.state_dim())?;
    if let Some(m) = traj.input_dim() {
        check_dim("cost input dimension", cost.input_dim(), m)?;
    }
    let states = traj.states();
    let stages: f64 = traj
        .inputs()
        .iter()
        .enumerate()
        .map(|(k, u)| cost.stage(&states[k], u))
        .sum();
    Ok(stages + cost.terminal(traj.final_state()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_at_reference() {
        let c = CostSpec::diagonal(&[1.0, 2.0], &[0.5], vec![1.0, -1.0], vec![0.3]).unwrap();
        let t = Trajectory::new(vec![vec![1.0, -1.0]; 4], vec![vec![0.3]; 3], None, 0.1).unwrap();
        assert_eq!(total_cost(&c, &t).unwrap(), 0.0);
    }

    #[test]
    fn single_step_arithmetic() {
        let c = CostSpec::new(diag(&[1.0, 1.0]), vec![0.0], vec![0.0, 0.0], vec![0.0], 0.0);
        // R = 0 is only positive semidefinite, so construct directly
        assert!(c.is_err());
        let c = CostSpec {
            q: diag(&[1.0, 1.0]),
            r: vec![0.0],
            x_ref: vec![0.0, 0.0],
            u_ref: vec![0.0],
            offset: 0.0,
        };
        let t = Trajectory::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![vec![5.0]], None, 0.1).unwrap();
        assert_eq!(total_cost(&c, &t).unwrap(), 2.0);
    }

    #[test]
    fn rejects_indefinite_weights() {
        assert!(CostSpec::new(vec![1.0, 2.0, 2.0, 1.0], vec![1.0], vec![0.0; 2], vec![0.0], 0.0).is_err());
        assert!(CostSpec::new(vec![1.0, 0.5, 0.0, 1.0], vec![1.0], vec![0.0; 2], vec![0.0], 0.0).is_err());
        assert!(CostSpec::new(diag(&[1.0]), vec![1.0], vec![0.0], vec![0.0], -1.0).is_err());
    }

    proptest! {
        #[test]
        fn nonnegative(states in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 2..10), u in -3.0..3.0f64) {
            let c = CostSpec::new(vec![2.0, 0.5, 0.5, 1.0], vec![0.1], vec![0.3, -0.2], vec![0.1], 0.0).unwrap();
            let n = states.len();
            let t = Trajectory::new(states, vec![vec![u]; n - 1], None, 0.1).unwrap();
            prop_assert!(total_cost(&c, &t).unwrap() >= 0.0);
        }
    }
}
