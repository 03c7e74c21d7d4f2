use super::{Scalar, VectorField};
use crate::error::{check_dim, Result};

/// `dx/dt = A x + B u + c`, matrices row-major.
#[derive(Debug, Clone)]
pub struct LinearDynamics {
    n: usize,
    m: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl LinearDynamics {
    pub fn new(n: usize, m: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        check_dim("linear dynamics A", n * n, a.len())?;
        check_dim("linear dynamics B", n * m, b.len())?;
        check_dim("linear dynamics c", n, c.len())?;
        Ok(Self { n, m, a, b, c })
    }

    /// Position/velocity pair driven by a force input.
    pub fn double_integrator() -> Self {
        Self::new(2, 1, vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).expect("static shapes")
    }
}

impl VectorField for LinearDynamics {
    fn label(&self) -> String {
        format!("linear ({} states, {} inputs)", self.n, self.m)
    }
    fn state_dim(&self) -> usize {
        self.n
    }
    fn input_dim(&self) -> usize {
        self.m
    }
    fn eval<S: Scalar>(&self, x: &[S], u: &[S], dx: &mut [S]) {
        for i in 0..self.n {
            let mut acc = S::from(self.c[i]);
            for j in 0..self.n {
                let a = self.a[i * self.n + j];
                if a != 0.0 {
                    acc += x[j] * a;
                }
            }
            for j in 0..self.m {
                let b = self.b[i * self.m + j];
                if b != 0.0 {
                    acc += u[j] * b;
                }
            }
            dx[i] = acc;
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        let mut p = Vec::new();
        p.extend(self.a.iter().enumerate().map(|(k, v)| (format!("A[{}][{}]", k / self.n, k % self.n), *v)));
        p.extend(self.b.iter().enumerate().map(|(k, v)| (format!("B[{}][{}]", k / self.m.max(1), k % self.m.max(1)), *v)));
        p.extend(self.c.iter().enumerate().map(|(k, v)| (format!("c[{k}]"), *v)));
        p
    }
}
