use super::{Scalar, VectorField};

/// Cart with a hinged pole, state `[s, v, theta, omega]` with `theta = 0`
/// upright, input the horizontal force on the cart.
#[derive(Debug, Clone)]
pub struct CartPole {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Distance from the hinge to the pole's center of mass.
    pub half_length: f64,
}

impl CartPole {
    pub fn classic() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
        }
    }
}

impl VectorField for CartPole {
    fn label(&self) -> String {
        "cart pole".into()
    }
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], u: &[S], dx: &mut [S]) {
        let total = self.cart_mass + self.pole_mass;
        let pml = self.pole_mass * self.half_length;
        let (sin, cos) = (x[2].sin(), x[2].cos());
        let omega = x[3];
        let temp = (u[0] + sin * omega * omega * pml) / total;
        let denom = (cos * cos * (-self.pole_mass / total) + 4.0 / 3.0) * self.half_length;
        let theta_acc = (sin * self.gravity - cos * temp) / denom;
        let x_acc = temp - theta_acc * cos * (pml / total);
        dx[0] = x[1];
        dx[1] = x_acc;
        dx[2] = omega;
        dx[3] = theta_acc;
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("gravity".into(), self.gravity),
            ("cart_mass".into(), self.cart_mass),
            ("pole_mass".into(), self.pole_mass),
            ("half_length".into(), self.half_length),
        ]
    }
}
