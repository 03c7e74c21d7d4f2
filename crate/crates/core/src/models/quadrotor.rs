use super::{Scalar, VectorField};

/// Thrust gain near the ground, `1 / (1 - c (r / 4z)^2)`, with the altitude
/// clipped at `r / 2`.
#[derive(Debug, Clone, Copy)]
pub struct GroundEffect {
    pub rotor_radius: f64,
    pub coefficient: f64,
}

impl GroundEffect {
    pub fn gain<S: Scalar>(&self, altitude: S) -> S {
        let floor = 0.5 * self.rotor_radius;
        let z = if altitude.re() < floor { S::from(floor) } else { altitude };
        let ratio = z.recip() * (0.25 * self.rotor_radius);
        (-(ratio * ratio * self.coefficient) + 1.0).recip()
    }
}

/// Planar quadrotor in the x-z plane, state `[s_x, s_z, v_x, v_z, theta, omega]`,
/// input the two rotor thrusts in N.
#[derive(Debug, Clone)]
pub struct Quadrotor2d {
    pub mass: f64,
    pub inertia: f64,
    /// Rotor distance from the center of mass.
    pub arm: f64,
    pub gravity: f64,
    pub ground_effect: Option<GroundEffect>,
}

impl Quadrotor2d {
    pub fn reference() -> Self {
        Self {
            mass: 0.5,
            inertia: 5e-3,
            arm: 0.15,
            gravity: 9.81,
            ground_effect: None,
        }
    }

    pub fn hover_thrust(&self) -> f64 {
        0.5 * self.mass * self.gravity
    }
}

impl VectorField for Quadrotor2d {
    fn label(&self) -> String {
        match self.ground_effect {
            Some(_) => "planar quadrotor with ground effect".into(),
            None => "planar quadrotor".into(),
        }
    }
    fn state_dim(&self) -> usize {
        6
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, x: &[S], u: &[S], dx: &mut [S]) {
        let gain = match &self.ground_effect {
            Some(ge) => ge.gain(x[1]),
            None => S::from(1.0),
        };
        let thrust = (u[0] + u[1]) * gain;
        let theta = x[4];
        dx[0] = x[2];
        dx[1] = x[3];
        dx[2] = thrust * theta.sin() * (1.0 / self.mass);
        dx[3] = thrust * theta.cos() * (1.0 / self.mass) - self.gravity;
        dx[4] = x[5];
        dx[5] = (u[1] - u[0]) * gain * (self.arm / self.inertia);
    }
    fn params(&self) -> Vec<(String, f64)> {
        let mut p = vec![
            ("mass".into(), self.mass),
            ("inertia".into(), self.inertia),
            ("arm".into(), self.arm),
            ("gravity".into(), self.gravity),
        ];
        if let Some(ge) = &self.ground_effect {
            p.push(("rotor_radius".into(), ge.rotor_radius));
            p.push(("ground_effect_coefficient".into(), ge.coefficient));
        }
        p
    }
}
