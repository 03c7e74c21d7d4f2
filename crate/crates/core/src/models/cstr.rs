use super::{Scalar, VectorField};

/// Universal gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314;

/// Stirred tank with the reversible reaction A <-> B.
///
/// State `[c_A, c_B, T]` in mol/L and K, input the heater/cooler duty in kW.
/// Forward rate `k_A c_A`, backward rate `k_B c_B`, each Arrhenius
/// `k = k0 exp(-Ea / (R T))`. Time unit is seconds.
#[derive(Debug, Clone)]
pub struct Cstr {
    /// Reactor volume, L.
    pub volume: f64,
    /// Feed flow, L/s.
    pub flow: f64,
    /// Feed concentration of A, mol/L (the feed carries no B).
    pub feed_conc_a: f64,
    /// Feed temperature, K.
    pub feed_temp: f64,
    /// Volumetric heat capacity rho * c_p, kJ/(L K).
    pub heat_capacity: f64,
    /// Pre-exponential factors, 1/s.
    pub k0_a: f64,
    pub k0_b: f64,
    /// Activation energies, J/mol.
    pub ea_a: f64,
    pub ea_b: f64,
    /// Reaction enthalpies, kJ/mol (A -> B exothermic, B -> A the reverse).
    pub dh_a: f64,
    pub dh_b: f64,
}

impl Cstr {
    pub fn reference() -> Self {
        Self {
            volume: 100.0,
            flow: 100.0 / 600.0,
            feed_conc_a: 1.0,
            feed_temp: 350.0,
            heat_capacity: 4.184,
            k0_a: 5.8e4,
            k0_b: 3.1e7,
            ea_a: 50_000.0,
            ea_b: 75_000.0,
            dh_a: -20.0,
            dh_b: 20.0,
        }
    }

    pub fn rates(&self, temp: f64) -> (f64, f64) {
        (
            self.k0_a * (-self.ea_a / (GAS_CONSTANT * temp)).exp(),
            self.k0_b * (-self.ea_b / (GAS_CONSTANT * temp)).exp(),
        )
    }

    /// Steady state at temperature `temp`, and the duty that holds it.
    pub fn steady_state(&self, temp: f64) -> ([f64; 3], f64) {
        let (ka, kb) = self.rates(temp);
        let tau = self.volume / self.flow;
        let cb = self.feed_conc_a * ka * tau / (1.0 + ka * tau + kb * tau);
        let ca = self.feed_conc_a - cb;
        let heat = self.flow * self.heat_capacity * (self.feed_temp - temp)
            - self.dh_a * ka * ca * self.volume
            - self.dh_b * kb * cb * self.volume;
        ([ca, cb, temp], -heat)
    }
}

impl VectorField for Cstr {
    fn label(&self) -> String {
        "CSTR A <-> B".into()
    }
    fn state_dim(&self) -> usize {
        3
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], u: &[S], dx: &mut [S]) {
        let (ca, cb, t) = (x[0], x[1], x[2]);
        let inv_rt = t.recip() * (1.0 / GAS_CONSTANT);
        let ka = (inv_rt * (-self.ea_a)).exp() * self.k0_a;
        let kb = (inv_rt * (-self.ea_b)).exp() * self.k0_b;
        let dilution = self.flow / self.volume;
        let forward = ka * ca;
        let backward = kb * cb;
        dx[0] = (-ca + self.feed_conc_a) * dilution - forward + backward;
        dx[1] = -cb * dilution + forward - backward;
        let heat = (-t + self.feed_temp) * (self.flow * self.heat_capacity)
            + forward * (-self.dh_a * self.volume)
            + backward * (-self.dh_b * self.volume)
            + u[0];
        dx[2] = heat / (self.volume * self.heat_capacity);
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("volume".into(), self.volume),
            ("flow".into(), self.flow),
            ("feed_conc_a".into(), self.feed_conc_a),
            ("feed_temp".into(), self.feed_temp),
            ("heat_capacity".into(), self.heat_capacity),
            ("k0_a".into(), self.k0_a),
            ("k0_b".into(), self.k0_b),
            ("ea_a".into(), self.ea_a),
            ("ea_b".into(), self.ea_b),
            ("dh_a".into(), self.dh_a),
            ("dh_b".into(), self.dh_b),
        ]
    }
}
