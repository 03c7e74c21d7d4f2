mod common;

use std::sync::Arc;

use common::small_dataset;
use litmus_core::learnability::{prediction_residuals, run_learnability};
use litmus_core::models::{rollout_open_loop, BenchmarkName, DiscreteModel, DisturbanceMap, LinearDynamics};
use litmus_core::rdc::RdcParams;
use litmus_core::{RandomStream, Trajectory};
use rand::Rng;

fn model() -> DiscreteModel {
    DiscreteModel::new(Arc::new(LinearDynamics::double_integrator()), 0.1, 1, DisturbanceMap::Additive(vec![0, 1])).unwrap()
}

/// Ten-step trajectories from random states under random inputs, with
/// `extra(x, rng)` added to every model prediction.
fn synthetic(count: usize, seed: u64, extra: impl Fn(&[f64], &mut dyn rand::RngCore) -> Vec<f64>) -> Vec<Trajectory> {
    let m = model();
    let mut rng = RandomStream::new(seed, vec![0x5EED]).rng();
    (0..count)
        .map(|_| {
            let mut states = vec![vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]];
            let mut inputs = Vec::new();
            for _ in 0..10 {
                let x = states.last().unwrap().clone();
                let u = vec![rng.random_range(-1.0..1.0)];
                let e = extra(&x, &mut rng);
                let next: Vec<f64> = m.step_nominal(&x, &u).unwrap().iter().zip(&e).map(|(p, e)| p + e).collect();
                states.push(next);
                inputs.push(u);
            }
            Trajectory::new(states, inputs, None, 0.1).unwrap()
        })
        .collect()
}

#[test]
fn residual_and_regressor_shapes_match() {
    let data = synthetic(7, 1, |_, _| vec![0.0, 0.0]);
    let (r, z) = prediction_residuals(&model(), &data).unwrap();
    assert_eq!((r.nrows(), r.ncols()), (70, 2));
    assert_eq!((z.nrows(), z.ncols()), (70, 3));
    // regressor row is the state and input that produced the residual
    assert_eq!(z.row(11).iter().copied().collect::<Vec<_>>(), [data[1].states()[1].clone(), data[1].inputs()[1].clone()].concat());
}

#[test]
fn self_generated_data_has_no_learnable_error() {
    let data = synthetic(20, 2, |_, _| vec![0.0, 0.0]);
    let rep = run_learnability(&model(), &data, &RdcParams::default()).unwrap();
    assert!(rep.residuals.iter().all(|v| *v == 0.0));
    assert_eq!(rep.rho, 0.0);
    assert!(rep.per_pair.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn independent_noise_stays_below_the_null_bound() {
    let data = synthetic(200, 3, |_, rng| vec![rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01)]);
    let rep = run_learnability(&model(), &data, &RdcParams::default()).unwrap();
    assert_eq!(rep.sample_count, 2000);
    assert!(rep.rho < 0.35, "rho {}", rep.rho);
}

#[test]
fn state_dependent_bias_is_learnable() {
    let data = synthetic(60, 4, |x, _| vec![0.0, 0.1 * x[0].sin()]);
    let rep = run_learnability(&model(), &data, &RdcParams::default()).unwrap();
    assert!(rep.sample_count >= 500);
    assert!(rep.rho > 0.6, "rho {}", rep.rho);
    // the velocity residual depends on position, not on the input
    assert!(rep.per_pair[1][0] > 0.9, "{:?}", rep.per_pair);
    assert!(rep.per_pair[1][2] < 0.3, "{:?}", rep.per_pair);
}

#[test]
fn constant_forcing_shows_as_a_constant_rate_residual() {
    let (b, data) = small_dataset(BenchmarkName::CartPoleV3, 3, 80, 5);
    let (r, _) = prediction_residuals(&b.model, &data).unwrap();
    let col = r.column(3);
    let mean = col.mean();
    let spread = col.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
    assert!((mean - 0.005).abs() < 1e-5, "mean {mean}");
    assert!(spread < 1e-3 * mean, "spread {spread}");
}

#[test]
fn learnability_is_deterministic() {
    let data = synthetic(30, 6, |x, rng| vec![0.0, 0.05 * x[1] + rng.random_range(-0.01..0.01)]);
    let p = RdcParams { seed: 11, ..RdcParams::default() };
    let a = run_learnability(&model(), &data, &p).unwrap();
    let b = run_learnability(&model(), &data, &p).unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_or_mismatched_data_is_an_error() {
    assert!(prediction_residuals(&model(), &[]).is_err());
    let other = DiscreteModel::new(
        Arc::new(LinearDynamics::new(3, 1, vec![0.0; 9], vec![0.0; 3], vec![0.0; 3]).unwrap()),
        0.1,
        1,
        DisturbanceMap::None,
    )
    .unwrap();
    let t = rollout_open_loop(&other, &[0.0; 3], &[vec![0.0]], None).unwrap();
    assert!(prediction_residuals(&model(), &[t]).is_err());
}
