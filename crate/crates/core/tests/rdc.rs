mod common;

use common::cca_oracle;
use litmus_core::rdc::{empirical_copula, largest_canonical_correlation, random_features, rdc, RdcParams};
use litmus_core::RandomStream;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn normals(m: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = RandomStream::new(seed, vec![0xDA7A]).rng();
    DMatrix::from_fn(m, d, |_, _| rng.sample(StandardNormal))
}

fn uniforms(m: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = RandomStream::new(seed, vec![0xDA7B]).rng();
    DMatrix::from_fn(m, d, |_, _| rng.random::<f64>())
}

fn params(seed: u64) -> RdcParams {
    RdcParams { seed, ..RdcParams::default() }
}

#[test]
fn cca_matches_independent_oracle() {
    for seed in 0..10 {
        let a = normals(100, 5, seed);
        // partly dependent second block
        let b = &a * normals(5, 5, 100 + seed) * 0.3 + normals(100, 5, 200 + seed);
        let got = largest_canonical_correlation(&a, &b, 1e-3).unwrap();
        let want = cca_oracle(&a, &b, 1e-3);
        assert!((got - want).abs() < 1e-8, "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn monotone_transforms_leave_rdc_unchanged_exactly() {
    let x = normals(400, 2, 1);
    let y = DMatrix::from_fn(400, 1, |i, _| x[(i, 0)].powi(3) + 0.1 * x[(i, 1)]);
    let p = params(9);
    let base = rdc(&x, &y, &p).unwrap();
    let tx = x.map(|v| v.exp());
    let ty = y.map(|v| 2.0 * v + v.powi(3));
    assert_eq!(rdc(&tx, &ty, &p).unwrap(), base);
}

#[test]
fn self_dependence_is_detected() {
    let x = normals(1000, 1, 2);
    let r = rdc(&x, &x, &params(0)).unwrap();
    assert!(r > 0.95, "{r}");
}

#[test]
fn independent_uniforms_score_low() {
    let r = rdc(&uniforms(1000, 1, 3), &uniforms(1000, 1, 4), &params(0)).unwrap();
    assert!(r < 0.3, "{r}");
}

fn percentile_95(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(0.95 * (v.len() - 1) as f64).round() as usize]
}

#[test]
fn null_distribution_is_calibrated() {
    let draws: Vec<f64> = (0..100)
        .map(|i| rdc(&normals(500, 1, 1000 + i), &normals(500, 1, 5000 + i), &params(i)).unwrap())
        .collect();
    let p95 = percentile_95(draws);
    assert!(p95 < 0.35, "95th percentile {p95}");
}

#[test]
fn oscillating_dependence_is_detected_with_wide_features() {
    // Two full periods on the copula scale need projection frequencies
    // near 4 pi; the default weight variance of 1/6 barely reaches them.
    let x = uniforms(1000, 1, 7);
    let noise = normals(1000, 1, 8);
    let y = DMatrix::from_fn(1000, 1, |i, _| (4.0 * std::f64::consts::PI * x[(i, 0)]).sin() + 0.05 * noise[(i, 0)]);
    let p = RdcParams { s: 6.0, ..params(0) };
    let r = rdc(&x, &y, &p).unwrap();
    assert!(r > 0.7, "{r}");
}

#[test]
fn seeds_make_rdc_reproducible() {
    let x = normals(300, 2, 11);
    let y = normals(300, 1, 12);
    assert_eq!(rdc(&x, &y, &params(5)).unwrap(), rdc(&x, &y, &params(5)).unwrap());
}

#[test]
fn degenerate_inputs_give_zero() {
    let x = normals(50, 2, 13);
    assert_eq!(rdc(&DMatrix::zeros(50, 3), &x, &params(0)).unwrap(), 0.0);
    assert_eq!(rdc(&x, &DMatrix::from_element(50, 1, 4.2), &params(0)).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rdc_lies_in_unit_interval(seed in 0u64..10_000, m in 3usize..60, dx in 1usize..4, dy in 1usize..4, k in 1usize..25) {
        let x = normals(m, dx, seed);
        let y = normals(m, dy, seed + 1).map(|v| v.round());
        let p = RdcParams { k, ..params(seed) };
        let r = rdc(&x, &y, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn copula_entries_lie_in_unit_interval(seed in 0u64..10_000, m in 2usize..40) {
        let c = empirical_copula(&normals(m, 2, seed).map(|v| (v * 2.0).round())).unwrap();
        prop_assert!(c.iter().all(|v| *v > 0.0 && *v <= 1.0));
    }

    #[test]
    fn features_lie_in_sine_range(seed in 0u64..10_000, s in 1e-3f64..50.0) {
        let c = empirical_copula(&normals(20, 3, seed)).unwrap();
        let f = random_features(&c, &RdcParams { s, ..params(seed) }, &RandomStream::new(seed, vec![1])).unwrap();
        prop_assert!(f.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
