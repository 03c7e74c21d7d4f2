mod common;

use common::short_benchmark;
use litmus_core::knowledge::{run_knowledge_advantage, KnowledgeConfig, KnowledgeReport, Pairing};
use litmus_core::models::BenchmarkName;
use litmus_core::pipeline::PipelineConfig;
use litmus_core::{Error, IntervalBox};

fn config(n_b: usize, max_batches: usize, seed: u64) -> KnowledgeConfig {
    KnowledgeConfig {
        n_b,
        max_batches,
        master_seed: seed,
        ..KnowledgeConfig::default()
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn degenerate_set_gives_zero_advantage_after_two_batches() {
    let b = short_benchmark(BenchmarkName::CartPoleV2, 60);
    let r = run_knowledge_advantage(&b, &IntervalBox::zeros(4), &config(4, 10, 1)).unwrap();
    assert_eq!(r.eta, 0.0);
    assert!(r.converged);
    assert_eq!(r.batches_run, 2);
    assert_eq!(r.history, vec![0.0, 0.0]);
    for s in &r.scenarios {
        assert_eq!(s.cost_nominal, s.cost_oracle);
        assert_eq!(s.delta_raw, 0.0);
    }
}

fn check_accounting(r: &KnowledgeReport, per_batch: usize) {
    assert_eq!(r.scenarios.len() + r.failures.len(), r.batches_run * per_batch);
    assert_eq!(r.history.len(), r.batches_run);
    assert!(r.scenarios.iter().all(|s| (0.0..=1.0).contains(&s.delta)));
    let mean = r.deltas().iter().sum::<f64>() / r.scenarios.len() as f64;
    assert!((r.eta - mean).abs() < 1e-15);
    assert!((0.0..=1.0).contains(&r.eta));
}

#[test]
fn report_is_independent_of_thread_count() {
    let b = short_benchmark(BenchmarkName::CartPoleV3, 50);
    let w = IntervalBox::new(vec![0.004], vec![0.006]).unwrap();
    let cfg = config(5, 3, 42);
    let one = in_pool(1, || run_knowledge_advantage(&b, &w, &cfg).unwrap());
    let four = in_pool(4, || run_knowledge_advantage(&b, &w, &cfg).unwrap());
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    check_accounting(&one, 5);
    let other_seed = run_knowledge_advantage(&b, &w, &config(5, 3, 43)).unwrap();
    assert_ne!(other_seed.eta, one.eta);
}

#[test]
fn cross_product_pairs_every_state_with_every_disturbance() {
    let b = short_benchmark(BenchmarkName::CartPoleV1, 30);
    let w = IntervalBox::cube(-0.01, 0.01, 1).unwrap();
    let cfg = KnowledgeConfig {
        n_i: 3,
        n_j: 2,
        pairing: Pairing::CrossProduct,
        ..config(1, 2, 7)
    };
    let r = run_knowledge_advantage(&b, &w, &cfg).unwrap();
    check_accounting(&r, 6);
    let pairs: Vec<(usize, usize)> = r.scenarios.iter().filter(|s| s.batch == 0).map(|s| (s.i, s.j)).collect();
    assert_eq!(pairs, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
    // scenarios sharing an initial state start from the same point, so with
    // the same disturbance draw they would agree; different j differ
    assert_ne!(r.scenarios[0].cost_nominal, r.scenarios[1].cost_nominal);
}

#[test]
fn recorded_trajectories_carry_disturbances() {
    let b = short_benchmark(BenchmarkName::CartPoleV1, 20);
    let w = IntervalBox::cube(-0.01, 0.01, 1).unwrap();
    let cfg = KnowledgeConfig {
        record_trajectories: 3,
        ..config(2, 2, 3)
    };
    let r = run_knowledge_advantage(&b, &w, &cfg).unwrap();
    assert_eq!(r.trajectories.len(), 3);
    let t = &r.trajectories[0];
    assert_eq!(t.nominal.disturbances(), t.oracle.disturbances());
    assert_eq!(t.nominal.states()[0], t.oracle.states()[0]);
    assert_eq!(t.nominal.steps(), 20);
}

/// `x' = 10 x` from initial states so large that roughly half of the
/// predicted costs overflow.
fn overflowing_system() -> litmus_core::models::BenchmarkPair {
    let cfg = PipelineConfig::from_toml_str(
        r#"
[linear_system]
a = [[10.0]]
b = [[1.0]]
dt = 0.1
disturbed_indices = [0]
x0 = { lower = [0.0], upper = [1e154] }
input_box = { lower = [-1.0], upper = [1.0] }
q = [1.0]
r = [1.0]
horizon = 1
episode_steps = 1
"#,
    )
    .unwrap();
    cfg.build_system().unwrap()
}

#[test]
fn failing_scenarios_are_excluded_or_abort_the_run() {
    let b = overflowing_system();
    let w = IntervalBox::zeros(1);
    match run_knowledge_advantage(&b, &w, &config(10, 2, 0)) {
        Err(Error::TooManyFailures { .. }) => {}
        other => panic!("expected too many failures, got {other:?}"),
    }
    let tolerant = KnowledgeConfig {
        failure_limit: 1.0,
        ..config(10, 2, 0)
    };
    let r = run_knowledge_advantage(&b, &w, &tolerant).unwrap();
    assert!(!r.failures.is_empty() && !r.scenarios.is_empty());
    check_accounting(&r, 10);
}

#[test]
fn mismatched_set_dimension_is_rejected() {
    let b = short_benchmark(BenchmarkName::CartPoleV1, 10);
    assert!(run_knowledge_advantage(&b, &IntervalBox::zeros(4), &config(2, 2, 0)).is_err());
}
