#![allow(dead_code)]

use litmus_core::models::{make_benchmark, BenchmarkName, BenchmarkPair};
use litmus_core::pipeline::generate_data;
use litmus_core::Trajectory;
use nalgebra::{DMatrix, SymmetricEigen};

/// Benchmark with shortened episodes.
pub fn short_benchmark(name: BenchmarkName, steps: usize) -> BenchmarkPair {
    let mut b = make_benchmark(name).unwrap();
    b.horizon_steps = steps;
    b
}

pub fn small_dataset(name: BenchmarkName, trajectories: usize, steps: usize, seed: u64) -> (BenchmarkPair, Vec<Trajectory>) {
    let b = short_benchmark(name, steps);
    let data = generate_data(&b, trajectories, seed).unwrap();
    (b, data)
}

/// One classical RK4 step of `dx/dt = A x + B u` with `u` held, written out
/// as matrices.
pub fn rk4_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let i = DMatrix::<f64>::identity(n, n);
    let ha = a * h;
    let ha2 = &ha * &ha;
    let ha3 = &ha2 * &ha;
    let ad = &i + &ha + &ha2 / 2.0 + &ha3 / 6.0 + &ha3 * &ha / 24.0;
    let bd = (&i * h + &ha * (h / 2.0) + &ha2 * (h / 6.0) + &ha3 * (h / 24.0)) * b;
    (ad, bd)
}

/// First-step gain of the finite-horizon LQR with terminal weight `Q`.
pub fn riccati_first_gain(ad: &DMatrix<f64>, bd: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, h: usize) -> DMatrix<f64> {
    let mut p = q.clone();
    let mut k = DMatrix::zeros(bd.ncols(), ad.nrows());
    for _ in 0..h {
        let s = r + bd.transpose() * &p * bd;
        k = s.clone().lu().solve(&(bd.transpose() * &p * ad)).unwrap();
        p = q + ad.transpose() * &p * ad - ad.transpose() * &p * bd * &k;
        p = (&p + p.transpose()) / 2.0;
    }
    k
}

/// Inverse square root through the eigendecomposition.
fn inv_sqrt(c: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(c.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Textbook CCA: largest singular value of `Caa^{-1/2} Cab Cbb^{-1/2}`.
pub fn cca_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>, reg: f64) -> f64 {
    let m = a.nrows() as f64;
    let center = |x: &DMatrix<f64>| {
        let mean = x.row_mean();
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - mean[j])
    };
    let (a, b) = (center(a), center(b));
    let caa = a.transpose() * &a / (m - 1.0) + DMatrix::identity(a.ncols(), a.ncols()) * reg;
    let cbb = b.transpose() * &b / (m - 1.0) + DMatrix::identity(b.ncols(), b.ncols()) * reg;
    let cab = a.transpose() * &b / (m - 1.0);
    let t = inv_sqrt(&caa) * cab * inv_sqrt(&cbb);
    t.svd(false, false).singular_values.max().clamp(0.0, 1.0)
}

