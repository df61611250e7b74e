#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tenure_graph::model::{laplacian, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric, zero-diagonal, entries in `[lo, hi)`.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(lo..hi);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

pub fn random_laplacian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    laplacian(&random_weights(rng, n, 0.01, 10.0)).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}
