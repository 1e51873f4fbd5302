#![allow(dead_code)]

use gain::data::{Dataset, FeatureKind, Mask};
use gain::nn::Matrix;
use gain::RngStream;

/// Random `n × d` dataset on [0, 1] with roughly `rate` of cells missing.
/// Every column keeps at least one observed cell and at least one cell is missing.
pub fn random_masked(n: usize, d: usize, rate: f64, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed);
    let data: Vec<f64> = (0..n * d).map(|_| rng.uniform()).collect();
    let mut bits: Vec<bool> = (0..n * d).map(|_| !rng.bernoulli(rate)).collect();
    for c in 0..d {
        bits[c] = true;
    }
    if bits.iter().all(|&b| b) {
        bits[n * d - 1] = false;
    }
    let names = (0..d).map(|c| format!("f{c}")).collect();
    Dataset::new(
        names,
        vec![FeatureKind::Continuous; d],
        Matrix::new(n, d, data).unwrap(),
        Mask::from_bits(n, d, bits).unwrap(),
    )
    .unwrap()
}

pub fn small_config(iterations: usize, seed: u64) -> gain::gain::TrainConfig {
    gain::gain::TrainConfig {
        iterations,
        batch_d: 16,
        batch_g: 16,
        seed,
        ..Default::default()
    }
}
