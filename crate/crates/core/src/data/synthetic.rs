use super::{normalize, Dataset, FeatureKind};
use crate::nn::Matrix;
use crate::rng::RngStream;

fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for x in v.iter_mut() {
        *x -= mean;
        if sd > 0.0 {
            *x /= sd;
        }
    }
}

/// Two continuous features with correlation `rho`:
/// `x2 = rho·x1 + √(1−rho²)·ε` with `x1, ε ~ N(0, 1)`.
///
/// Both columns are standardized, then min-max normalized.
pub fn synthesize_correlated(n: usize, rho: f64, rng: &mut RngStream) -> Dataset {
    assert!(n >= 1, "n must be at least 1");
    assert!((-1.0..=1.0).contains(&rho), "rho must lie in [-1, 1]");
    let s = (1.0 - rho * rho).sqrt();
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.normal();
        let e = rng.normal();
        x1.push(a);
        x2.push(rho * a + s * e);
    }
    standardize(&mut x1);
    standardize(&mut x2);
    let data: Vec<f64> = x1.iter().zip(&x2).flat_map(|(&a, &b)| [a, b]).collect();
    let raw = Matrix::new(n, 2, data).expect("sized");
    let ds = Dataset::fully_observed(
        vec!["x1".into(), "x2".into()],
        vec![FeatureKind::Continuous; 2],
        raw,
    )
    .expect("finite values");
    normalize(&ds).0
}
