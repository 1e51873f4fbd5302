use super::GainError;
use crate::nn::{Activation, Matrix, Mlp};
use crate::rng::RngStream;

fn check_net(net: &Mlp, d: usize, what: &str) -> Result<(), GainError> {
    let last = net.layers().last().expect("non-empty").activation;
    if net.in_dim() != 2 * d || net.out_dim() != d || last != Activation::Sigmoid {
        return Err(GainError::Usage(format!(
            "{what} must map {} inputs to {d} sigmoid outputs",
            2 * d
        )));
    }
    Ok(())
}

/// Imputes every component from `[m ⊙ x + (1 − m) ⊙ z, m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub net: Mlp,
}

impl Generator {
    pub fn new(d: usize, hidden: &[usize], rng: &mut RngStream) -> Self {
        Self {
            net: Mlp::xavier(2 * d, hidden, d, Activation::Sigmoid, rng),
        }
    }

    pub fn from_net(net: Mlp) -> Result<Self, GainError> {
        let d = net.out_dim();
        check_net(&net, d, "generator")?;
        Ok(Self { net })
    }

    pub fn d(&self) -> usize {
        self.net.out_dim()
    }

    /// Network input for a batch: observed values with noise in the missing
    /// slots, followed by the mask.
    pub fn input_batch(values: &Matrix, mask: &Matrix, noise: &Matrix) -> Matrix {
        let (n, d) = values.shape();
        let mut out = Matrix::zeros(n, 2 * d);
        for r in 0..n {
            let (x, m, z) = (values.row(r), mask.row(r), noise.row(r));
            let row = out.row_mut(r);
            for i in 0..d {
                row[i] = m[i] * x[i] + (1.0 - m[i]) * z[i];
                row[d + i] = m[i];
            }
        }
        out
    }
}

/// Predicts, per component, the probability that it was observed.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub net: Mlp,
}

impl Discriminator {
    pub fn new(d: usize, hidden: &[usize], rng: &mut RngStream) -> Self {
        Self {
            net: Mlp::xavier(2 * d, hidden, d, Activation::Sigmoid, rng),
        }
    }

    pub fn from_net(net: Mlp) -> Result<Self, GainError> {
        let d = net.out_dim();
        check_net(&net, d, "discriminator")?;
        Ok(Self { net })
    }

    pub fn d(&self) -> usize {
        self.net.out_dim()
    }

    /// `[x̂, h]` row by row.
    pub fn input_batch(completed: &Matrix, hints: &Matrix) -> Matrix {
        completed.hcat(hints).expect("completed and hints share rows")
    }

    /// `m̂` for a batch.
    pub fn discriminate(&self, completed: &Matrix, hints: &Matrix) -> Result<Matrix, GainError> {
        Ok(self.net.predict(&Self::input_batch(completed, hints))?)
    }
}

/// `x̄ = G(x̃, m, (1 − m) ⊙ z)` for one row. `values` holds the sentinel 0 in
/// missing slots and `z_masked` is zero in observed slots.
pub fn generate(gen: &Generator, values: &[f64], m: &[f64], z_masked: &[f64]) -> Result<Vec<f64>, GainError> {
    let d = gen.d();
    if values.len() != d || m.len() != d || z_masked.len() != d {
        return Err(GainError::Usage(format!("generate expects rows of length {d}")));
    }
    let x = Matrix::new(1, d, values.to_vec())?;
    let mm = Matrix::new(1, d, m.to_vec())?;
    let z = Matrix::new(1, d, z_masked.to_vec())?;
    Ok(gen.net.predict(&Generator::input_batch(&x, &mm, &z))?.into_vec())
}

/// `x̂ = m ⊙ x + (1 − m) ⊙ x̄`.
pub fn complete(values: &[f64], m: &[f64], x_bar: &[f64]) -> Vec<f64> {
    values
        .iter()
        .zip(m)
        .zip(x_bar)
        .map(|((&x, &mi), &xb)| if mi == 1.0 { x } else if mi == 0.0 { xb } else { mi * x + (1.0 - mi) * xb })
        .collect()
}

pub fn complete_batch(values: &Matrix, mask: &Matrix, x_bar: &Matrix) -> Matrix {
    let (n, d) = values.shape();
    let mut out = Matrix::zeros(n, d);
    for r in 0..n {
        let row = complete(values.row(r), mask.row(r), x_bar.row(r));
        out.row_mut(r).copy_from_slice(&row);
    }
    out
}
