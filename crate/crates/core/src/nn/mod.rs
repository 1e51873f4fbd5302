//! Dense feed-forward networks with manual backpropagation.
//!
//! This is the numeric engine behind the generator, the discriminator and the
//! logistic-regression evaluator. Everything is `f64` and every random choice
//! goes through an explicit [`RngStream`](crate::rng::RngStream).

mod gradcheck;
mod matrix;
mod mlp;
mod optim;

pub use gradcheck::{finite_diff_grad, max_relative_error, GradCheckReport};
pub use matrix::Matrix;
pub use mlp::{xavier_init, Activation, Backprop, DenseLayer, ForwardTrace, Gradients, LayerGradient, Mlp};
pub use optim::{adam_step, AdamState, Optimizer, OptimizerKind};

/// Dimension mismatch between operands.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("shape error: {0}")]
pub struct ShapeError(pub String);

impl ShapeError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// Clamp applied to every logarithm argument.
pub const LOG_CLAMP: f64 = 1e-8;

#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP)
}

/// `ln` of a probability after clamping into `[1e-8, 1 - 1e-8]`.
#[inline]
pub fn safe_ln(p: f64) -> f64 {
    clamp_prob(p).ln()
}
