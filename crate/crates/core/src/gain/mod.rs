//! Generative adversarial imputation.
//!
//! The generator sees observed values (noise in the missing slots) plus the
//! mask and proposes a value for every component. The discriminator sees the
//! completed row plus a hint that reveals all mask entries but one, and
//! guesses which components were observed. Only the hidden component enters
//! either adversarial loss.

mod config;
mod hint;
mod impute;
mod losses;
mod nets;
mod serialize;
mod train;

pub use config::{TrainConfig, Variant};
pub use hint::{sample_hint, sample_noise, HintDraw};
pub use impute::{generator_outputs, impute};
pub use losses::{loss_d, loss_d_grad, loss_g_adv, loss_g_adv_grad, loss_m, loss_m_grad};
pub use nets::{complete, complete_batch, generate, Discriminator, Generator};
pub use serialize::{read_model, write_model, FORMAT_VERSION};
pub use train::{
    discriminator_gradients, discriminator_gradients_on, generator_gradients, train, Batch, GainModel, LossRecord,
    TrainStreams,
};

use crate::data::DataError;
use crate::nn::ShapeError;

#[derive(Debug, thiserror::Error)]
pub enum GainError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("training diverged at iteration {iteration}: {loss} = {value}")]
    Divergence {
        iteration: usize,
        loss: &'static str,
        value: f64,
    },
    #[error("model file: {0}")]
    Format(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}
