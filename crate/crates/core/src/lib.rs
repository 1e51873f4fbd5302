//! Generative adversarial imputation for tabular data.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense networks, backpropagation, Adam, finite-difference checks.
//! - [`data`]: datasets with observation masks, CSV I/O, normalization,
//!   MCAR masking, folds and synthetic data.
//! - [`gain`]: generator, discriminator, hint sampling, losses, the
//!   adversarial training loop and multiple imputation.
//! - [`evaluation`]: RMSE, AUROC, congeniality, baselines, ablations and the
//!   exact optimal-discriminator oracle.
//! - [`cli`]: the `gain` command-line front end.

pub mod cli;
pub mod data;
pub mod evaluation;
pub mod gain;
pub mod nn;
pub mod rng;

pub use rng::RngStream;
