//! Metrics, baselines and experiment harnesses.
//!
//! Also home to the exhaustive posterior oracle for small binary toys, used
//! to check that a trained discriminator lands where it should.

mod baseline;
mod checks;
mod harness;
mod logistic;
mod metrics;
mod oracle;
mod report;

pub use baseline::{mean_impute, MeanImputer};
pub use checks::{gain_gradcheck, mlp_gradcheck, oracle_checks, CheckResult, GradcheckSettings};
pub use harness::{
    congeniality_experiment, cross_validate, cross_validate_masked, mean_std, run_ablation, run_variants, AblationOutcome,
    CongenialityOutcome, CvOutcome, CvSettings, FoldOutcome, VariantSummary,
};
pub use logistic::{train_logistic, LogisticConfig, LogisticModel};
pub use oracle::{
    bayes_oracle, compare_with_oracle, reference_toy, train_discriminator_on_toy, DiscretePosteriorTable, GeneratorTable,
    OracleComparison, OracleTrainConfig, PosteriorEntry, ToyModel, MAX_TOY_D,
};
pub use metrics::{auroc, congeniality, rmse_missing, squared_error_missing};
pub use report::{MetricsReport, REPORT_VERSION};

use crate::data::DataError;
use crate::gain::GainError;
use crate::nn::ShapeError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{0}")]
    Usage(String),
    /// A metric with no defined value, e.g. RMSE without missing cells.
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("ground truth is not available")]
    MissingGroundTruth,
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}
