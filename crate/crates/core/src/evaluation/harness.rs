use super::{squared_error_missing, train_logistic, EvalError, LogisticConfig, MeanImputer};
use crate::data::{introduce_mcar_with, normalize, normalize_with, split_folds, Dataset, McarMode};
use crate::evaluation::{auroc, congeniality, rmse_missing};
use crate::gain::{impute, train, TrainConfig, Variant};
use crate::nn::Matrix;
use crate::rng::RngStream;

/// Cross-validation protocol shared by the evaluate command and the tests.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSettings {
    pub folds: usize,
    pub missing_rate: f64,
    pub mcar_mode: McarMode,
    pub logistic: LogisticConfig,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            folds: 5,
            missing_rate: 0.2,
            mcar_mode: McarMode::Bernoulli,
            logistic: LogisticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub missing_cells: usize,
    pub gain_sse: f64,
    pub mean_sse: f64,
    pub gain_auroc: Option<f64>,
    pub mean_auroc: Option<f64>,
}

/// One seed of k-fold cross-validation. RMSEs pool squared errors over the
/// missing cells of every test fold; AUROCs are fold averages.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub seed: u64,
    pub folds: Vec<FoldOutcome>,
    pub gain_rmse: f64,
    pub mean_rmse: f64,
    pub gain_auroc: Option<f64>,
    pub mean_auroc: Option<f64>,
}

fn fold_average(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

fn pick(labels: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&r| labels[r]).collect()
}

fn fit_and_score(
    train_x: &Matrix,
    train_y: &[f64],
    test_x: &Matrix,
    test_y: &[f64],
    cfg: &LogisticConfig,
) -> Result<f64, EvalError> {
    let model = train_logistic(train_x, train_y, cfg)?;
    auroc(&model.predict(test_x)?, test_y)
}

/// Masks a complete dataset with MCAR missingness drawn from `seed`'s data
/// stream, then cross-validates on it.
pub fn cross_validate(
    complete: &Dataset,
    labels: Option<&[f64]>,
    config: &TrainConfig,
    settings: &CvSettings,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    let mut data_rng = RngStream::new(seed).derive("data");
    let masked = introduce_mcar_with(complete, settings.missing_rate, settings.mcar_mode, None, &mut data_rng)?;
    cross_validate_masked(&masked, labels, config, settings, seed)
}

/// k-fold cross-validation of GAIN against the mean baseline on a dataset
/// that already carries a mask and ground truth.
///
/// Each fold normalizes with parameters fitted on its training rows, trains
/// on those rows and imputes the held-out rows with a single draw. With
/// labels, a logistic model is fitted on the imputed training rows and
/// scored on the imputed test rows.
pub fn cross_validate_masked(
    masked: &Dataset,
    labels: Option<&[f64]>,
    config: &TrainConfig,
    settings: &CvSettings,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    if masked.raw_ground_truth().is_none() {
        return Err(EvalError::MissingGroundTruth);
    }
    if let Some(l) = labels {
        if l.len() != masked.n() {
            return Err(EvalError::Usage(format!("{} labels for {} rows", l.len(), masked.n())));
        }
    }
    let root = RngStream::new(seed);
    let folds = split_folds(masked.n(), settings.folds, &mut root.derive("folds"))?;
    let mut outcomes = Vec::with_capacity(folds.len());
    for (i, fold) in folds.iter().enumerate() {
        let train_raw = masked.select_rows(&fold.train);
        let test_raw = masked.select_rows(&fold.test);
        let (train_n, params) = normalize(&train_raw);
        let test_n = normalize_with(&test_raw, &params)?;
        let truth = test_n.ground_truth().ok_or(EvalError::MissingGroundTruth)?;

        let mut cfg = config.clone();
        cfg.seed = root.derive_index("train", i as u64).seed();
        let model = train(&train_n, &cfg)?;
        let mut impute_rng = root.derive_index("impute", i as u64);
        let gain_test = impute(&model, &test_raw, &mut impute_rng, 1)?.remove(0);
        let mean = MeanImputer::fit(&train_n)?;
        let mean_test = mean.transform(&test_n)?;
        let (gain_sse, missing_cells) = squared_error_missing(truth, gain_test.values(), test_n.mask());
        let (mean_sse, _) = squared_error_missing(truth, mean_test.values(), test_n.mask());

        let (mut gain_auroc, mut mean_auroc) = (None, None);
        if let Some(labels) = labels {
            let (ytr, yte) = (pick(labels, &fold.train), pick(labels, &fold.test));
            let gain_train = impute(&model, &train_raw, &mut impute_rng, 1)?.remove(0);
            gain_auroc = Some(fit_and_score(
                gain_train.values(),
                &ytr,
                gain_test.values(),
                &yte,
                &settings.logistic,
            )?);
            let mean_train = mean.transform(&train_n)?;
            mean_auroc = Some(fit_and_score(
                mean_train.values(),
                &ytr,
                mean_test.values(),
                &yte,
                &settings.logistic,
            )?);
        }
        outcomes.push(FoldOutcome {
            fold: i,
            missing_cells,
            gain_sse,
            mean_sse,
            gain_auroc,
            mean_auroc,
        });
    }
    let cells: usize = outcomes.iter().map(|f| f.missing_cells).sum();
    if cells == 0 {
        return Err(EvalError::Undefined("no missing cells in any test fold".into()));
    }
    let pooled = |f: fn(&FoldOutcome) -> f64| (outcomes.iter().map(f).sum::<f64>() / cells as f64).sqrt();
    Ok(CvOutcome {
        seed,
        gain_rmse: pooled(|f| f.gain_sse),
        mean_rmse: pooled(|f| f.mean_sse),
        gain_auroc: fold_average(outcomes.iter().map(|f| f.gain_auroc)),
        mean_auroc: fold_average(outcomes.iter().map(|f| f.mean_auroc)),
        folds: outcomes,
    })
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: Variant,
    /// One RMSE per seed, in seed order.
    pub rmse: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationOutcome {
    pub seeds: Vec<u64>,
    pub variants: Vec<VariantSummary>,
}

impl AblationOutcome {
    pub fn get(&self, variant: Variant) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.variant == variant)
    }
}

/// Trains every variant once per seed on `ds` and imputes the same rows.
///
/// `ds` is on its raw scale with a mask and ground truth. A given seed
/// drives the same initialization, batches, noise and hints in every
/// variant.
pub fn run_ablation(ds: &Dataset, base_config: &TrainConfig, seeds: &[u64]) -> Result<AblationOutcome, EvalError> {
    run_variants(ds, base_config, seeds, &Variant::ALL)
}

/// [`run_ablation`] restricted to `variants`.
pub fn run_variants(
    ds: &Dataset,
    base_config: &TrainConfig,
    seeds: &[u64],
    variants: &[Variant],
) -> Result<AblationOutcome, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::Usage("at least one seed required".into()));
    }
    if ds.raw_ground_truth().is_none() {
        return Err(EvalError::MissingGroundTruth);
    }
    let (scaled, _) = normalize(ds);
    let truth = scaled.ground_truth().ok_or(EvalError::MissingGroundTruth)?;
    let mut summaries = Vec::with_capacity(variants.len());
    for &variant in variants {
        let mut rmse = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut cfg = base_config.clone();
            cfg.seed = seed;
            cfg.variant = variant;
            let model = train(&scaled, &cfg)?;
            let mut rng = RngStream::new(seed).derive("impute");
            let imputed = impute(&model, ds, &mut rng, 1)?.remove(0);
            let r = rmse_missing(truth, imputed.values(), scaled.mask())?
                .ok_or_else(|| EvalError::Undefined("no missing cells".into()))?;
            rmse.push(r);
        }
        let (mean, std) = mean_std(&rmse);
        summaries.push(VariantSummary {
            variant,
            rmse,
            mean,
            std,
        });
    }
    Ok(AblationOutcome {
        seeds: seeds.to_vec(),
        variants: summaries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongenialityOutcome {
    pub seed: u64,
    /// Logistic weights fitted on the complete data, intercept excluded.
    pub weights_complete: Vec<f64>,
    pub gain: (f64, f64),
    pub mean: (f64, f64),
}

/// Fits logistic regression on complete data and on GAIN- and
/// mean-imputed copies of it, and measures how far the imputed-data
/// weights drift.
///
/// Everything shares the complete data's normalization so the three weight
/// vectors live on one scale.
pub fn congeniality_experiment(
    complete: &Dataset,
    labels: &[f64],
    config: &TrainConfig,
    settings: &CvSettings,
    seed: u64,
) -> Result<CongenialityOutcome, EvalError> {
    if labels.len() != complete.n() {
        return Err(EvalError::Usage(format!("{} labels for {} rows", labels.len(), complete.n())));
    }
    let (complete_n, params) = normalize(complete);
    let root = RngStream::new(seed);
    let masked = introduce_mcar_with(
        complete,
        settings.missing_rate,
        settings.mcar_mode,
        None,
        &mut root.derive("data"),
    )?;
    let masked_n = normalize_with(&masked, &params)?;

    let mut cfg = config.clone();
    cfg.seed = root.derive("train").seed();
    let model = train(&masked_n, &cfg)?;
    let gain_imp = impute(&model, &masked, &mut root.derive("impute"), 1)?.remove(0);
    let mean_imp = MeanImputer::fit(&masked_n)?.transform(&masked_n)?;

    let w = train_logistic(complete_n.values(), labels, &settings.logistic)?.weights;
    let w_gain = train_logistic(gain_imp.values(), labels, &settings.logistic)?.weights;
    let w_mean = train_logistic(mean_imp.values(), labels, &settings.logistic)?.weights;
    Ok(CongenialityOutcome {
        seed,
        gain: congeniality(&w, &w_gain)?,
        mean: congeniality(&w, &w_mean)?,
        weights_complete: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_correlated, FeatureKind};

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            iterations: 30,
            log_every: 0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn mean_std_matches_hand_values() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let ds = synthesize_correlated(60, 0.8, &mut RngStream::new(3));
        let settings = CvSettings {
            folds: 3,
            ..CvSettings::default()
        };
        let a = cross_validate(&ds, None, &tiny_config(), &settings, 11).unwrap();
        let b = cross_validate(&ds, None, &tiny_config(), &settings, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.folds.len(), 3);
        assert!(a.gain_rmse >= 0.0 && a.mean_rmse >= 0.0);
        assert!(a.gain_auroc.is_none());
    }

    #[test]
    fn cross_validation_requires_ground_truth() {
        let ds = synthesize_correlated(20, 0.5, &mut RngStream::new(1));
        let err = cross_validate_masked(&ds, None, &tiny_config(), &CvSettings::default(), 0).unwrap_err();
        assert!(matches!(err, EvalError::MissingGroundTruth));
    }

    #[test]
    fn ablation_reports_every_variant() {
        let ds = synthesize_correlated(40, 0.8, &mut RngStream::new(5));
        let masked = introduce_mcar_with(&ds, 0.3, McarMode::Bernoulli, None, &mut RngStream::new(6)).unwrap();
        let out = run_ablation(&masked, &tiny_config(), &[1, 2]).unwrap();
        assert_eq!(out.variants.len(), 5);
        for v in &out.variants {
            assert_eq!(v.rmse.len(), 2);
        }
        assert!(out.get(Variant::NoHint).is_some());
    }

    #[test]
    fn congeniality_norms_are_ordered() {
        let mut rng = RngStream::new(8);
        let ds = synthesize_correlated(80, 0.9, &mut rng);
        let labels: Vec<f64> = (0..80).map(|r| f64::from(ds.values().get(r, 0) > 0.5)).collect();
        let ds = Dataset::fully_observed(ds.names(), vec![FeatureKind::Continuous; 2], ds.raw().clone()).unwrap();
        let out = congeniality_experiment(&ds, &labels, &tiny_config(), &CvSettings::default(), 4).unwrap();
        for (l1, l2) in [out.gain, out.mean] {
            assert!(l2 <= l1 + 1e-15);
        }
    }
}
