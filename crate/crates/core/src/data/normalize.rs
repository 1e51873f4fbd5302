use log::warn;

use super::{DataError, Dataset, FeatureKind, Mask};
use crate::nn::Matrix;

/// Affine map of one feature onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScale {
    pub min: f64,
    pub max: f64,
    pub kind: FeatureKind,
    /// Set when a continuous feature had `min == max`; such a feature maps to 0.5.
    pub constant: bool,
}

impl FeatureScale {
    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        match (self.kind, self.constant) {
            (FeatureKind::Binary, _) => x,
            (FeatureKind::Continuous, true) => 0.5,
            (FeatureKind::Continuous, false) => (x - self.min) / (self.max - self.min),
        }
    }

    #[inline]
    pub fn inverse(&self, v: f64) -> f64 {
        match (self.kind, self.constant) {
            (FeatureKind::Binary, _) => v,
            (FeatureKind::Continuous, true) => self.min,
            (FeatureKind::Continuous, false) => self.min + v * (self.max - self.min),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    pub scales: Vec<FeatureScale>,
}

impl NormalizationParams {
    /// Identity map (every feature already on `[0, 1]`).
    pub fn identity(kinds: &[FeatureKind]) -> Self {
        Self {
            scales: kinds
                .iter()
                .map(|&kind| FeatureScale {
                    min: 0.0,
                    max: 1.0,
                    kind,
                    constant: false,
                })
                .collect(),
        }
    }

    /// Min/max over observed cells only.
    pub fn fit(raw: &Matrix, mask: &Mask, kinds: &[FeatureKind]) -> Self {
        let scales = kinds
            .iter()
            .enumerate()
            .map(|(c, &kind)| {
                if kind == FeatureKind::Binary {
                    return FeatureScale {
                        min: 0.0,
                        max: 1.0,
                        kind,
                        constant: false,
                    };
                }
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for r in 0..raw.rows() {
                    if mask.get(r, c) {
                        lo = lo.min(raw.get(r, c));
                        hi = hi.max(raw.get(r, c));
                    }
                }
                if lo > hi {
                    lo = 0.0;
                    hi = 0.0;
                }
                FeatureScale {
                    min: lo,
                    max: hi,
                    kind,
                    constant: lo == hi,
                }
            })
            .collect();
        Self { scales }
    }

    pub fn d(&self) -> usize {
        self.scales.len()
    }

    pub fn constant_features(&self) -> Vec<usize> {
        self.scales
            .iter()
            .enumerate()
            .filter(|(_, s)| s.constant)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn select(&self, keep: &[usize]) -> Self {
        Self {
            scales: keep.iter().map(|&c| self.scales[c]).collect(),
        }
    }

    /// Scales observed cells; missing cells get the sentinel 0.
    pub fn apply(&self, raw: &Matrix, mask: &Mask) -> Matrix {
        let mut out = Matrix::zeros(raw.rows(), raw.cols());
        for r in 0..raw.rows() {
            for (c, s) in self.scales.iter().enumerate() {
                if mask.get(r, c) {
                    out.set(r, c, s.forward(raw.get(r, c)));
                }
            }
        }
        out
    }

    pub fn invert(&self, values: &Matrix, mask: &Mask) -> Matrix {
        let mut out = Matrix::zeros(values.rows(), values.cols());
        for r in 0..values.rows() {
            for (c, s) in self.scales.iter().enumerate() {
                if mask.get(r, c) {
                    out.set(r, c, s.inverse(values.get(r, c)));
                }
            }
        }
        out
    }
}

/// Min-max normalizes continuous features using observed cells only.
pub fn normalize(ds: &Dataset) -> (Dataset, NormalizationParams) {
    let params = NormalizationParams::fit(ds.raw(), ds.mask(), &ds.kinds());
    for c in params.constant_features() {
        warn!("feature {} is constant; mapped to 0.5", ds.features()[c].name);
    }
    let out = normalize_with(ds, &params).expect("params fitted on this dataset");
    (out, params)
}

/// Applies externally supplied parameters, e.g. those stored with a model.
pub fn normalize_with(ds: &Dataset, params: &NormalizationParams) -> Result<Dataset, DataError> {
    if params.d() != ds.d() {
        return Err(DataError::Usage(format!(
            "normalization covers {} features, dataset has {}",
            params.d(),
            ds.d()
        )));
    }
    if params.scales.iter().zip(ds.features()).any(|(s, f)| s.kind != f.kind) {
        return Err(DataError::Usage("feature kinds differ from normalization parameters".into()));
    }
    let values = params.apply(ds.raw(), ds.mask());
    let truth = ds
        .raw_ground_truth()
        .map(|t| params.apply(t, &Mask::all_observed(t.rows(), t.cols())));
    let mut out = ds.clone();
    out.set_scaled(values, truth, Some(params.clone()));
    Ok(out)
}

/// Maps working-scale values back through `params`.
pub fn denormalize(ds: &Dataset, params: &NormalizationParams) -> Dataset {
    let values = params.invert(ds.values(), ds.mask());
    let truth = ds
        .ground_truth()
        .map(|t| params.invert(t, &Mask::all_observed(t.rows(), t.cols())));
    let mut out = ds.clone();
    out.set_scaled(values, truth, None);
    out
}
