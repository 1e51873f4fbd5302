use super::EvalError;
use crate::data::{Dataset, FeatureKind};

/// Column means (continuous) or majority values (binary) of observed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanImputer {
    /// Fill value per column on the working scale.
    pub fill: Vec<f64>,
    /// Fill value per column on the raw scale.
    pub raw_fill: Vec<f64>,
}

impl MeanImputer {
    pub fn fit(ds: &Dataset) -> Result<Self, EvalError> {
        let mut fill = Vec::with_capacity(ds.d());
        let mut raw_fill = Vec::with_capacity(ds.d());
        for (c, f) in ds.features().iter().enumerate() {
            let (mut s, mut s_raw, mut n) = (0.0, 0.0, 0usize);
            for r in 0..ds.n() {
                if ds.mask().get(r, c) {
                    s += ds.values().get(r, c);
                    s_raw += ds.raw().get(r, c);
                    n += 1;
                }
            }
            if n == 0 {
                return Err(EvalError::Usage(format!("feature {} has no observed cell", f.name)));
            }
            let (v, v_raw) = match f.kind {
                FeatureKind::Continuous => (s / n as f64, s_raw / n as f64),
                FeatureKind::Binary => {
                    // Majority; ties go to 1.
                    let v = if 2.0 * s >= n as f64 { 1.0 } else { 0.0 };
                    (v, v)
                }
            };
            fill.push(v);
            raw_fill.push(v_raw);
        }
        Ok(Self { fill, raw_fill })
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset, EvalError> {
        if ds.d() != self.fill.len() {
            return Err(EvalError::Usage("mean imputer fitted on a different schema".into()));
        }
        let mut values = ds.values().clone();
        let mut raw = ds.raw().clone();
        for r in 0..ds.n() {
            for c in 0..ds.d() {
                if !ds.mask().get(r, c) {
                    values.set(r, c, self.fill[c]);
                    raw.set(r, c, self.raw_fill[c]);
                }
            }
        }
        Ok(ds.completed(raw, values))
    }
}

/// Fills missing cells with the column's own observed mean (or majority).
pub fn mean_impute(ds: &Dataset) -> Result<Dataset, EvalError> {
    MeanImputer::fit(ds)?.transform(ds)
}
