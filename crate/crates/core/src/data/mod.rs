//! Tabular datasets with an explicit observation mask.
//!
//! A [`Dataset`] stores an `n × d` value grid next to an `n × d` mask. A mask
//! entry of `false` marks a missing cell; the stored value there is the
//! sentinel `0.0` and is never meant to be read as data. Values are kept on
//! two scales: `raw` (as read) and `values` (min-max normalized to `[0, 1]`
//! once [`normalize`] has run).

mod csv_io;
mod folds;
mod mcar;
mod normalize;
mod synthetic;

use std::path::PathBuf;

use crate::nn::{Matrix, ShapeError};

pub use csv_io::{load_csv, read_csv, write_csv, write_mask_csv, CsvTable};
pub use folds::{split_folds, Fold};
pub use mcar::{introduce_mcar, introduce_mcar_with, McarMode};
pub use normalize::{denormalize, normalize, normalize_with, FeatureScale, NormalizationParams};
pub use synthetic::synthesize_correlated;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("row {row} has {found} fields, header has {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("binary column {column} has value {value} at row {row}; expected 0 or 1")]
    BinaryValue { column: String, row: usize, value: f64 },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Continuous,
    Binary,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Continuous => "continuous",
            FeatureKind::Binary => "binary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "continuous" | "c" => Some(FeatureKind::Continuous),
            "binary" | "b" => Some(FeatureKind::Binary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Smallest observed raw value (0 when the column has no observed cell).
    pub observed_min: f64,
    pub observed_max: f64,
}

/// Observation mask; `true` = observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn all_observed(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![true; rows * cols],
        }
    }

    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self, ShapeError> {
        if bits.len() != rows * cols {
            return Err(ShapeError::new(format!(
                "mask {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                bits.len()
            )));
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, ShapeError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(ShapeError::new("ragged mask rows"));
            }
            bits.extend(r.iter().map(|&b| b != 0));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            bits,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, observed: bool) {
        self.bits[r * self.cols + c] = observed;
    }

    pub fn row(&self, r: usize) -> &[bool] {
        &self.bits[r * self.cols..(r + 1) * self.cols]
    }

    /// Row as 0/1 reals.
    pub fn row_f64(&self, r: usize) -> Vec<f64> {
        self.row(r).iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
        .expect("same shape")
    }

    pub fn missing_count(&self) -> usize {
        self.bits.iter().filter(|&&b| !b).count()
    }

    pub fn observed_count(&self) -> usize {
        self.bits.len() - self.missing_count()
    }

    pub fn missing_fraction(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.missing_count() as f64 / self.bits.len() as f64
        }
    }

    pub fn is_fully_observed(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Mask {
        let mut bits = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            bits.extend_from_slice(self.row(i));
        }
        Mask {
            rows: indices.len(),
            cols: self.cols,
            bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<FeatureSpec>,
    raw: Matrix,
    values: Matrix,
    mask: Mask,
    raw_truth: Option<Matrix>,
    truth: Option<Matrix>,
    normalization: Option<NormalizationParams>,
}

fn feature_specs(names: Vec<String>, kinds: &[FeatureKind], raw: &Matrix, mask: &Mask) -> Vec<FeatureSpec> {
    names
        .into_iter()
        .zip(kinds)
        .enumerate()
        .map(|(c, (name, &kind))| {
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
            FeatureSpec {
                name,
                kind,
                observed_min: lo,
                observed_max: hi,
            }
        })
        .collect()
}

impl Dataset {
    /// Unnormalized dataset. Missing cells are overwritten with the sentinel 0.
    pub fn new(names: Vec<String>, kinds: Vec<FeatureKind>, mut raw: Matrix, mask: Mask) -> Result<Self, DataError> {
        let (n, d) = raw.shape();
        if names.len() != d || kinds.len() != d {
            return Err(DataError::Usage(format!(
                "{} names and {} kinds for {d} columns",
                names.len(),
                kinds.len()
            )));
        }
        if mask.rows() != n || mask.cols() != d {
            return Err(ShapeError::new("mask shape differs from value grid").into());
        }
        for r in 0..n {
            for c in 0..d {
                if !mask.get(r, c) {
                    raw.set(r, c, 0.0);
                    continue;
                }
                let v = raw.get(r, c);
                if !v.is_finite() {
                    return Err(DataError::Usage(format!("non-finite value at row {r}, column {}", names[c])));
                }
                if kinds[c] == FeatureKind::Binary && v != 0.0 && v != 1.0 {
                    return Err(DataError::BinaryValue {
                        column: names[c].clone(),
                        row: r,
                        value: v,
                    });
                }
            }
        }
        let features = feature_specs(names, &kinds, &raw, &mask);
        Ok(Self {
            features,
            values: raw.clone(),
            raw,
            mask,
            raw_truth: None,
            truth: None,
            normalization: None,
        })
    }

    pub fn fully_observed(names: Vec<String>, kinds: Vec<FeatureKind>, raw: Matrix) -> Result<Self, DataError> {
        let mask = Mask::all_observed(raw.rows(), raw.cols());
        Self::new(names, kinds, raw, mask)
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn d(&self) -> usize {
        self.values.cols()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.features.iter().map(|f| f.kind).collect()
    }

    /// Values on the working (normalized, when normalized) scale.
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    /// Values on the original scale, exactly as read.
    pub fn raw(&self) -> &Matrix {
        &self.raw
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    /// Pre-masking values on the working scale, when missingness was injected.
    pub fn ground_truth(&self) -> Option<&Matrix> {
        self.truth.as_ref()
    }

    pub fn raw_ground_truth(&self) -> Option<&Matrix> {
        self.raw_truth.as_ref()
    }

    pub fn normalization(&self) -> Option<&NormalizationParams> {
        self.normalization.as_ref()
    }

    /// Rows `indices`, keeping normalization and ground truth.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            raw: self.raw.select_rows(indices),
            values: self.values.select_rows(indices),
            mask: self.mask.select_rows(indices),
            raw_truth: self.raw_truth.as_ref().map(|m| m.select_rows(indices)),
            truth: self.truth.as_ref().map(|m| m.select_rows(indices)),
            normalization: self.normalization.clone(),
        }
    }

    /// Drops columns, e.g. a label column before imputation.
    pub fn drop_columns(&self, drop: &[usize]) -> Dataset {
        let keep: Vec<usize> = (0..self.d()).filter(|c| !drop.contains(c)).collect();
        let pick = |m: &Matrix| {
            let rows: Vec<Vec<f64>> = (0..m.rows())
                .map(|r| keep.iter().map(|&c| m.get(r, c)).collect())
                .collect();
            Matrix::new(m.rows(), keep.len(), rows.concat()).expect("sized")
        };
        let bits: Vec<bool> = (0..self.n())
            .flat_map(|r| keep.iter().map(move |&c| (r, c)))
            .map(|(r, c)| self.mask.get(r, c))
            .collect();
        Dataset {
            features: keep.iter().map(|&c| self.features[c].clone()).collect(),
            raw: pick(&self.raw),
            values: pick(&self.values),
            mask: Mask::from_bits(self.n(), keep.len(), bits).expect("sized"),
            raw_truth: self.raw_truth.as_ref().map(pick),
            truth: self.truth.as_ref().map(pick),
            normalization: self.normalization.as_ref().map(|p| p.select(&keep)),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Replaces the mask, storing the current values as ground truth.
    pub(crate) fn with_injected_mask(&self, mask: Mask) -> Dataset {
        let mut out = self.clone();
        out.raw_truth = Some(self.raw.clone());
        out.truth = Some(self.values.clone());
        for r in 0..self.n() {
            for c in 0..self.d() {
                if !mask.get(r, c) {
                    out.raw.set(r, c, 0.0);
                    out.values.set(r, c, 0.0);
                }
            }
        }
        out.mask = mask;
        out
    }

    /// Fully observed copy of this dataset with the given completed grids.
    pub(crate) fn completed(&self, raw: Matrix, values: Matrix) -> Dataset {
        Dataset {
            features: self.features.clone(),
            mask: Mask::all_observed(raw.rows(), raw.cols()),
            raw,
            values,
            raw_truth: self.raw_truth.clone(),
            truth: self.truth.clone(),
            normalization: self.normalization.clone(),
        }
    }

    pub(crate) fn set_scaled(&mut self, values: Matrix, truth: Option<Matrix>, params: Option<NormalizationParams>) {
        self.values = values;
        self.truth = truth;
        self.normalization = params;
    }

    /// Attaches externally known ground truth (working scale and raw scale).
    pub fn with_ground_truth(mut self, truth: &Dataset) -> Result<Dataset, DataError> {
        if truth.values.shape() != self.values.shape() {
            return Err(DataError::Usage("ground truth shape differs from dataset".into()));
        }
        for r in 0..self.n() {
            for c in 0..self.d() {
                if self.mask.get(r, c) && self.raw.get(r, c) != truth.raw.get(r, c) {
                    return Err(DataError::Usage(format!(
                        "ground truth disagrees with observed cell at row {r}, column {}",
                        self.features[c].name
                    )));
                }
            }
        }
        self.raw_truth = Some(truth.raw.clone());
        let scaled = match &self.normalization {
            Some(p) => p.apply(&truth.raw, &Mask::all_observed(self.n(), self.d())),
            None => truth.raw.clone(),
        };
        self.truth = Some(scaled);
        Ok(self)
    }
}
