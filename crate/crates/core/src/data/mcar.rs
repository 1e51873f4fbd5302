use super::{DataError, Dataset, Mask};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum McarMode {
    /// Each cell independently missing with probability `rate`.
    #[default]
    Bernoulli,
    /// Exactly `round(rate · cells)` cells missing, chosen uniformly.
    ExactCount,
}

/// Per-cell Bernoulli MCAR over every column.
pub fn introduce_mcar(ds: &Dataset, rate: f64, rng: &mut RngStream) -> Result<Dataset, DataError> {
    introduce_mcar_with(ds, rate, McarMode::Bernoulli, None, rng)
}

/// MCAR masking restricted to `columns` (all columns when `None`).
///
/// The mask is drawn without looking at any value, so missingness is
/// independent of the data. Pre-masking values become the ground truth.
pub fn introduce_mcar_with(
    ds: &Dataset,
    rate: f64,
    mode: McarMode,
    columns: Option<&[usize]>,
    rng: &mut RngStream,
) -> Result<Dataset, DataError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(DataError::Usage(format!("missing rate must be in [0, 1), got {rate}")));
    }
    if !ds.mask().is_fully_observed() {
        return Err(DataError::Usage(
            "MCAR injection needs a fully observed dataset".into(),
        ));
    }
    let all: Vec<usize> = (0..ds.d()).collect();
    let cols = columns.unwrap_or(&all);
    if let Some(&bad) = cols.iter().find(|&&c| c >= ds.d()) {
        return Err(DataError::Usage(format!("column {bad} out of range")));
    }
    let mut mask = Mask::all_observed(ds.n(), ds.d());
    match mode {
        McarMode::Bernoulli => {
            for r in 0..ds.n() {
                for &c in cols {
                    if rng.bernoulli(rate) {
                        mask.set(r, c, false);
                    }
                }
            }
        }
        McarMode::ExactCount => {
            let mut cells: Vec<(usize, usize)> =
                (0..ds.n()).flat_map(|r| cols.iter().map(move |&c| (r, c))).collect();
            let k = (rate * cells.len() as f64).round() as usize;
            rng.shuffle(&mut cells);
            for &(r, c) in &cells[..k] {
                mask.set(r, c, false);
            }
        }
    }
    Ok(ds.with_injected_mask(mask))
}
