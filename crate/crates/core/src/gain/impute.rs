use super::hint::sample_noise;
use super::nets::Generator;
use super::{GainError, GainModel};
use crate::data::{normalize_with, Dataset, FeatureKind};
use crate::nn::Matrix;
use crate::rng::RngStream;

const CHUNK: usize = 512;

fn check_schema(model: &GainModel, ds: &Dataset) -> Result<(), GainError> {
    if ds.d() != model.d() {
        return Err(GainError::Usage(format!(
            "model expects {} features, dataset has {}",
            model.d(),
            ds.d()
        )));
    }
    for (c, f) in ds.features().iter().enumerate() {
        if f.name != model.feature_names[c] || f.kind != model.feature_kinds[c] {
            return Err(GainError::Usage(format!(
                "feature {c} is {} ({}), model expects {} ({})",
                f.name,
                f.kind.as_str(),
                model.feature_names[c],
                model.feature_kinds[c].as_str()
            )));
        }
    }
    Ok(())
}

/// Generator output `x̄` for every row of `values` (working scale), with fresh noise.
pub fn generator_outputs(gen: &Generator, values: &Matrix, mask: &Matrix, noise_high: f64, rng: &mut RngStream) -> Result<Matrix, GainError> {
    let (n, d) = values.shape();
    let mut out = Matrix::zeros(n, d);
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let rows: Vec<usize> = (start..end).collect();
        let x = values.select_rows(&rows);
        let m = mask.select_rows(&rows);
        let mut z = Matrix::zeros(rows.len(), d);
        for r in 0..rows.len() {
            z.row_mut(r).copy_from_slice(&sample_noise(m.row(r), rng, noise_high));
        }
        let x_bar = gen.net.predict(&Generator::input_batch(&x, &m, &z))?;
        for r in 0..rows.len() {
            out.row_mut(start + r).copy_from_slice(x_bar.row(r));
        }
        start = end;
    }
    Ok(out)
}

/// Draws `n_draws` completed datasets.
///
/// `ds` is read on its raw scale and mapped through the model's
/// normalization. Observed cells are copied bit-for-bit from the input;
/// missing cells come from the generator, mapped back to the raw scale, with
/// binary features thresholded at 0.5. Each draw uses fresh noise.
pub fn impute(model: &GainModel, ds: &Dataset, rng: &mut RngStream, n_draws: usize) -> Result<Vec<Dataset>, GainError> {
    if n_draws == 0 {
        return Err(GainError::Usage("n_draws must be at least 1".into()));
    }
    check_schema(model, ds)?;
    let scaled = normalize_with(ds, &model.normalization)?;
    let mask = ds.mask();
    let mask_m = mask.to_matrix();
    let (n, d) = (ds.n(), ds.d());
    let mut draws = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let x_bar = generator_outputs(&model.generator, scaled.values(), &mask_m, model.config.noise_high, rng)?;
        let mut raw = ds.raw().clone();
        let mut values = scaled.values().clone();
        for r in 0..n {
            for c in 0..d {
                if mask.get(r, c) {
                    continue;
                }
                let scale = model.normalization.scales[c];
                let v = match scale.kind {
                    FeatureKind::Binary => {
                        if x_bar.get(r, c) >= 0.5 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    FeatureKind::Continuous => x_bar.get(r, c),
                };
                values.set(r, c, v);
                raw.set(r, c, scale.inverse(v));
            }
        }
        draws.push(scaled.completed(raw, values));
    }
    Ok(draws)
}
