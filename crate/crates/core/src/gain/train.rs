use log::info;

use super::hint::{sample_hint, sample_noise};
use super::losses::{loss_d, loss_d_grad, loss_g_adv, loss_g_adv_grad, loss_m, loss_m_grad};
use super::nets::{complete_batch, Discriminator, Generator};
use super::{GainError, TrainConfig};
use crate::data::{Dataset, FeatureKind, NormalizationParams};
use crate::nn::{Gradients, Matrix, Optimizer};
use crate::rng::RngStream;

/// Mean per-row losses of one training iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub d_loss: f64,
    pub g_adv_loss: f64,
    /// Unweighted reconstruction loss (before multiplying by alpha).
    pub g_recon_loss: f64,
}

/// Everything a training iteration draws for one mini-batch.
#[derive(Debug, Clone)]
pub struct Batch {
    /// Working-scale values, sentinel 0 where missing.
    pub values: Matrix,
    pub mask: Matrix,
    /// `(1 − m) ⊙ z`.
    pub noise: Matrix,
    pub b: Matrix,
    pub hints: Matrix,
}

/// Random streams used by the training loop, all derived from one seed.
#[derive(Debug, Clone)]
pub struct TrainStreams {
    pub batch: RngStream,
    pub noise: RngStream,
    pub hint: RngStream,
}

impl TrainStreams {
    pub fn new(seed: u64) -> Self {
        let root = RngStream::new(seed);
        Self {
            batch: root.derive("batch"),
            noise: root.derive("noise"),
            hint: root.derive("hint"),
        }
    }
}

impl Batch {
    /// Samples `size` rows uniformly with replacement, with fresh noise and hints.
    /// When `use_hint` is false every hint entry is 0.5; `b` is drawn either way.
    pub fn draw(
        values: &Matrix,
        mask: &Matrix,
        size: usize,
        noise_high: f64,
        use_hint: bool,
        streams: &mut TrainStreams,
    ) -> Batch {
        let d = values.cols();
        let rows: Vec<usize> = (0..size).map(|_| streams.batch.index(values.rows())).collect();
        let values = values.select_rows(&rows);
        let mask = mask.select_rows(&rows);
        let mut noise = Matrix::zeros(size, d);
        let mut b = Matrix::zeros(size, d);
        let mut hints = Matrix::zeros(size, d);
        for r in 0..size {
            let m = mask.row(r);
            noise.row_mut(r).copy_from_slice(&sample_noise(m, &mut streams.noise, noise_high));
            let draw = sample_hint(m, &mut streams.hint);
            b.row_mut(r).copy_from_slice(&draw.b);
            if use_hint {
                hints.row_mut(r).copy_from_slice(&draw.h);
            } else {
                hints.row_mut(r).iter_mut().for_each(|h| *h = 0.5);
            }
        }
        Batch {
            values,
            mask,
            noise,
            b,
            hints,
        }
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mean discriminator loss over the batch and its parameter gradient.
/// The generator is held fixed.
pub fn discriminator_gradients(
    gen: &Generator,
    disc: &Discriminator,
    batch: &Batch,
) -> Result<(f64, Gradients), GainError> {
    let x_bar = gen
        .net
        .predict(&Generator::input_batch(&batch.values, &batch.mask, &batch.noise))?;
    let x_hat = complete_batch(&batch.values, &batch.mask, &x_bar);
    discriminator_gradients_on(disc, &x_hat, &batch.hints, &batch.mask, &batch.b)
}

/// Discriminator loss and gradient for already completed rows.
pub fn discriminator_gradients_on(
    disc: &Discriminator,
    completed: &Matrix,
    hints: &Matrix,
    mask: &Matrix,
    b: &Matrix,
) -> Result<(f64, Gradients), GainError> {
    let trace = disc.net.forward(&Discriminator::input_batch(completed, hints))?;
    let m_hat = trace.output();
    let n = completed.rows();
    let scale = 1.0 / n as f64;
    let mut grad = Matrix::zeros(n, disc.d());
    let mut loss = 0.0;
    for r in 0..n {
        loss += loss_d(mask.row(r), m_hat.row(r), b.row(r));
        loss_d_grad(mask.row(r), m_hat.row(r), b.row(r), scale, grad.row_mut(r));
    }
    let grads = disc.net.backward_params(&trace, &grad)?;
    Ok((loss * scale, grads))
}

/// Generator objective `adv_weight · L_G + recon_weight · L_M`, averaged over
/// the batch, with its gradient. The discriminator is held fixed.
///
/// Returns `(mean L_G, mean L_M, gradients)`; the losses are unweighted.
pub fn generator_gradients(
    gen: &Generator,
    disc: &Discriminator,
    batch: &Batch,
    kinds: &[FeatureKind],
    adv_weight: f64,
    recon_weight: f64,
) -> Result<(f64, f64, Gradients), GainError> {
    let n = batch.len();
    let d = gen.d();
    let scale = 1.0 / n as f64;
    let g_trace = gen
        .net
        .forward(&Generator::input_batch(&batch.values, &batch.mask, &batch.noise))?;
    let x_bar = g_trace.output();
    let x_hat = complete_batch(&batch.values, &batch.mask, x_bar);
    let d_trace = disc.net.forward(&Discriminator::input_batch(&x_hat, &batch.hints))?;
    let m_hat = d_trace.output();

    let mut adv = 0.0;
    let mut recon = 0.0;
    let mut grad_mhat = Matrix::zeros(n, d);
    let mut grad_xbar = Matrix::zeros(n, d);
    for r in 0..n {
        let (m, b) = (batch.mask.row(r), batch.b.row(r));
        adv += loss_g_adv(m, m_hat.row(r), b);
        recon += loss_m(batch.values.row(r), x_bar.row(r), m, kinds);
        if adv_weight != 0.0 {
            loss_g_adv_grad(m, m_hat.row(r), b, adv_weight * scale, grad_mhat.row_mut(r));
        }
        if recon_weight != 0.0 {
            loss_m_grad(batch.values.row(r), x_bar.row(r), m, kinds, recon_weight * scale, grad_xbar.row_mut(r));
        }
    }
    if adv_weight != 0.0 {
        let back = disc.net.backward(&d_trace, &grad_mhat)?;
        // Only the first d discriminator inputs depend on the generator,
        // and only through missing slots of x̂.
        for r in 0..n {
            let m = batch.mask.row(r);
            let gin = &back.input.row(r)[..d];
            for (i, g) in grad_xbar.row_mut(r).iter_mut().enumerate() {
                *g += (1.0 - m[i]) * gin[i];
            }
        }
    }
    let grads = gen.net.backward_params(&g_trace, &grad_xbar)?;
    Ok((adv * scale, recon * scale, grads))
}

/// A trained imputer together with what it needs to impute new data.
#[derive(Debug, Clone, PartialEq)]
pub struct GainModel {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub config: TrainConfig,
    pub normalization: NormalizationParams,
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    pub history: Vec<LossRecord>,
}

impl GainModel {
    pub fn d(&self) -> usize {
        self.feature_kinds.len()
    }
}

fn check_finite(iteration: usize, rec: &LossRecord) -> Result<(), GainError> {
    for (name, value) in [
        ("d_loss", rec.d_loss),
        ("g_adv_loss", rec.g_adv_loss),
        ("g_recon_loss", rec.g_recon_loss),
    ] {
        if !value.is_finite() {
            return Err(GainError::Divergence {
                iteration,
                loss: name,
                value,
            });
        }
    }
    Ok(())
}

/// Adversarial training: each iteration takes one discriminator step on a
/// fresh mini-batch, then one generator step on another.
///
/// `ds.values()` must already be on the working `[0, 1]` scale; the
/// dataset's normalization parameters (identity when absent) are stored
/// with the model.
pub fn train(ds: &Dataset, config: &TrainConfig) -> Result<GainModel, GainError> {
    config.validate()?;
    let d = ds.d();
    if d < 2 {
        return Err(GainError::Usage(format!("training needs at least 2 features, got {d}")));
    }
    let missing = ds.mask().missing_count();
    if missing == 0 || ds.mask().observed_count() == 0 {
        return Err(GainError::Usage(
            "training needs at least one missing and one observed cell".into(),
        ));
    }
    let kinds = ds.kinds();
    let hidden = config.hidden_for(d);
    let root = RngStream::new(config.seed);
    let init = root.derive("init");
    let mut gen = Generator::new(d, &hidden, &mut init.derive("generator"));
    let mut disc = Discriminator::new(d, &hidden, &mut init.derive("discriminator"));
    let mut opt_g = Optimizer::new(config.optimizer, config.learning_rate, &gen.net);
    let mut opt_d = Optimizer::new(config.optimizer, config.learning_rate, &disc.net);
    let mut streams = TrainStreams::new(config.seed);

    let values = ds.values();
    let mask = ds.mask().to_matrix();
    let k_d = config.batch_d.min(ds.n());
    let k_g = config.batch_g.min(ds.n());
    let variant = config.variant;
    let adv_weight = if variant.uses_adversarial() { 1.0 } else { 0.0 };
    let recon_weight = if variant.uses_reconstruction() { config.alpha } else { 0.0 };

    let mut history = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        let batch = Batch::draw(values, &mask, k_d, config.noise_high, variant.uses_hint(), &mut streams);
        let (d_loss, d_grads) = discriminator_gradients(&gen, &disc, &batch)?;
        opt_d.step(&mut disc.net, &d_grads)?;

        let batch = Batch::draw(values, &mask, k_g, config.noise_high, variant.uses_hint(), &mut streams);
        let (g_adv_loss, g_recon_loss, g_grads) =
            generator_gradients(&gen, &disc, &batch, &kinds, adv_weight, recon_weight)?;
        opt_g.step(&mut gen.net, &g_grads)?;

        let rec = LossRecord {
            d_loss,
            g_adv_loss,
            g_recon_loss,
        };
        check_finite(it, &rec)?;
        history.push(rec);
        if config.log_every > 0 && (it + 1) % config.log_every == 0 {
            info!(
                "iteration {}/{}: d_loss={:.5} g_adv={:.5} g_recon={:.6}",
                it + 1,
                config.iterations,
                d_loss,
                g_adv_loss,
                g_recon_loss
            );
        }
    }

    Ok(GainModel {
        generator: gen,
        discriminator: disc,
        config: config.clone(),
        normalization: ds
            .normalization()
            .cloned()
            .unwrap_or_else(|| NormalizationParams::identity(&kinds)),
        feature_names: ds.names(),
        feature_kinds: kinds,
        history,
    })
}
