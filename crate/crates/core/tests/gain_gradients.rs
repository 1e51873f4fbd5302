//! Training-loop gradients against central differences of the composite
//! losses, rebuilt from the public forward pieces.

use gain::data::FeatureKind;
use gain::gain::{
    complete_batch, discriminator_gradients, generator_gradients, loss_d, loss_g_adv, loss_m, Batch, Discriminator,
    Generator, TrainStreams,
};
use gain::nn::{finite_diff_grad, max_relative_error, Matrix, Mlp};
use gain::RngStream;

const D: usize = 3;

/// Random biases keep hidden pre-activations away from the ReLU kink, which
/// zero biases hit whenever a whole layer is inactive for a row.
fn jitter_biases(net: &mut Mlp, rng: &mut RngStream) {
    for layer in net.layers_mut() {
        layer.bias.iter_mut().for_each(|b| *b = rng.uniform_range(-0.5, 0.5));
    }
}

fn fixture(seed: u64, use_hint: bool) -> (Generator, Discriminator, Batch, Vec<FeatureKind>) {
    let root = RngStream::new(seed);
    let mut gen = Generator::new(D, &[5, 4], &mut root.derive("g"));
    let mut disc = Discriminator::new(D, &[4, 5], &mut root.derive("d"));
    jitter_biases(&mut gen.net, &mut root.derive("bias"));
    jitter_biases(&mut disc.net, &mut root.derive("bias"));
    let mut rng = root.derive("data");
    let n = 6;
    let mut values = Matrix::zeros(n, D);
    let mut mask = Matrix::zeros(n, D);
    for r in 0..n {
        for c in 0..D {
            let observed = rng.bernoulli(0.6);
            mask.set(r, c, f64::from(u8::from(observed)));
            if observed {
                let v = if c == 2 { f64::from(u8::from(rng.bernoulli(0.5))) } else { rng.uniform() };
                values.set(r, c, v);
            }
        }
    }
    let mut streams = TrainStreams::new(seed);
    let batch = Batch::draw(&values, &mask, 8, 0.3, use_hint, &mut streams);
    let kinds = vec![FeatureKind::Continuous, FeatureKind::Continuous, FeatureKind::Binary];
    (gen, disc, batch, kinds)
}

fn g_objective(net: &Mlp, disc: &Discriminator, batch: &Batch, kinds: &[FeatureKind], adv: f64, recon: f64) -> f64 {
    let x_bar = net
        .predict(&Generator::input_batch(&batch.values, &batch.mask, &batch.noise))
        .unwrap();
    let x_hat = complete_batch(&batch.values, &batch.mask, &x_bar);
    let m_hat = disc.discriminate(&x_hat, &batch.hints).unwrap();
    let n = batch.len() as f64;
    (0..batch.len())
        .map(|r| {
            let m = batch.mask.row(r);
            adv * loss_g_adv(m, m_hat.row(r), batch.b.row(r)) + recon * loss_m(batch.values.row(r), x_bar.row(r), m, kinds)
        })
        .sum::<f64>()
        / n
}

fn d_objective(gen: &Generator, net: &Mlp, batch: &Batch) -> f64 {
    let x_bar = gen
        .net
        .predict(&Generator::input_batch(&batch.values, &batch.mask, &batch.noise))
        .unwrap();
    let x_hat = complete_batch(&batch.values, &batch.mask, &x_bar);
    let input = Discriminator::input_batch(&x_hat, &batch.hints);
    let m_hat = net.predict(&input).unwrap();
    (0..batch.len())
        .map(|r| loss_d(batch.mask.row(r), m_hat.row(r), batch.b.row(r)))
        .sum::<f64>()
        / batch.len() as f64
}

#[test]
fn generator_gradient_matches_finite_differences() {
    for seed in 0..6 {
        for (adv, recon) in [(1.0, 10.0), (1.0, 0.0), (0.0, 2.5)] {
            let (gen, disc, batch, kinds) = fixture(seed, seed % 2 == 0);
            let (_, _, analytic) = generator_gradients(&gen, &disc, &batch, &kinds, adv, recon).unwrap();
            let numeric = finite_diff_grad(|net| g_objective(net, &disc, &batch, &kinds, adv, recon), &gen.net, 1e-5);
            let report = max_relative_error(&analytic, &numeric, 1e-8);
            assert!(report.checked > 0);
            assert!(
                report.max_relative_error < 1e-4,
                "seed {seed}, weights ({adv}, {recon}): {report:?}"
            );
        }
    }
}

#[test]
fn discriminator_gradient_matches_finite_differences() {
    for seed in 0..6 {
        let (gen, disc, batch, _) = fixture(seed, true);
        let (loss, analytic) = discriminator_gradients(&gen, &disc, &batch).unwrap();
        assert!((loss - d_objective(&gen, &disc.net, &batch)).abs() < 1e-12);
        let numeric = finite_diff_grad(|net| d_objective(&gen, net, &batch), &disc.net, 1e-5);
        let report = max_relative_error(&analytic, &numeric, 1e-8);
        assert!(report.max_relative_error < 1e-4, "seed {seed}: {report:?}");
    }
}

#[test]
fn no_adversarial_no_reconstruction_gives_zero_gradient() {
    let (gen, disc, batch, kinds) = fixture(3, true);
    let (_, _, g) = generator_gradients(&gen, &disc, &batch, &kinds, 0.0, 0.0).unwrap();
    assert!(g.is_zero());
}

#[test]
fn corrupted_gradient_is_caught() {
    let (gen, disc, batch, kinds) = fixture(1, true);
    let (_, _, mut analytic) = generator_gradients(&gen, &disc, &batch, &kinds, 1.0, 10.0).unwrap();
    let numeric = finite_diff_grad(|net| g_objective(net, &disc, &batch, &kinds, 1.0, 10.0), &gen.net, 1e-5);
    analytic.scale(1.01);
    assert!(max_relative_error(&analytic, &numeric, 1e-8).max_relative_error > 1e-3);
}
