use super::{bayes_oracle, compare_with_oracle, reference_toy, train_discriminator_on_toy, EvalError, OracleTrainConfig};
use crate::data::FeatureKind;
use crate::gain::{
    complete_batch, discriminator_gradients, generator_gradients, loss_d, loss_g_adv, loss_m, Batch, Discriminator,
    Generator, TrainStreams,
};
use crate::nn::{finite_diff_grad, max_relative_error, safe_ln, Activation, Gradients, Matrix, Mlp};
use crate::rng::RngStream;

/// Outcome of one diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckSettings {
    pub networks: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    /// Parameters whose analytic gradient is at most this large are skipped.
    pub min_magnitude: f64,
    pub seed: u64,
    /// Test hook: multiplies every analytic gradient by this factor before
    /// comparison, which a working check must reject.
    pub corrupt: Option<f64>,
}

impl Default for GradcheckSettings {
    fn default() -> Self {
        Self {
            networks: 50,
            epsilon: 1e-5,
            tolerance: 1e-4,
            min_magnitude: 1e-8,
            seed: 0,
            corrupt: None,
        }
    }
}

fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.normal()).collect()).expect("sized")
}

/// A random MLP with 1 to 3 layers of at most 16 units and nonzero biases.
fn random_mlp(rng: &mut RngStream) -> Mlp {
    let layers = 1 + rng.index(3);
    let input = 1 + rng.index(16);
    let hidden: Vec<usize> = (1..layers).map(|_| 1 + rng.index(16)).collect();
    let output = 1 + rng.index(16);
    let out_act = if rng.bernoulli(0.5) {
        Activation::Sigmoid
    } else {
        Activation::Identity
    };
    let mut net = Mlp::xavier(input, &hidden, output, out_act, rng);
    let count = net.layers().len();
    for (i, layer) in net.layers_mut().iter_mut().enumerate() {
        if i + 1 < count && rng.bernoulli(0.3) {
            layer.activation = Activation::Sigmoid;
        }
        layer.bias.iter_mut().for_each(|b| *b = rng.uniform_range(-0.5, 0.5));
    }
    net
}

/// Squared error for identity outputs, cross-entropy for sigmoid outputs,
/// summed over the batch. Returns the loss and its output gradient.
fn probe_loss(out: &Matrix, target: &Matrix, act: Activation) -> (f64, Matrix) {
    let mut grad = Matrix::zeros(out.rows(), out.cols());
    let mut loss = 0.0;
    for r in 0..out.rows() {
        for c in 0..out.cols() {
            let (y, t) = (out.get(r, c), target.get(r, c));
            if act == Activation::Sigmoid {
                loss -= t * safe_ln(y) + (1.0 - t) * safe_ln(1.0 - y);
                grad.set(r, c, -t / y + (1.0 - t) / (1.0 - y));
            } else {
                loss += (y - t).powi(2);
                grad.set(r, c, 2.0 * (y - t));
            }
        }
    }
    (loss, grad)
}

fn compare(
    name: String,
    mut analytic: Gradients,
    numeric: &Gradients,
    settings: &GradcheckSettings,
) -> CheckResult {
    if let Some(f) = settings.corrupt {
        analytic.scale(f);
    }
    let report = max_relative_error(&analytic, numeric, settings.min_magnitude);
    CheckResult {
        name,
        passed: report.max_relative_error < settings.tolerance,
        detail: format!(
            "{} parameters, max relative error {:.3e}",
            report.checked, report.max_relative_error
        ),
    }
}

/// Backpropagation on random small networks and batches against central
/// differences.
pub fn mlp_gradcheck(settings: &GradcheckSettings) -> Vec<CheckResult> {
    let root = RngStream::new(settings.seed).derive("gradcheck");
    (0..settings.networks)
        .map(|i| {
            let mut rng = root.derive_index("mlp", i as u64);
            let net = random_mlp(&mut rng);
            let rows = 1 + rng.index(8);
            let x = random_matrix(rows, net.in_dim(), &mut rng);
            let act = net.layers().last().expect("non-empty").activation;
            let target = Matrix::new(
                rows,
                net.out_dim(),
                (0..rows * net.out_dim()).map(|_| rng.uniform()).collect(),
            )
            .expect("sized");
            let trace = net.forward(&x).expect("input sized to net");
            let (_, grad_out) = probe_loss(trace.output(), &target, act);
            let analytic = net.backward_params(&trace, &grad_out).expect("trace from this net");
            let numeric = finite_diff_grad(
                |m| probe_loss(&m.predict(&x).expect("sized"), &target, act).0,
                &net,
                settings.epsilon,
            );
            let dims: Vec<String> = std::iter::once(net.in_dim())
                .chain(net.layers().iter().map(|l| l.out_dim()))
                .map(|d| d.to_string())
                .collect();
            compare(format!("mlp {i} ({}, batch {rows})", dims.join("-")), analytic, &numeric, settings)
        })
        .collect()
}

fn gain_fixture(seed: u64) -> (Generator, Discriminator, Batch, Vec<FeatureKind>) {
    let root = RngStream::new(seed).derive("gain-gradcheck");
    let d = 3;
    let mut gen = Generator::new(d, &[6, 5], &mut root.derive("generator"));
    let mut disc = Discriminator::new(d, &[5, 6], &mut root.derive("discriminator"));
    let mut bias_rng = root.derive("bias");
    for net in [&mut gen.net, &mut disc.net] {
        for layer in net.layers_mut() {
            layer.bias.iter_mut().for_each(|b| *b = bias_rng.uniform_range(-0.5, 0.5));
        }
    }
    let mut rng = root.derive("data");
    let n = 8;
    let mut values = Matrix::zeros(n, d);
    let mut mask = Matrix::zeros(n, d);
    for r in 0..n {
        for c in 0..d {
            if rng.bernoulli(0.6) {
                mask.set(r, c, 1.0);
                let v = if c == d - 1 { f64::from(u8::from(rng.bernoulli(0.5))) } else { rng.uniform() };
                values.set(r, c, v);
            }
        }
    }
    let mut streams = TrainStreams::new(seed);
    let batch = Batch::draw(&values, &mask, n, 0.5, true, &mut streams);
    let kinds = vec![FeatureKind::Continuous, FeatureKind::Continuous, FeatureKind::Binary];
    (gen, disc, batch, kinds)
}

/// The discriminator and generator objectives of the training loop, each
/// differentiated through the whole pipeline and checked numerically.
pub fn gain_gradcheck(settings: &GradcheckSettings) -> Vec<CheckResult> {
    let (gen, disc, batch, kinds) = gain_fixture(settings.seed);
    let n = batch.len() as f64;
    let completed = |g: &Mlp| {
        let x_bar = g
            .predict(&Generator::input_batch(&batch.values, &batch.mask, &batch.noise))
            .expect("sized");
        let x_hat = complete_batch(&batch.values, &batch.mask, &x_bar);
        (x_bar, x_hat)
    };
    let mut results = Vec::new();

    let d_loss = |net: &Mlp| {
        let (_, x_hat) = completed(&gen.net);
        let m_hat = net.predict(&Discriminator::input_batch(&x_hat, &batch.hints)).expect("sized");
        (0..batch.len())
            .map(|r| loss_d(batch.mask.row(r), m_hat.row(r), batch.b.row(r)))
            .sum::<f64>()
            / n
    };
    match discriminator_gradients(&gen, &disc, &batch) {
        Ok((_, analytic)) => {
            let numeric = finite_diff_grad(d_loss, &disc.net, settings.epsilon);
            results.push(compare("discriminator loss".into(), analytic, &numeric, settings));
        }
        Err(e) => results.push(CheckResult {
            name: "discriminator loss".into(),
            passed: false,
            detail: e.to_string(),
        }),
    }

    let alpha = 10.0;
    let g_loss = |net: &Mlp| {
        let (x_bar, x_hat) = completed(net);
        let m_hat = disc.discriminate(&x_hat, &batch.hints).expect("sized");
        (0..batch.len())
            .map(|r| {
                let m = batch.mask.row(r);
                loss_g_adv(m, m_hat.row(r), batch.b.row(r)) + alpha * loss_m(batch.values.row(r), x_bar.row(r), m, &kinds)
            })
            .sum::<f64>()
            / n
    };
    match generator_gradients(&gen, &disc, &batch, &kinds, 1.0, alpha) {
        Ok((_, _, analytic)) => {
            let numeric = finite_diff_grad(g_loss, &gen.net, settings.epsilon);
            results.push(compare("generator loss".into(), analytic, &numeric, settings));
        }
        Err(e) => results.push(CheckResult {
            name: "generator loss".into(),
            passed: false,
            detail: e.to_string(),
        }),
    }
    results
}

/// Exact endpoint conditions of the enumerated table and the distance of a
/// trained discriminator from it.
pub fn oracle_checks(config: &OracleTrainConfig, tolerance: f64) -> Result<Vec<CheckResult>, EvalError> {
    let toy = reference_toy();
    let table = bayes_oracle(&toy);
    let violations = table.endpoint_violations();
    let in_range = table
        .entries
        .iter()
        .all(|e| e.posterior.iter().all(|p| (0.0..=1.0).contains(p)));
    let disc = train_discriminator_on_toy(&toy, config)?;
    let cmp = compare_with_oracle(&disc, &table)?;
    Ok(vec![
        CheckResult {
            name: "oracle endpoints".into(),
            passed: violations == 0 && in_range,
            detail: format!("{} cells, {violations} endpoint violations", table.entries.len()),
        },
        CheckResult {
            name: "trained discriminator vs oracle".into(),
            passed: cmp.mean_abs_error < tolerance,
            detail: format!(
                "mean abs error {:.4} (max {:.4}) over {} hidden components, tolerance {tolerance}",
                cmp.mean_abs_error, cmp.max_abs_error, cmp.compared
            ),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_corruption_fails() {
        let settings = GradcheckSettings {
            networks: 5,
            ..GradcheckSettings::default()
        };
        for r in mlp_gradcheck(&settings).iter().chain(&gain_gradcheck(&settings)) {
            assert!(r.passed, "{}", r.line());
        }
        let corrupted = GradcheckSettings {
            corrupt: Some(1.01),
            ..settings
        };
        assert!(mlp_gradcheck(&corrupted).iter().all(|r| !r.passed));
        assert!(gain_gradcheck(&corrupted).iter().all(|r| !r.passed));
    }
}
