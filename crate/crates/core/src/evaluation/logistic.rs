use super::EvalError;
use crate::nn::{safe_ln, Activation, DenseLayer, Matrix, Mlp, Optimizer, OptimizerKind};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Stop once the training loss changes by less than this between iterations.
    pub tolerance: f64,
    /// L2 penalty `ridge/2 · ‖w‖²` on the weights (not the intercept).
    pub ridge: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_iterations: 3000,
            tolerance: 1e-7,
            ridge: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub final_loss: f64,
}

impl LogisticModel {
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>, EvalError> {
        if features.cols() != self.weights.len() {
            return Err(EvalError::Usage("feature count differs from fitted model".into()));
        }
        let net = self.as_mlp();
        Ok(net.predict(features)?.into_vec())
    }

    fn as_mlp(&self) -> Mlp {
        let w = Matrix::new(self.weights.len(), 1, self.weights.clone()).expect("sized");
        Mlp::new(vec![DenseLayer::new(w, vec![self.intercept], Activation::Sigmoid).expect("sized")])
            .expect("single layer")
    }
}

/// Fits a single sigmoid unit by full-batch Adam on mean cross-entropy,
/// starting from zero weights.
pub fn train_logistic(features: &Matrix, labels: &[f64], config: &LogisticConfig) -> Result<LogisticModel, EvalError> {
    let (n, d) = features.shape();
    if labels.len() != n {
        return Err(EvalError::Usage("one label per row required".into()));
    }
    if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(EvalError::Usage("labels must be 0 or 1".into()));
    }
    let positives = labels.iter().filter(|&&y| y == 1.0).count();
    if positives == 0 || positives == n {
        return Err(EvalError::Usage("labels contain a single class".into()));
    }
    if n < d {
        return Err(EvalError::Usage(format!("{n} rows for {d} features")));
    }
    let mut net = Mlp::new(vec![DenseLayer::zeros(d, 1, Activation::Sigmoid)])?;
    let mut opt = Optimizer::new(OptimizerKind::default(), config.learning_rate, &net);
    let scale = 1.0 / n as f64;
    let mut prev = f64::INFINITY;
    let mut loss = prev;
    let mut iterations = 0;
    for it in 0..config.max_iterations {
        let trace = net.forward(features)?;
        let p = trace.output();
        let mut grad = Matrix::zeros(n, 1);
        loss = 0.0;
        for r in 0..n {
            let (y, pr) = (labels[r], p.get(r, 0));
            loss -= scale * (y * safe_ln(pr) + (1.0 - y) * safe_ln(1.0 - pr));
            // d(CE)/dp; the sigmoid derivative is applied in backward.
            let pc = crate::nn::clamp_prob(pr);
            grad.set(r, 0, scale * (-y / pc + (1.0 - y) / (1.0 - pc)));
        }
        let mut grads = net.backward_params(&trace, &grad)?;
        if config.ridge > 0.0 {
            let w = net.layers()[0].weights.as_slice();
            loss += 0.5 * config.ridge * w.iter().map(|v| v * v).sum::<f64>();
            for (g, &wi) in grads.layers[0].weights.as_mut_slice().iter_mut().zip(w) {
                *g += config.ridge * wi;
            }
        }
        iterations = it + 1;
        if (prev - loss).abs() < config.tolerance {
            break;
        }
        prev = loss;
        opt.step(&mut net, &grads)?;
    }
    let layer = &net.layers()[0];
    Ok(LogisticModel {
        weights: layer.weights.as_slice().to_vec(),
        intercept: layer.bias[0],
        iterations,
        final_loss: loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::auroc;
    use crate::rng::RngStream;

    #[test]
    fn separable_data_ranks_perfectly() {
        let x = Matrix::new(6, 1, vec![0.1, 0.2, 0.3, 0.7, 0.8, 0.9]).unwrap();
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let m = train_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        assert_eq!(auroc(&m.predict(&x).unwrap(), &y).unwrap(), 1.0);
        assert!(m.weights[0] > 0.0);
    }

    #[test]
    fn independent_labels_give_chance_auroc() {
        let mut rng = RngStream::new(17);
        let n = 4000;
        let x = Matrix::new(n, 3, (0..3 * n).map(|_| rng.uniform()).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|_| if rng.bernoulli(0.5) { 1.0 } else { 0.0 }).collect();
        let m = train_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        // Fresh data from the same null distribution.
        let xt = Matrix::new(n, 3, (0..3 * n).map(|_| rng.uniform()).collect()).unwrap();
        let yt: Vec<f64> = (0..n).map(|_| if rng.bernoulli(0.5) { 1.0 } else { 0.0 }).collect();
        let a = auroc(&m.predict(&xt).unwrap(), &yt).unwrap();
        assert!((a - 0.5).abs() < 0.05, "{a}");
    }

    #[test]
    fn deterministic_and_invariant_to_duplication() {
        let x = Matrix::new(5, 2, vec![0.1, 0.5, 0.4, 0.2, 0.9, 0.8, 0.3, 0.3, 0.7, 0.1]).unwrap();
        let y = [0.0, 0.0, 1.0, 0.0, 1.0];
        let cfg = LogisticConfig::default();
        let a = train_logistic(&x, &y, &cfg).unwrap();
        let b = train_logistic(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        // Duplicating every row leaves the mean loss, and so the fit, unchanged up to rounding.
        let idx: Vec<usize> = (0..5).chain(0..5).collect();
        let y2: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let c = train_logistic(&x.select_rows(&idx), &y2, &cfg).unwrap();
        for (u, v) in a.weights.iter().zip(&c.weights) {
            assert!((u - v).abs() < 1e-6 * (1.0 + u.abs()), "{u} vs {v}");
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::new(3, 1, vec![0.1, 0.2, 0.3]).unwrap();
        assert!(train_logistic(&x, &[1.0, 1.0, 1.0], &LogisticConfig::default()).is_err());
    }
}
