use super::{Gradients, Mlp};

/// Central finite-difference estimate of dL/dθ for every parameter of `mlp`.
pub fn finite_diff_grad<F>(mut loss_fn: F, mlp: &Mlp, epsilon: f64) -> Gradients
where
    F: FnMut(&Mlp) -> f64,
{
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut probe = mlp.clone();
    let mut grads = Gradients::zeros_like(mlp);
    let shapes: Vec<usize> = mlp.param_slices().iter().map(|s| s.len()).collect();
    for (slot, &len) in shapes.iter().enumerate() {
        for i in 0..len {
            let original = probe.param_slices()[slot][i];
            probe.param_slices_mut()[slot][i] = original + epsilon;
            let plus = loss_fn(&probe);
            probe.param_slices_mut()[slot][i] = original - epsilon;
            let minus = loss_fn(&probe);
            probe.param_slices_mut()[slot][i] = original;
            grads.slices_mut()[slot][i] = (plus - minus) / (2.0 * epsilon);
        }
    }
    grads
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_relative_error: f64,
    /// Flat parameter index of the worst disagreement.
    pub worst_index: Option<usize>,
}

/// Largest relative error `|a − n| / max(|a|, |n|)` over parameters whose
/// analytic gradient exceeds `min_magnitude` in absolute value.
pub fn max_relative_error(analytic: &Gradients, numeric: &Gradients, min_magnitude: f64) -> GradCheckReport {
    let a = analytic.flatten();
    let n = numeric.flatten();
    assert_eq!(a.len(), n.len(), "gradient sets differ in size");
    let mut report = GradCheckReport {
        checked: 0,
        max_relative_error: 0.0,
        worst_index: None,
    };
    for (i, (&ga, &gn)) in a.iter().zip(&n).enumerate() {
        if ga.abs() <= min_magnitude {
            continue;
        }
        report.checked += 1;
        let rel = (ga - gn).abs() / ga.abs().max(gn.abs());
        if rel > report.max_relative_error || report.worst_index.is_none() {
            report.max_relative_error = rel.max(report.max_relative_error);
            report.worst_index = Some(i);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{safe_ln, Activation, DenseLayer, Matrix};
    use crate::rng::RngStream;

    #[test]
    fn constant_loss_has_zero_gradient() {
        let mut rng = RngStream::new(0);
        let net = Mlp::xavier(3, &[2], 1, Activation::Sigmoid, &mut rng);
        assert!(finite_diff_grad(|_| 4.2, &net, 1e-5).is_zero());
    }

    #[test]
    fn square_at_three() {
        let w = Matrix::new(1, 1, vec![3.0]).unwrap();
        let net = Mlp::new(vec![DenseLayer::new(w, vec![0.0], Activation::Identity).unwrap()]).unwrap();
        let g = finite_diff_grad(
            |m| {
                let t = m.layers()[0].weights.get(0, 0);
                t * t
            },
            &net,
            1e-5,
        );
        assert!((g.layers[0].weights.get(0, 0) - 6.0).abs() < 1e-6);
        assert_eq!(g.layers[0].bias[0], 0.0);
    }

    #[test]
    fn cross_entropy_on_sigmoid_unit_matches_backward() {
        let mut rng = RngStream::new(11);
        let net = Mlp::xavier(4, &[], 1, Activation::Sigmoid, &mut rng);
        let x = Matrix::from_rows(&[[0.2, -0.4, 1.0, 0.5], [1.5, 0.1, -0.3, 0.0], [0.0, 0.7, 0.7, -1.0]]).unwrap();
        let y = [1.0, 0.0, 1.0];
        let loss = |m: &Mlp| {
            let p = m.forward(&x).unwrap().into_output();
            (0..3)
                .map(|r| -(y[r] * safe_ln(p.get(r, 0)) + (1.0 - y[r]) * safe_ln(1.0 - p.get(r, 0))))
                .sum::<f64>()
        };
        let trace = net.forward(&x).unwrap();
        let p = trace.output();
        let dl = Matrix::new(
            3,
            1,
            (0..3).map(|r| -(y[r] / p.get(r, 0)) + (1.0 - y[r]) / (1.0 - p.get(r, 0))).collect(),
        )
        .unwrap();
        let analytic = net.backward_params(&trace, &dl).unwrap();
        let numeric = finite_diff_grad(loss, &net, 1e-5);
        let report = max_relative_error(&analytic, &numeric, 1e-8);
        assert_eq!(report.checked, 5);
        assert!(report.max_relative_error < 1e-6, "{report:?}");
    }
}
