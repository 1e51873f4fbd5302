use super::{Gradients, Mlp, ShapeError};

/// Adam moment accumulators, shaped like the parameter slices of an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(mlp: &Mlp) -> Self {
        let zeros: Vec<Vec<f64>> = mlp.param_slices().iter().map(|s| vec![0.0; s.len()]).collect();
        Self {
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update of `mlp` in place.
pub fn adam_step(
    mlp: &mut Mlp,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<(), ShapeError> {
    mlp.check_gradients(grads)?;
    if state.first.len() != grads.layers.len() * 2
        || state.first.iter().zip(grads.slices()).any(|(m, g)| m.len() != g.len())
    {
        return Err(ShapeError::new("Adam state does not match parameter shapes"));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let params = mlp.param_slices_mut();
    for (((p, g), m), v) in params
        .into_iter()
        .zip(grads.slices())
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Sgd,
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// An optimizer bound to one network.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    adam: Option<AdamState>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, mlp: &Mlp) -> Self {
        let adam = matches!(kind, OptimizerKind::Adam { .. }).then(|| AdamState::new(mlp));
        Self { kind, lr, adam }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// Changes the step size for subsequent steps; moment estimates are kept.
    pub fn set_learning_rate(&mut self, lr: f64) {
        self.lr = lr;
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) -> Result<(), ShapeError> {
        match (self.kind, self.adam.as_mut()) {
            (OptimizerKind::Adam { beta1, beta2, eps }, Some(state)) => {
                adam_step(mlp, grads, state, self.lr, beta1, beta2, eps)
            }
            _ => {
                mlp.check_gradients(grads)?;
                for (p, g) in mlp.param_slices_mut().into_iter().zip(grads.slices()) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi -= self.lr * gi;
                    }
                }
                Ok(())
            }
        }
    }
}
