use crate::rng::RngStream;

use super::{Matrix, ShapeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Sigmoid),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Logistic function, kept strictly inside (0, 1) for every finite input.
#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    let y = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    y.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Xavier/Glorot uniform weights on `[-√(6/(in+out)), √(6/(in+out))]`.
pub fn xavier_init(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Matrix {
    assert!(in_dim >= 1 && out_dim >= 1, "layer dims must be >= 1");
    let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let data = (0..in_dim * out_dim)
        .map(|_| rng.uniform_range(-limit, limit))
        .collect();
    Matrix::new(in_dim, out_dim, data).expect("sized above")
}

/// `y = activation(x · W + b)` with `W` stored as `in_dim × out_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self, ShapeError> {
        if bias.len() != weights.cols() {
            return Err(ShapeError::new(format!(
                "bias length {} does not match out_dim {}",
                bias.len(),
                weights.cols()
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn xavier(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut RngStream) -> Self {
        Self {
            weights: xavier_init(in_dim, out_dim, rng),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(in_dim, out_dim),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    fn forward(&self, input: &Matrix) -> Result<Matrix, ShapeError> {
        let mut z = input.matmul(&self.weights)?;
        let act = self.activation;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&self.bias) {
                *v = act.apply(*v + b);
            }
        }
        Ok(z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Activations recorded by [`Mlp::forward`]: the input batch followed by
/// every layer's post-activation output.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    activations: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("trace holds at least the input")
    }

    pub fn input(&self) -> &Matrix {
        &self.activations[0]
    }

    pub fn into_output(mut self) -> Matrix {
        self.activations.pop().expect("trace holds at least the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameter gradients, one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            layers: mlp
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Matrix::zeros(l.in_dim(), l.out_dim()),
                    bias: vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    /// Flat slices in canonical order (weights then bias, layer by layer).
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            out.push(l.weights.as_slice());
            out.push(l.bias.as_slice());
        }
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weights.as_mut_slice());
            out.push(l.bias.as_mut_slice());
        }
        out
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&g| g == 0.0))
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|g| *g *= factor);
        }
    }

    fn same_shape(&self, mlp: &Mlp) -> bool {
        self.layers.len() == mlp.layers.len()
            && self.layers.iter().zip(&mlp.layers).all(|(g, l)| {
                g.weights.shape() == l.weights.shape() && g.bias.len() == l.bias.len()
            })
    }
}

/// Result of [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Backprop {
    pub params: Gradients,
    /// Gradient with respect to the network input batch.
    pub input: Matrix,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, ShapeError> {
        if layers.is_empty() {
            return Err(ShapeError::new("an MLP needs at least one layer"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(ShapeError::new(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Xavier-initialized network: `hidden` ReLU layers then one output layer.
    pub fn xavier(
        in_dim: usize,
        hidden: &[usize],
        out_dim: usize,
        output: Activation,
        rng: &mut RngStream,
    ) -> Self {
        let mut dims = vec![in_dim];
        dims.extend_from_slice(hidden);
        dims.push(out_dim);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { output } else { Activation::Relu };
                DenseLayer::xavier(w[0], w[1], act, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.rows() * l.weights.cols() + l.bias.len())
            .sum()
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            out.push(l.weights.as_slice());
            out.push(l.bias.as_slice());
        }
        out
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weights.as_mut_slice());
            out.push(l.bias.as_mut_slice());
        }
        out
    }

    pub fn forward(&self, batch: &Matrix) -> Result<ForwardTrace, ShapeError> {
        if batch.cols() != self.in_dim() {
            return Err(ShapeError::new(format!(
                "batch has {} columns, network expects {}",
                batch.cols(),
                self.in_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.clone());
        for layer in &self.layers {
            let next = layer.forward(activations.last().expect("non-empty"))?;
            activations.push(next);
        }
        Ok(ForwardTrace { activations })
    }

    /// Output only, without keeping intermediate activations.
    pub fn predict(&self, batch: &Matrix) -> Result<Matrix, ShapeError> {
        if batch.cols() != self.in_dim() {
            return Err(ShapeError::new(format!(
                "batch has {} columns, network expects {}",
                batch.cols(),
                self.in_dim()
            )));
        }
        let mut x = self.layers[0].forward(batch)?;
        for layer in &self.layers[1..] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Backpropagates `output_gradient` (dL/d output) through the trace.
    pub fn backward(&self, trace: &ForwardTrace, output_gradient: &Matrix) -> Result<Backprop, ShapeError> {
        let (params, input) = self.backward_impl(trace, output_gradient, true)?;
        Ok(Backprop {
            params,
            input: input.expect("requested"),
        })
    }

    /// Like [`backward`](Self::backward) but skips the input gradient.
    pub fn backward_params(&self, trace: &ForwardTrace, output_gradient: &Matrix) -> Result<Gradients, ShapeError> {
        Ok(self.backward_impl(trace, output_gradient, false)?.0)
    }

    fn check_trace(&self, trace: &ForwardTrace, output_gradient: &Matrix) -> Result<(), ShapeError> {
        let acts = &trace.activations;
        if acts.len() != self.layers.len() + 1 {
            return Err(ShapeError::new("activation record does not belong to this network"));
        }
        let batch = acts[0].rows();
        for (i, layer) in self.layers.iter().enumerate() {
            if acts[i].cols() != layer.in_dim() || acts[i + 1].cols() != layer.out_dim() || acts[i + 1].rows() != batch {
                return Err(ShapeError::new(format!("stale activation record at layer {i}")));
            }
        }
        if output_gradient.shape() != trace.output().shape() {
            return Err(ShapeError::new(format!(
                "output gradient {:?} does not match output {:?}",
                output_gradient.shape(),
                trace.output().shape()
            )));
        }
        Ok(())
    }

    fn backward_impl(
        &self,
        trace: &ForwardTrace,
        output_gradient: &Matrix,
        want_input: bool,
    ) -> Result<(Gradients, Option<Matrix>), ShapeError> {
        self.check_trace(trace, output_gradient)?;
        let acts = &trace.activations;
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = output_gradient.clone();
        let mut input_grad = None;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let out = &acts[i + 1];
            // dL/dz = dL/dy ⊙ act'(z)
            let act = layer.activation;
            for (g, &y) in upstream.as_mut_slice().iter_mut().zip(out.as_slice()) {
                *g *= act.derivative_from_output(y);
            }
            let weights = acts[i].t_matmul(&upstream)?;
            let mut bias = vec![0.0; layer.out_dim()];
            for r in 0..upstream.rows() {
                for (b, g) in bias.iter_mut().zip(upstream.row(r)) {
                    *b += g;
                }
            }
            let next = if i > 0 || want_input {
                Some(upstream.matmul_t(&layer.weights)?)
            } else {
                None
            };
            grads.push(LayerGradient { weights, bias });
            match next {
                Some(n) if i > 0 => upstream = n,
                Some(n) => input_grad = Some(n),
                None => {}
            }
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, input_grad))
    }

    pub(crate) fn check_gradients(&self, grads: &Gradients) -> Result<(), ShapeError> {
        if grads.same_shape(self) {
            Ok(())
        } else {
            Err(ShapeError::new("gradient shapes do not match network parameters"))
        }
    }
}
