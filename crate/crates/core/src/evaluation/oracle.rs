use std::collections::BTreeMap;

use super::EvalError;
use crate::gain::{discriminator_gradients_on, sample_hint, Discriminator};
use crate::nn::{Matrix, Optimizer, OptimizerKind};
use crate::rng::RngStream;

/// Largest toy dimension the oracle enumerates.
pub const MAX_TOY_D: usize = 3;

const NORMALIZATION_TOL: f64 = 1e-9;

/// Component `i` of the bit pattern `bits`.
fn bit(bits: usize, i: usize) -> u8 {
    ((bits >> i) & 1) as u8
}

fn to_bits(v: &[u8]) -> usize {
    v.iter().enumerate().map(|(i, &b)| usize::from(b) << i).sum()
}

fn from_bits(bits: usize, d: usize) -> Vec<u8> {
    (0..d).map(|i| bit(bits, i)).collect()
}

fn check_distribution(name: &str, probs: &[f64]) -> Result<(), EvalError> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(EvalError::Usage(format!("{name}: probabilities must be finite and non-negative")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(EvalError::Usage(format!("{name}: probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// A fixed stochastic generator over binary vectors: for every mask and
/// observed part, a distribution over the full output vector x̄.
///
/// Patterns are bit-encoded with component `i` in bit `i`; a mask bit of 1
/// means observed.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTable {
    d: usize,
    /// Indexed by `mask * 2^d + (x & mask)`.
    outcomes: Vec<Vec<(usize, f64)>>,
}

impl GeneratorTable {
    /// Builds the table from `f(x_observed, m)`, which returns `(x̄, prob)`
    /// pairs. Missing entries of `x_observed` are passed as 0.
    pub fn from_fn<F>(d: usize, mut f: F) -> Result<Self, EvalError>
    where
        F: FnMut(&[u8], &[u8]) -> Vec<(Vec<u8>, f64)>,
    {
        if d == 0 || d > MAX_TOY_D {
            return Err(EvalError::Usage(format!("toy dimension must be 1..={MAX_TOY_D}, got {d}")));
        }
        let size = 1 << d;
        let mut outcomes = vec![Vec::new(); size * size];
        for m in 0..size {
            for x in 0..size {
                if x & !m != 0 {
                    continue;
                }
                let rows = f(&from_bits(x, d), &from_bits(m, d));
                let mut entry = Vec::with_capacity(rows.len());
                for (x_bar, p) in rows {
                    if x_bar.len() != d || x_bar.iter().any(|&v| v > 1) {
                        return Err(EvalError::Usage("generator outcome must be a binary vector of length d".into()));
                    }
                    entry.push((to_bits(&x_bar), p));
                }
                let probs: Vec<f64> = entry.iter().map(|e| e.1).collect();
                check_distribution(&format!("generator at m={m:0d$b}, x={x:0d$b}"), &probs)?;
                outcomes[m * size + x] = entry;
            }
        }
        Ok(Self { d, outcomes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Distribution of x̄ given the observed part of `x` under mask `m` (bit-encoded).
    pub fn outcomes(&self, x: usize, m: usize) -> &[(usize, f64)] {
        &self.outcomes[m * (1 << self.d) + (x & m)]
    }
}

/// A small binary world: the data distribution, the mask distribution and
/// a fixed generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    d: usize,
    x_dist: Vec<f64>,
    mask_dist: Vec<f64>,
    generator: GeneratorTable,
}

impl ToyModel {
    /// `x_dist` and `mask_dist` hold one probability per bit pattern.
    pub fn new(d: usize, x_dist: Vec<f64>, mask_dist: Vec<f64>, generator: GeneratorTable) -> Result<Self, EvalError> {
        if d == 0 || d > MAX_TOY_D {
            return Err(EvalError::Usage(format!("toy dimension must be 1..={MAX_TOY_D}, got {d}")));
        }
        let size = 1 << d;
        if x_dist.len() != size || mask_dist.len() != size {
            return Err(EvalError::Usage(format!("distributions need {size} entries")));
        }
        if generator.d() != d {
            return Err(EvalError::Usage("generator dimension differs from toy".into()));
        }
        check_distribution("x distribution", &x_dist)?;
        check_distribution("mask distribution", &mask_dist)?;
        Ok(Self {
            d,
            x_dist,
            mask_dist,
            generator,
        })
    }

    /// Mask distribution with each component observed independently.
    pub fn independent_mask(p_observed: &[f64]) -> Vec<f64> {
        let d = p_observed.len();
        (0..1usize << d)
            .map(|m| {
                (0..d)
                    .map(|i| if bit(m, i) == 1 { p_observed[i] } else { 1.0 - p_observed[i] })
                    .product()
            })
            .collect()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn sample_pattern(probs: &[f64], rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// One draw of `(x̂, m)` as bit patterns.
    pub fn sample(&self, rng: &mut RngStream) -> (usize, usize) {
        let x = Self::sample_pattern(&self.x_dist, rng);
        let m = Self::sample_pattern(&self.mask_dist, rng);
        let outcomes = self.generator.outcomes(x, m);
        let probs: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
        let x_bar = outcomes[Self::sample_pattern(&probs, rng)].0;
        ((x & m) | (x_bar & !m & ((1 << self.d) - 1)), m)
    }
}

/// One `(x̂, h)` cell of the posterior table.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEntry {
    pub x_hat: Vec<u8>,
    /// Hint entries from {0, 0.5, 1}.
    pub hint: Vec<f64>,
    /// Joint probability of the cell.
    pub prob: f64,
    /// `P(m_i = 1 | x̂, h)` for every component.
    pub posterior: Vec<f64>,
}

/// Per-component observation posteriors for every reachable `(x̂, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePosteriorTable {
    pub d: usize,
    pub entries: Vec<PosteriorEntry>,
}

impl DiscretePosteriorTable {
    pub fn lookup(&self, x_hat: &[u8], hint: &[f64]) -> Option<&PosteriorEntry> {
        self.entries.iter().find(|e| e.x_hat == x_hat && e.hint == hint)
    }

    /// Number of (entry, component) pairs whose posterior contradicts a
    /// revealed hint: `h_i = 1` must give exactly 1 and `h_i = 0` exactly 0.
    pub fn endpoint_violations(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|e| e.hint.iter().zip(&e.posterior))
            .filter(|&(&h, &p)| (h == 1.0 && p != 1.0) || (h == 0.0 && p != 0.0))
            .count()
    }
}

/// Hint code per component: 0, 1, or 2 for the hidden 0.5.
fn hint_code(m: usize, k: usize, d: usize) -> Vec<u8> {
    (0..d).map(|i| if i == k { 2 } else { bit(m, i) }).collect()
}

/// Exhaustively enumerates data, mask, generator outcome and hidden index,
/// and returns the posterior that each component was observed given the
/// completed vector and the hint.
pub fn bayes_oracle(toy: &ToyModel) -> DiscretePosteriorTable {
    let d = toy.d;
    let size = 1usize << d;
    let full = size - 1;
    // (x̂ bits, hint codes) -> (joint prob, joint prob with m_i = 1 per i)
    let mut cells: BTreeMap<(usize, Vec<u8>), (f64, Vec<f64>)> = BTreeMap::new();
    for x in 0..size {
        let px = toy.x_dist[x];
        if px == 0.0 {
            continue;
        }
        for m in 0..size {
            let pm = toy.mask_dist[m];
            if pm == 0.0 {
                continue;
            }
            for &(x_bar, pg) in toy.generator.outcomes(x, m) {
                if pg == 0.0 {
                    continue;
                }
                let x_hat = (x & m) | (x_bar & !m & full);
                let p = px * pm * pg / d as f64;
                for k in 0..d {
                    let cell = cells.entry((x_hat, hint_code(m, k, d))).or_insert((0.0, vec![0.0; d]));
                    cell.0 += p;
                    for i in 0..d {
                        if bit(m, i) == 1 {
                            cell.1[i] += p;
                        }
                    }
                }
            }
        }
    }
    let entries = cells
        .into_iter()
        .map(|((x_hat, codes), (prob, observed))| PosteriorEntry {
            x_hat: from_bits(x_hat, d),
            hint: codes.iter().map(|&c| if c == 2 { 0.5 } else { f64::from(c) }).collect(),
            prob,
            posterior: observed.iter().map(|&o| (o / prob).clamp(0.0, 1.0)).collect(),
        })
        .collect();
    DiscretePosteriorTable { d, entries }
}

/// Schedule for fitting a discriminator against a toy.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrainConfig {
    pub hidden: Vec<usize>,
    pub iterations: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Learning rate at iteration `t` is `learning_rate / (1 + t / decay)`.
    pub decay: f64,
    pub seed: u64,
}

impl Default for OracleTrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![16, 16],
            iterations: 6000,
            batch: 256,
            learning_rate: 5e-3,
            decay: 1000.0,
            seed: 0,
        }
    }
}

/// Trains a discriminator on `(x̂, h)` samples from the toy with the
/// discriminator loss of the training loop.
pub fn train_discriminator_on_toy(toy: &ToyModel, config: &OracleTrainConfig) -> Result<Discriminator, EvalError> {
    let d = toy.d;
    let root = RngStream::new(config.seed);
    let mut disc = Discriminator::new(d, &config.hidden, &mut root.derive("init"));
    let mut opt = Optimizer::new(OptimizerKind::default(), config.learning_rate, &disc.net);
    let mut data_rng = root.derive("data");
    let mut hint_rng = root.derive("hint");
    let n = config.batch;
    for t in 0..config.iterations {
        let mut completed = Matrix::zeros(n, d);
        let mut mask = Matrix::zeros(n, d);
        let mut hints = Matrix::zeros(n, d);
        let mut b = Matrix::zeros(n, d);
        for r in 0..n {
            let (x_hat, m) = toy.sample(&mut data_rng);
            let m_row: Vec<f64> = (0..d).map(|i| f64::from(bit(m, i))).collect();
            let draw = sample_hint(&m_row, &mut hint_rng);
            for i in 0..d {
                completed.set(r, i, f64::from(bit(x_hat, i)));
                mask.set(r, i, m_row[i]);
                hints.set(r, i, draw.h[i]);
                b.set(r, i, draw.b[i]);
            }
        }
        let (_, grads) = discriminator_gradients_on(&disc, &completed, &hints, &mask, &b)?;
        opt.set_learning_rate(config.learning_rate / (1.0 + t as f64 / config.decay));
        opt.step(&mut disc.net, &grads)?;
    }
    Ok(disc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    /// Number of (cell, hidden component) pairs compared.
    pub compared: usize,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
}

/// Compares the discriminator with the table on every hidden component
/// (hint 0.5). Revealed components are settled by the hint itself.
pub fn compare_with_oracle(disc: &Discriminator, table: &DiscretePosteriorTable) -> Result<OracleComparison, EvalError> {
    if disc.d() != table.d {
        return Err(EvalError::Usage("discriminator dimension differs from table".into()));
    }
    let mut compared = 0;
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for e in &table.entries {
        let x: Vec<f64> = e.x_hat.iter().map(|&v| f64::from(v)).collect();
        let out = disc.discriminate(
            &Matrix::new(1, table.d, x).expect("sized"),
            &Matrix::new(1, table.d, e.hint.clone()).expect("sized"),
        )?;
        for i in 0..table.d {
            if e.hint[i] == 0.5 {
                let err = (out.get(0, i) - e.posterior[i]).abs();
                total += err;
                worst = worst.max(err);
                compared += 1;
            }
        }
    }
    if compared == 0 {
        return Err(EvalError::Undefined("table has no hidden components".into()));
    }
    Ok(OracleComparison {
        compared,
        mean_abs_error: total / compared as f64,
        max_abs_error: worst,
    })
}

/// Two correlated bits with a generator that draws every missing bit as a
/// fair coin; both components observed independently with probability 0.6.
pub fn reference_toy() -> ToyModel {
    let generator = GeneratorTable::from_fn(2, |x, m| {
        let missing: Vec<usize> = (0..2).filter(|&i| m[i] == 0).collect();
        let count = 1usize << missing.len();
        (0..count)
            .map(|c| {
                let mut out = x.to_vec();
                for (j, &i) in missing.iter().enumerate() {
                    out[i] = bit(c, j);
                }
                (out, 1.0 / count as f64)
            })
            .collect()
    })
    .expect("valid generator");
    // Bit 0 is the first component: pattern 0b10 means x = (0, 1).
    ToyModel::new(
        2,
        vec![0.1, 0.3, 0.2, 0.4],
        ToyModel::independent_mask(&[0.6, 0.6]),
        generator,
    )
    .expect("valid toy")
}
