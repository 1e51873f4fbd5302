//! Per-row losses and their derivatives.
//!
//! Masks, hint selectors and predictions are 0/1 or probability slices of
//! equal length `d`. Logarithm arguments are clamped to `[1e-8, 1 − 1e-8]`.

use crate::data::FeatureKind;
use crate::nn::{clamp_prob, safe_ln};

/// Discriminator cross-entropy restricted to the hidden component(s) (`b_i = 0`).
pub fn loss_d(m: &[f64], m_hat: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..m.len() {
        if b[i] == 0.0 {
            total -= m[i] * safe_ln(m_hat[i]) + (1.0 - m[i]) * safe_ln(1.0 - m_hat[i]);
        }
    }
    total
}

/// Generator adversarial loss: `−Σ_{i: b_i = 0} (1 − m_i) log m̂_i`.
pub fn loss_g_adv(m: &[f64], m_hat: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..m.len() {
        if b[i] == 0.0 {
            total -= (1.0 - m[i]) * safe_ln(m_hat[i]);
        }
    }
    total
}

/// Reconstruction loss on observed components: squared error for continuous
/// features, `−x log x̄` for binary ones.
pub fn loss_m(values: &[f64], x_bar: &[f64], m: &[f64], kinds: &[FeatureKind]) -> f64 {
    let mut total = 0.0;
    for i in 0..values.len() {
        if m[i] == 0.0 {
            continue;
        }
        total += m[i]
            * match kinds[i] {
                FeatureKind::Continuous => (x_bar[i] - values[i]).powi(2),
                FeatureKind::Binary => -values[i] * safe_ln(x_bar[i]),
            };
    }
    total
}

// Derivatives below differentiate the unclamped expressions at the clamped
// point, so saturated outputs still receive a gradient.

/// Adds `scale · ∂loss_d/∂m̂` into `out`.
pub fn loss_d_grad(m: &[f64], m_hat: &[f64], b: &[f64], scale: f64, out: &mut [f64]) {
    for i in 0..m.len() {
        if b[i] == 0.0 {
            let p = clamp_prob(m_hat[i]);
            out[i] += scale * (-m[i] / p + (1.0 - m[i]) / (1.0 - p));
        }
    }
}

/// Adds `scale · ∂loss_g_adv/∂m̂` into `out`.
pub fn loss_g_adv_grad(m: &[f64], m_hat: &[f64], b: &[f64], scale: f64, out: &mut [f64]) {
    for i in 0..m.len() {
        if b[i] == 0.0 {
            out[i] -= scale * (1.0 - m[i]) / clamp_prob(m_hat[i]);
        }
    }
}

/// Adds `scale · ∂loss_m/∂x̄` into `out`.
pub fn loss_m_grad(values: &[f64], x_bar: &[f64], m: &[f64], kinds: &[FeatureKind], scale: f64, out: &mut [f64]) {
    for i in 0..values.len() {
        if m[i] == 0.0 {
            continue;
        }
        out[i] += scale
            * m[i]
            * match kinds[i] {
                FeatureKind::Continuous => 2.0 * (x_bar[i] - values[i]),
                FeatureKind::Binary => -values[i] / clamp_prob(x_bar[i]),
            };
    }
}
