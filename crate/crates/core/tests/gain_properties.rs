mod common;

use common::{random_masked, small_config};
use gain::data::{normalize, FeatureKind};
use gain::gain::{
    complete, impute, loss_d, loss_g_adv, loss_m, read_model, sample_hint, train, write_model, Generator, HintDraw,
    Variant,
};
use gain::RngStream;
use proptest::prelude::*;

fn mask_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop::bool::ANY, d).prop_map(|v| v.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
}

fn probs(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..0.999, d)
}

proptest! {
    #[test]
    fn hint_hides_exactly_one_component(m in (1usize..12).prop_flat_map(mask_vec), seed in any::<u64>()) {
        let draw = sample_hint(&m, &mut RngStream::new(seed));
        let halves: Vec<usize> = (0..m.len()).filter(|&i| draw.h[i] == 0.5).collect();
        prop_assert_eq!(halves, vec![draw.hidden]);
        for i in 0..m.len() {
            if i != draw.hidden {
                prop_assert_eq!(draw.h[i], m[i]);
                prop_assert_eq!(draw.b[i], 1.0);
            }
        }
        prop_assert_eq!(draw.b[draw.hidden], 0.0);
    }

    #[test]
    fn completion_keeps_observed_and_fills_missing(
        (m, x, xb) in (1usize..10).prop_flat_map(|d| (mask_vec(d), probs(d), probs(d)))
    ) {
        let c = complete(&x, &m, &xb);
        for i in 0..m.len() {
            let want = m[i] * x[i] + (1.0 - m[i]) * xb[i];
            prop_assert_eq!(c[i], want);
        }
    }

    #[test]
    fn adversarial_losses_see_only_the_hidden_component(
        (m, p, q, k) in (2usize..10).prop_flat_map(|d| (mask_vec(d), probs(d), probs(d), 0..d))
    ) {
        let b = HintDraw::with_hidden(&m, k).b;
        // Swap every prediction except the hidden one.
        let mut mixed = q.clone();
        mixed[k] = p[k];
        prop_assert_eq!(loss_d(&m, &p, &b), loss_d(&m, &mixed, &b));
        prop_assert_eq!(loss_g_adv(&m, &p, &b), loss_g_adv(&m, &mixed, &b));
        if m[k] == 1.0 {
            prop_assert_eq!(loss_g_adv(&m, &p, &b), 0.0);
        }
    }

    #[test]
    fn reconstruction_loss_ignores_missing_cells(
        (m, x, xb, noise) in (1usize..10).prop_flat_map(|d| (mask_vec(d), probs(d), probs(d), probs(d)))
    ) {
        let kinds = vec![FeatureKind::Continuous; m.len()];
        let perturbed: Vec<f64> = (0..m.len()).map(|i| if m[i] == 0.0 { noise[i] } else { xb[i] }).collect();
        prop_assert_eq!(loss_m(&x, &xb, &m, &kinds), loss_m(&x, &perturbed, &m, &kinds));
        let expected: f64 = (0..m.len()).map(|i| m[i] * (xb[i] - x[i]).powi(2)).sum();
        prop_assert!((loss_m(&x, &xb, &m, &kinds) - expected).abs() < 1e-12);
    }
}

#[test]
fn training_replays_exactly_under_a_fixed_seed() {
    let (ds, _) = normalize(&random_masked(40, 4, 0.3, 5));
    let a = train(&ds, &small_config(30, 9)).unwrap();
    let b = train(&ds, &small_config(30, 9)).unwrap();
    assert_eq!(a, b);
    let c = train(&ds, &small_config(30, 10)).unwrap();
    assert_ne!(a.history, c.history);
}

#[test]
fn reconstruction_only_with_zero_alpha_leaves_generator_at_init() {
    let (ds, _) = normalize(&random_masked(40, 4, 0.3, 6));
    let mut cfg = small_config(25, 3);
    cfg.variant = Variant::NoLg;
    cfg.alpha = 0.0;
    let model = train(&ds, &cfg).unwrap();
    let init = RngStream::new(3).derive("init");
    let fresh = Generator::new(4, &cfg.hidden_for(4), &mut init.derive("generator"));
    assert_eq!(model.generator, fresh);
    assert!(model.history.iter().all(|r| r.g_adv_loss.is_finite()));
}

#[test]
fn model_file_roundtrip_is_bit_exact() {
    let (ds, _) = normalize(&random_masked(30, 3, 0.25, 7));
    let model = train(&ds, &small_config(20, 1)).unwrap();
    let mut bytes = Vec::new();
    write_model(&model, &mut bytes).unwrap();
    let back = read_model(bytes.as_slice()).unwrap();
    assert_eq!(back.generator, model.generator);
    assert_eq!(back.discriminator, model.discriminator);
    assert_eq!(back.normalization, model.normalization);
    assert_eq!(back.feature_names, model.feature_names);
    let mut again = Vec::new();
    write_model(&back, &mut again).unwrap();
    assert_eq!(bytes, again);
}

#[test]
fn imputation_preserves_observed_cells_and_draws_differ() {
    let raw = random_masked(30, 3, 0.3, 8);
    let (ds, _) = normalize(&raw);
    let mut cfg = small_config(20, 2);
    cfg.noise_high = 1.0;
    let model = train(&ds, &cfg).unwrap();
    let draws = impute(&model, &raw, &mut RngStream::new(4), 3).unwrap();
    assert_eq!(draws.len(), 3);
    for out in &draws {
        assert!(out.mask().is_fully_observed());
        for r in 0..raw.n() {
            for c in 0..raw.d() {
                if raw.mask().get(r, c) {
                    assert_eq!(out.raw().get(r, c).to_bits(), raw.raw().get(r, c).to_bits());
                }
            }
        }
    }
    assert_ne!(draws[0].raw(), draws[1].raw());
}
