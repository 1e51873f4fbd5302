use crate::rng::RngStream;

/// One realization of the hint mechanism for a single row.
///
/// `b` is all ones except at the hidden index, and
/// `h = b ⊙ m + 0.5 · (1 − b)`: the hint reveals every mask entry except
/// the hidden one, which reads 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct HintDraw {
    pub hidden: usize,
    pub b: Vec<f64>,
    pub h: Vec<f64>,
}

impl HintDraw {
    /// Hint with a chosen hidden index `k` (0-based).
    pub fn with_hidden(m: &[f64], k: usize) -> Self {
        assert!(k < m.len(), "hidden index out of range");
        let b: Vec<f64> = (0..m.len()).map(|j| if j == k { 0.0 } else { 1.0 }).collect();
        let h = b.iter().zip(m).map(|(&bi, &mi)| bi * mi + 0.5 * (1.0 - bi)).collect();
        Self { hidden: k, b, h }
    }
}

/// Draws the hidden index uniformly over the `d` components.
pub fn sample_hint(m: &[f64], rng: &mut RngStream) -> HintDraw {
    assert!(!m.is_empty(), "hint needs d >= 1");
    HintDraw::with_hidden(m, rng.index(m.len()))
}

/// `(1 − m) ⊙ z` with `z_i ~ Uniform[0, noise_high]`; observed slots are 0.
pub fn sample_noise(m: &[f64], rng: &mut RngStream, noise_high: f64) -> Vec<f64> {
    assert!(noise_high > 0.0 && noise_high <= 1.0, "noise_high must lie in (0, 1]");
    m.iter()
        .map(|&mi| {
            if mi == 1.0 {
                0.0
            } else {
                rng.uniform_range(0.0, noise_high)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_index_matches_closed_form() {
        let draw = HintDraw::with_hidden(&[1.0, 0.0, 1.0], 1);
        assert_eq!(draw.b, vec![1.0, 0.0, 1.0]);
        assert_eq!(draw.h, vec![1.0, 0.5, 1.0]);
    }

    #[test]
    fn single_component_always_hidden() {
        let mut rng = RngStream::new(0);
        for m in [[0.0], [1.0]] {
            let draw = sample_hint(&m, &mut rng);
            assert_eq!((draw.b.clone(), draw.h.clone()), (vec![0.0], vec![0.5]));
        }
    }

    #[test]
    fn hidden_index_is_uniform() {
        let mut rng = RngStream::new(12);
        let mut counts = [0usize; 4];
        let m = [1.0, 0.0, 0.0, 1.0];
        for _ in 0..10_000 {
            counts[sample_hint(&m, &mut rng).hidden] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn noise_zero_where_observed() {
        let mut rng = RngStream::new(1);
        assert_eq!(sample_noise(&[1.0; 5], &mut rng, 1.0), vec![0.0; 5]);
    }

    #[test]
    fn noise_bounded() {
        let mut rng = RngStream::new(2);
        let z = sample_noise(&[0.0; 1000], &mut rng, 0.01);
        assert!(z.iter().all(|&v| (0.0..=0.01).contains(&v)));
    }

    #[test]
    fn noise_mean_on_unit_interval() {
        let mut rng = RngStream::new(3);
        let z = sample_noise(&[0.0; 10_000], &mut rng, 1.0);
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        assert!((mean - 0.5).abs() < 0.02);
    }
}
