use super::EvalError;
use crate::data::Mask;
use crate::nn::Matrix;

/// Root-mean-square error over missing cells only. `None` when nothing is missing.
pub fn rmse_missing(ground_truth: &Matrix, imputed: &Matrix, mask: &Mask) -> Result<Option<f64>, EvalError> {
    if ground_truth.shape() != imputed.shape() || (mask.rows(), mask.cols()) != ground_truth.shape() {
        return Err(EvalError::Usage("rmse_missing: shapes differ".into()));
    }
    let (sse, count) = squared_error_missing(ground_truth, imputed, mask);
    Ok((count > 0).then(|| (sse / count as f64).sqrt()))
}

/// Sum of squared errors and number of missing cells, for pooling across folds.
pub fn squared_error_missing(ground_truth: &Matrix, imputed: &Matrix, mask: &Mask) -> (f64, usize) {
    let mut sse = 0.0;
    let mut count = 0;
    for r in 0..ground_truth.rows() {
        for c in 0..ground_truth.cols() {
            if !mask.get(r, c) {
                sse += (ground_truth.get(r, c) - imputed.get(r, c)).powi(2);
                count += 1;
            }
        }
    }
    (sse, count)
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability
/// that a random positive outscores a random negative, ties counting 0.5.
pub fn auroc(scores: &[f64], labels: &[f64]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::Usage("auroc: scores and labels differ in length".into()));
    }
    if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(EvalError::Usage("auroc: labels must be 0 or 1".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::Usage("auroc: NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::Usage("auroc: both classes must be present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks (1-based) across tie groups.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] == 1.0 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    let u = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(u / (np * n_neg as f64))
}

/// `(‖w − ŵ‖₁, ‖w − ŵ‖₂)`.
pub fn congeniality(w_complete: &[f64], w_imputed: &[f64]) -> Result<(f64, f64), EvalError> {
    if w_complete.len() != w_imputed.len() {
        return Err(EvalError::Usage(format!(
            "congeniality: {} vs {} weights",
            w_complete.len(),
            w_imputed.len()
        )));
    }
    let l1 = w_complete.iter().zip(w_imputed).map(|(a, b)| (a - b).abs()).sum();
    let l2 = w_complete
        .iter()
        .zip(w_imputed)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((l1, l2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::new(v.len(), 1, v.to_vec()).unwrap()
    }

    fn mask(bits: &[u8]) -> Mask {
        let rows: Vec<[u8; 1]> = bits.iter().map(|&b| [b]).collect();
        Mask::from_rows(&rows).unwrap()
    }

    #[test]
    fn rmse_cases() {
        let t = col(&[0.4, 0.9, 0.1]);
        assert_eq!(rmse_missing(&t, &t, &mask(&[0, 1, 0])).unwrap(), Some(0.0));
        let r = rmse_missing(&t, &col(&[0.1, 0.9, 0.1]), &mask(&[0, 1, 1])).unwrap().unwrap();
        assert!((r - 0.3).abs() < 1e-12);
        // Errors 0.3 and 0.4 → √((0.09 + 0.16) / 2).
        let r = rmse_missing(&t, &col(&[0.1, 0.9, 0.5]), &mask(&[0, 1, 0])).unwrap().unwrap();
        assert!((r - 0.353_553_390_593_273_8).abs() < 1e-12);
        assert_eq!(rmse_missing(&t, &t, &mask(&[1, 1, 1])).unwrap(), None);
    }

    #[test]
    fn observed_cells_ignored() {
        let t = col(&[0.4, 0.9]);
        let r = rmse_missing(&t, &col(&[0.4, -5.0]), &mask(&[0, 1])).unwrap();
        assert_eq!(r, Some(0.0));
    }

    #[test]
    fn auroc_cases() {
        let y = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(auroc(&y, &y).unwrap(), 1.0);
        assert_eq!(auroc(&[0.3; 4], &y).unwrap(), 0.5);
        // Pairs (pos, neg): (0.35,0.1)✓ (0.35,0.4)✗ (0.8,0.1)✓ (0.8,0.4)✓ → 3/4.
        assert_eq!(auroc(&[0.1, 0.4, 0.35, 0.8], &y).unwrap(), 0.75);
        assert!(auroc(&[0.1, 0.2], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn congeniality_cases() {
        assert_eq!(congeniality(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), (0.0, 0.0));
        let (l1, l2) = congeniality(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(l1, 2.0);
        assert!((l2 - 2f64.sqrt()).abs() < 1e-15);
        assert!(congeniality(&[1.0], &[1.0, 2.0]).is_err());
    }
}
