use super::DataError;
use crate::rng::RngStream;

/// One cross-validation split, as row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffled k-fold partition of `0..n`; test fold sizes differ by at most one.
pub fn split_folds(n: usize, k: usize, rng: &mut RngStream) -> Result<Vec<Fold>, DataError> {
    if k < 2 {
        return Err(DataError::Usage(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(DataError::Usage(format!("{k} folds requested for {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut test = order[start..start + size].to_vec();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        test.sort_unstable();
        train.sort_unstable();
        folds.push(Fold { train, test });
        start += size;
    }
    Ok(folds)
}
