use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cd::{walk_path, Penalty};
use super::design::Design;
use crate::error::{Error, Result};
use crate::seed::SeedStream;

/// K-fold cross-validation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 5 }
    }
}

impl CvConfig {
    pub fn new(folds: usize) -> Result<Self> {
        if folds < 2 {
            return Err(Error::InvalidArgument(format!(
                "cross-validation needs at least 2 folds, got {folds}"
            )));
        }
        Ok(Self { folds })
    }

    /// Fold label of every row: a seeded shuffle dealt round-robin, so fold
    /// sizes differ by at most one.
    pub fn fold_assignment(&self, n: usize, seed: &SeedStream) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed.rng());
        let mut labels = vec![0; n];
        for (pos, &row) in order.iter().enumerate() {
            labels[row] = pos % self.folds;
        }
        labels
    }
}

/// Outcome of cross-validating one penalty over a λ sequence.
#[derive(Debug, Clone)]
pub(crate) struct CvOutcome {
    /// Full-data coefficients at the chosen λ.
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub cv_error: f64,
    /// Mean held-out squared error for each λ that every fit reached.
    pub errors: Vec<f64>,
}

/// Cross-validate along `lambdas` (decreasing). Ties go to the larger λ.
pub(crate) fn cross_validate(
    design: &Design,
    penalty: &Penalty,
    lambdas: &[f64],
    cv: &CvConfig,
    seed: &SeedStream,
    early_stop: bool,
) -> Result<CvOutcome> {
    let n = design.n();
    if n < cv.folds {
        return Err(Error::InvalidArgument(format!(
            "{n} rows cannot be split into {} folds",
            cv.folds
        )));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda sequence".into()));
    }

    let mut full_path: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    let reached = walk_path(design, penalty, lambdas, early_stop, |_, b| {
        full_path.push(b.to_vec())
    })?;
    let mut len = reached;

    let labels = cv.fold_assignment(n, seed);
    let mut sse = vec![0.0; reached];
    for fold in 0..cv.folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i] != fold);
        let (fold_design, centering) = design.subset_rows_centered(&train);
        let mut pred = vec![0.0; test.len()];
        let fold_len = walk_path(&fold_design, penalty, &lambdas[..reached], early_stop, |k, b| {
            pred.iter_mut().for_each(|v| *v = centering.y_mean);
            for (j, &bj) in b.iter().enumerate() {
                if bj != 0.0 {
                    let col = design.col(j);
                    let m = centering.col_means[j];
                    for (v, &i) in pred.iter_mut().zip(&test) {
                        *v += (col[i] - m) * bj;
                    }
                }
            }
            let y = design.y();
            sse[k] += test
                .iter()
                .zip(&pred)
                .map(|(&i, v)| (y[i] - v) * (y[i] - v))
                .sum::<f64>();
        })?;
        len = len.min(fold_len);
    }

    let errors: Vec<f64> = sse[..len].iter().map(|s| s / n as f64).collect();
    let mut index = 0;
    for (k, e) in errors.iter().enumerate() {
        if *e < errors[index] {
            index = k;
        }
    }
    Ok(CvOutcome {
        beta: std::mem::take(&mut full_path[index]),
        lambda: lambdas[index],
        cv_error: errors[index],
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_partitions() {
        let cv = CvConfig::new(5).unwrap();
        for n in [5usize, 7, 23, 100] {
            let labels = cv.fold_assignment(n, &SeedStream::new(n as u64));
            let mut sizes = vec![0usize; 5];
            labels.iter().for_each(|&f| sizes[f] += 1);
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(hi - lo <= 1, "sizes {sizes:?}");
            assert_eq!(sizes.iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn fold_assignment_is_seeded() {
        let cv = CvConfig::default();
        let a = cv.fold_assignment(40, &SeedStream::new(1));
        let b = cv.fold_assignment(40, &SeedStream::new(1));
        let c = cv.fold_assignment(40, &SeedStream::new(2));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn one_fold_rejected() {
        assert!(CvConfig::new(1).is_err());
    }
}
