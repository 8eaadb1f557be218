use crate::data::Dataset;
use crate::error::{Error, Result};

/// Pearson correlation of two equal-length samples.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "correlation of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument(
            "correlation needs at least two observations".into(),
        ));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > 0.0) {
        return Err(Error::ConstantColumn(0));
    }
    if !(sbb > 0.0) {
        return Err(Error::ConstantColumn(1));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Median of a non-empty sample; even sizes average the two central values.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Correlation of two standardized columns of a dataset (means 0, population sd 1).
pub(crate) fn standardized_correlation(dataset: &Dataset, a: usize, b: usize) -> f64 {
    let n = dataset.n() as f64;
    let dot: f64 = dataset
        .column(a)
        .iter()
        .zip(dataset.column(b))
        .map(|(x, y)| x * y)
        .sum();
    (dot / n).clamp(-1.0, 1.0)
}

/// Median over `group` of |corr(x_candidate, x_g)|.
pub fn median_abs_correlation(candidate: usize, group: &[usize], dataset: &Dataset) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::InvalidArgument("group must be nonempty".into()));
    }
    if group.contains(&candidate) {
        return Err(Error::InvalidArgument(format!(
            "candidate {candidate} already belongs to the group"
        )));
    }
    let mut values: Vec<f64> = group
        .iter()
        .map(|&g| standardized_correlation(dataset, candidate, g).abs())
        .collect();
    Ok(median(&mut values))
}
