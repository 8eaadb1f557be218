//! Standardized regression data and coefficient vectors.
//!
//! Columns are scaled with the population divisor `n`, so every column of a
//! [`Dataset`] satisfies `x_jᵀx_j / n = 1` and the response is centred.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Means and standard deviations needed to map between raw and standardized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub column_means: Vec<f64>,
    pub column_sds: Vec<f64>,
    pub y_mean: f64,
}

impl Standardization {
    pub fn p(&self) -> usize {
        self.column_means.len()
    }

    /// Coefficients on the standardized scale expressed in raw predictor units.
    pub fn to_original_scale(&self, coefficients: &CoefficientVector) -> Vec<f64> {
        coefficients
            .values()
            .iter()
            .zip(&self.column_sds)
            .map(|(b, sd)| b / sd)
            .collect()
    }
}

/// Standardized design matrix (column-major) with a centred response.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    meta: Standardization,
}

impl Dataset {
    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn y_slice(&self) -> &[f64] {
        self.y.as_slice().expect("response is contiguous")
    }

    /// Column `j` as a contiguous slice.
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        let data = self
            .x
            .as_slice_memory_order()
            .expect("design is stored contiguously");
        &data[j * n..(j + 1) * n]
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn meta(&self) -> &Standardization {
        &self.meta
    }

    /// Rebuild the raw design from the stored standardization.
    pub fn destandardize_x(&self) -> Array2<f64> {
        let mut raw = self.x.clone();
        for (j, mut col) in raw.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.meta.column_means[j], self.meta.column_sds[j]);
            col.mapv_inplace(|v| v * s + m);
        }
        raw
    }

    /// Response in original units.
    pub fn raw_y(&self) -> Array1<f64> {
        self.y.mapv(|v| v + self.meta.y_mean)
    }
}

fn mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Centre and scale every column (population sd) and centre the response.
pub fn standardize(raw_x: ArrayView2<'_, f64>, raw_y: ArrayView1<'_, f64>) -> Result<Dataset> {
    let (n, p) = raw_x.dim();
    if n != raw_y.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows but response has {} entries",
            raw_y.len()
        )));
    }
    if n < 2 || p < 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 rows and 1 column, got {n}x{p}"
        )));
    }

    let mut x = Array2::<f64>::zeros((n, p).f());
    let mut column_means = Vec::with_capacity(p);
    let mut column_sds = Vec::with_capacity(p);
    for (j, raw_col) in raw_x.columns().into_iter().enumerate() {
        let m = mean(raw_col.iter().copied());
        let var = raw_col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if !(sd > 1e-12 * m.abs().max(1.0)) {
            return Err(Error::ConstantColumn(j));
        }
        let mut col = x.column_mut(j);
        for (dst, v) in col.iter_mut().zip(raw_col.iter()) {
            *dst = (v - m) / sd;
        }
        // second pass removes the rounding left in the mean
        let residual = mean(col.iter().copied());
        col.mapv_inplace(|v| v - residual);
        column_means.push(m);
        column_sds.push(sd);
    }

    let y_mean = mean(raw_y.iter().copied());
    let y = raw_y.mapv(|v| v - y_mean);

    Ok(Dataset {
        x,
        y,
        meta: Standardization {
            column_means,
            column_sds,
            y_mean,
        },
    })
}

/// Predict responses in original units for raw (unstandardized) rows.
pub fn predict(
    meta: &Standardization,
    coefficients: &CoefficientVector,
    new_x_raw: ArrayView2<'_, f64>,
) -> Result<Array1<f64>> {
    let p = meta.p();
    if new_x_raw.ncols() != p || coefficients.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "model has {p} predictors, data has {} columns and coefficients have {} entries",
            new_x_raw.ncols(),
            coefficients.len()
        )));
    }
    let support = coefficients.support();
    let beta = coefficients.values();
    Ok(new_x_raw
        .rows()
        .into_iter()
        .map(|row| {
            meta.y_mean
                + support
                    .iter()
                    .map(|&j| (row[j] - meta.column_means[j]) / meta.column_sds[j] * beta[j])
                    .sum::<f64>()
        })
        .collect())
}

/// Coefficients on the standardized scale; the support is every nonzero entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    values: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            values: vec![0.0; p],
        }
    }

    /// Scatter `values` at positions `columns` into a length-`p` vector.
    pub fn scatter(p: usize, columns: &[usize], values: &[f64]) -> Self {
        let mut full = vec![0.0; p];
        for (&j, &v) in columns.iter().zip(values) {
            full[j] = v;
        }
        Self { values: full }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Zero every entry outside `keep`.
    pub fn restricted_to(&self, keep: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for &j in keep {
            values[j] = self.values[j];
        }
        Self { values }
    }
}
