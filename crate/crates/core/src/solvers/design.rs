use crate::data::Dataset;

/// Column-major working copy of a (sub)problem handed to the coordinate-descent kernels.
///
/// Columns are centred; their scale is whatever the caller provides, and the
/// solver uses `col_sq[j] = x_jᵀx_j / n` so unit variance is not assumed.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    n: usize,
    p: usize,
    cols: Vec<f64>,
    y: Vec<f64>,
    col_sq: Vec<f64>,
}

/// Centring applied when a design was cut from a parent by rows.
#[derive(Debug, Clone)]
pub(crate) struct Centering {
    pub col_means: Vec<f64>,
    pub y_mean: f64,
}

impl Design {
    pub fn from_parts(n: usize, p: usize, cols: Vec<f64>, y: Vec<f64>) -> Self {
        debug_assert_eq!(cols.len(), n * p);
        debug_assert_eq!(y.len(), n);
        let col_sq = (0..p)
            .map(|j| cols[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>() / n as f64)
            .collect();
        Self {
            n,
            p,
            cols,
            y,
            col_sq,
        }
    }

    /// The dataset restricted to `columns`, all rows.
    pub fn from_dataset(dataset: &Dataset, columns: &[usize]) -> Self {
        let n = dataset.n();
        let mut cols = Vec::with_capacity(n * columns.len());
        for &j in columns {
            cols.extend_from_slice(dataset.column(j));
        }
        Self::from_parts(n, columns.len(), cols, dataset.y_slice().to_vec())
    }

    /// Rows `rows` of `self`, re-centred on their own means.
    pub fn subset_rows_centered(&self, rows: &[usize]) -> (Self, Centering) {
        let m = rows.len();
        let mut cols = Vec::with_capacity(m * self.p);
        let mut col_means = Vec::with_capacity(self.p);
        for j in 0..self.p {
            let src = self.col(j);
            let start = cols.len();
            cols.extend(rows.iter().map(|&i| src[i]));
            let mean = cols[start..].iter().sum::<f64>() / m as f64;
            cols[start..].iter_mut().for_each(|v| *v -= mean);
            col_means.push(mean);
        }
        let mut y: Vec<f64> = rows.iter().map(|&i| self.y[i]).collect();
        let y_mean = y.iter().sum::<f64>() / m as f64;
        y.iter_mut().for_each(|v| *v -= y_mean);
        (
            Self::from_parts(m, self.p, cols, y),
            Centering { col_means, y_mean },
        )
    }

    /// Rows `rows` (repeats allowed) and `columns` of a dataset, re-standardized to
    /// population sd 1. Returns the per-column sds, or `None` if a column is constant.
    pub fn resampled_standardized(
        dataset: &Dataset,
        rows: &[usize],
        columns: &[usize],
    ) -> Option<(Self, Vec<f64>)> {
        let m = rows.len();
        let mut cols = Vec::with_capacity(m * columns.len());
        let mut sds = Vec::with_capacity(columns.len());
        for &j in columns {
            let src = dataset.column(j);
            let start = cols.len();
            cols.extend(rows.iter().map(|&i| src[i]));
            let block = &mut cols[start..];
            let mean = block.iter().sum::<f64>() / m as f64;
            let var = block.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64;
            let sd = var.sqrt();
            if !(sd > 1e-12) {
                return None;
            }
            block.iter_mut().for_each(|v| *v = (*v - mean) / sd);
            sds.push(sd);
        }
        let ys = dataset.y_slice();
        let mut y: Vec<f64> = rows.iter().map(|&i| ys[i]).collect();
        let y_mean = y.iter().sum::<f64>() / m as f64;
        y.iter_mut().for_each(|v| *v -= y_mean);
        Some((Self::from_parts(m, columns.len(), cols, y), sds))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn col_sq(&self, j: usize) -> f64 {
        self.col_sq[j]
    }

    /// `X_jᵀ y / n` for every column.
    pub fn xty(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.p).map(|j| dot(self.col(j), &self.y) / n).collect()
    }

    pub fn yy(&self) -> f64 {
        dot(&self.y, &self.y) / self.n as f64
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorise the reduction
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..chunks {
        let i = 4 * c;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3) + tail
}
