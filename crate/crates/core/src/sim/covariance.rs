use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population correlation structure of the simulated predictors. All kinds
/// have unit variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Identity,
    /// `ρ^{|i−j|}` over all variables.
    Toeplitz { rho: f64 },
    /// `n_blocks` equicorrelated blocks followed by `independent_tail` independent variables.
    PairwiseBlocks {
        block_size: usize,
        rho: f64,
        n_blocks: usize,
        independent_tail: usize,
    },
    /// `n_blocks` independent blocks, each with `ρ^{|i−j|}` inside.
    BlockToeplitz { block_size: usize, rho: f64, n_blocks: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub kind: CovarianceKind,
    pub p: usize,
}

impl CovarianceSpec {
    pub fn new(kind: CovarianceKind, p: usize) -> Result<Self> {
        let check_rho = |rho: f64, lo: f64| {
            if rho >= lo && rho < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("correlation {rho} out of range")))
            }
        };
        match &kind {
            CovarianceKind::Identity => {}
            CovarianceKind::Toeplitz { rho } => check_rho(*rho, -1.0 + f64::EPSILON)?,
            CovarianceKind::PairwiseBlocks {
                block_size,
                rho,
                n_blocks,
                independent_tail,
            } => {
                check_rho(*rho, 0.0)?;
                if block_size * n_blocks + independent_tail != p {
                    return Err(Error::DimensionMismatch("block layout does not cover p".into()));
                }
            }
            CovarianceKind::BlockToeplitz {
                block_size,
                rho,
                n_blocks,
            } => {
                check_rho(*rho, -1.0 + f64::EPSILON)?;
                if block_size * n_blocks != p {
                    return Err(Error::DimensionMismatch("block layout does not cover p".into()));
                }
            }
        }
        Ok(Self { kind, p })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            kind: CovarianceKind::Identity,
            p,
        }
    }

    /// `V[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        match &self.kind {
            CovarianceKind::Identity => 0.0,
            CovarianceKind::Toeplitz { rho } => rho.powi(i.abs_diff(j) as i32),
            CovarianceKind::PairwiseBlocks {
                block_size,
                rho,
                n_blocks,
                ..
            } => {
                let span = block_size * n_blocks;
                if i < span && j < span && i / block_size == j / block_size {
                    *rho
                } else {
                    0.0
                }
            }
            CovarianceKind::BlockToeplitz { block_size, rho, .. } => {
                if i / block_size == j / block_size {
                    rho.powi(i.abs_diff(j) as i32)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.p, self.p), |(i, j)| self.entry(i, j))
    }

    /// `dᵀVd`.
    pub fn quad_form(&self, d: &[f64]) -> Result<f64> {
        if d.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against p = {}",
                d.len(),
                self.p
            )));
        }
        let sq: f64 = d.iter().map(|v| v * v).sum();
        Ok(match &self.kind {
            CovarianceKind::Identity => sq,
            CovarianceKind::Toeplitz { rho } => toeplitz_quad(d, *rho),
            CovarianceKind::PairwiseBlocks {
                block_size,
                rho,
                n_blocks,
                ..
            } => {
                let mut total = sq;
                for b in 0..*n_blocks {
                    let s: f64 = d[b * block_size..(b + 1) * block_size].iter().sum();
                    let s2: f64 = d[b * block_size..(b + 1) * block_size].iter().map(|v| v * v).sum();
                    total += rho * (s * s - s2);
                }
                total
            }
            CovarianceKind::BlockToeplitz { block_size, rho, .. } => {
                d.chunks(*block_size).map(|c| toeplitz_quad(c, *rho)).sum()
            }
        })
    }

    /// One draw from `N(0, V)` built from an exact square root of `V`:
    /// a shared factor per equicorrelated block, an AR(1) recursion for Toeplitz.
    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut z = || -> f64 { rng.sample(StandardNormal) };
        match &self.kind {
            CovarianceKind::Identity => out.iter_mut().for_each(|v| *v = z()),
            CovarianceKind::Toeplitz { rho } => ar1_fill(out, *rho, &mut z),
            CovarianceKind::PairwiseBlocks {
                block_size,
                rho,
                n_blocks,
                ..
            } => {
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                let span = block_size * n_blocks;
                for block in out[..span].chunks_mut(*block_size) {
                    let shared = z();
                    for v in block {
                        *v = a * shared + b * z();
                    }
                }
                out[span..].iter_mut().for_each(|v| *v = z());
            }
            CovarianceKind::BlockToeplitz { block_size, rho, .. } => {
                for block in out.chunks_mut(*block_size) {
                    ar1_fill(block, *rho, &mut z);
                }
            }
        }
    }
}

fn ar1_fill(out: &mut [f64], rho: f64, z: &mut impl FnMut() -> f64) {
    let innov = (1.0 - rho * rho).sqrt();
    let mut prev = 0.0;
    for (k, v) in out.iter_mut().enumerate() {
        *v = if k == 0 { z() } else { rho * prev + innov * z() };
        prev = *v;
    }
}

fn toeplitz_quad(d: &[f64], rho: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..d.len() {
        if d[i] == 0.0 {
            continue;
        }
        let mut inner = d[i];
        let mut r = 1.0;
        for dj in &d[i + 1..] {
            r *= rho;
            inner += 2.0 * r * dj;
        }
        total += d[i] * inner;
    }
    total
}
