//! Cyclic coordinate descent with covariance updates.
//!
//! The gradient `g_j = x_jᵀ(y - Xβ)/n` is kept up to date; a change `δ` in
//! `β_k` costs one pass over Gram column `k`, which is computed the first time
//! `k` leaves zero. Full sweeps alternate with sweeps over the ever-active set.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::design::{dot, Design};
use crate::error::{Error, Result};

pub(crate) const TOLERANCE: f64 = 1e-7;
pub(crate) const MAX_SWEEPS: usize = 10_000;

// path termination, as in glmnet
const DEV_RATIO_MAX: f64 = 0.999;
const DEV_CHANGE_MIN: f64 = 1e-5;
const MIN_PATH_POINTS: usize = 5;

// fewest predicted remaining sweeps that justify a jump to the sign-fixed optimum
const NEWTON_MIN_TAIL: f64 = 3.0;
const PROXIMAL: f64 = 1e-10;

#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Per-coordinate penalty factors: `λ (l1_j |β_j| + l2/2 β_j²)`.
/// An infinite `l1_j` pins coordinate `j` at zero.
#[derive(Debug, Clone)]
pub(crate) struct Penalty {
    pub l1: Vec<f64>,
    pub l2: f64,
}

impl Penalty {
    pub fn value(&self, lambda: f64, beta: &[f64]) -> f64 {
        beta.iter()
            .zip(&self.l1)
            .filter(|(b, _)| **b != 0.0)
            .map(|(b, w)| lambda * (w * b.abs() + 0.5 * self.l2 * b * b))
            .sum()
    }

    /// Smallest λ at which β = 0 satisfies the optimality conditions; `None` when
    /// every penalised score is zero.
    pub fn lambda_max(&self, xty: &[f64]) -> Option<f64> {
        let lmax = xty
            .iter()
            .zip(&self.l1)
            .filter(|(_, w)| w.is_finite() && **w > 0.0)
            .map(|(g, w)| g.abs() / w)
            .fold(0.0, f64::max);
        (lmax > 0.0 && lmax.is_finite()).then_some(lmax)
    }
}

pub(crate) struct CdState<'a> {
    design: &'a Design,
    penalty: &'a Penalty,
    xty: Vec<f64>,
    yy: f64,
    gram: Vec<Option<Box<[f64]>>>,
    beta: Vec<f64>,
    grad: Vec<f64>,
    active: Vec<usize>,
    is_active: Vec<bool>,
    factor: Option<SupportFactor>,
    pub trace: Option<Vec<f64>>,
}

/// Cholesky factor of the support Gram block plus its diagonal shift; reused
/// down the path while the support stays the same.
struct SupportFactor {
    support: Vec<usize>,
    shift: f64,
    chol: Cholesky<f64, Dyn>,
}

impl<'a> CdState<'a> {
    pub fn new(design: &'a Design, penalty: &'a Penalty) -> Self {
        let p = design.p();
        let xty = design.xty();
        Self {
            design,
            penalty,
            grad: xty.clone(),
            yy: design.yy(),
            xty,
            gram: vec![None; p],
            beta: vec![0.0; p],
            active: Vec::new(),
            is_active: vec![false; p],
            factor: None,
            trace: None,
        }
    }

    #[cfg(test)]
    pub fn xty(&self) -> &[f64] {
        &self.xty
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    fn ensure_gram(&mut self, k: usize) {
        if self.gram[k].is_none() {
            let d = self.design;
            let n = d.n() as f64;
            let xk = d.col(k);
            let col: Box<[f64]> = (0..d.p()).map(|j| dot(d.col(j), xk) / n).collect();
            self.gram[k] = Some(col);
        }
        if !self.is_active[k] {
            self.is_active[k] = true;
            self.active.push(k);
        }
    }

    fn shift(&mut self, k: usize, delta: f64) {
        self.ensure_gram(k);
        let col = self.gram[k].as_deref().expect("gram column present");
        for (g, c) in self.grad.iter_mut().zip(col) {
            *g -= c * delta;
        }
    }

    /// Replace the current coefficients (warm start).
    pub fn set_beta(&mut self, beta: &[f64]) {
        assert_eq!(beta.len(), self.beta.len());
        for k in 0..beta.len() {
            let delta = beta[k] - self.beta[k];
            if delta != 0.0 {
                self.shift(k, delta);
                self.beta[k] = beta[k];
            }
        }
    }

    #[inline]
    fn update(&mut self, j: usize, lambda: f64) -> f64 {
        let w = self.penalty.l1[j];
        if !w.is_finite() {
            return 0.0;
        }
        let c = self.design.col_sq(j);
        let old = self.beta[j];
        let z = self.grad[j] + c * old;
        let new = soft_threshold(z, lambda * w) / (c + lambda * self.penalty.l2);
        if new == old {
            return 0.0;
        }
        self.beta[j] = new;
        self.shift(j, new - old);
        (new - old).abs()
    }

    /// RSS / n for the current coefficients.
    pub fn rss_over_n(&self) -> f64 {
        let cross: f64 = self
            .beta
            .iter()
            .zip(self.xty.iter().zip(&self.grad))
            .filter(|(b, _)| **b != 0.0)
            .map(|(b, (xy, g))| b * (xy + g))
            .sum();
        (self.yy - cross).max(0.0)
    }

    pub fn objective(&self, lambda: f64) -> f64 {
        0.5 * self.rss_over_n() + self.penalty.value(lambda, &self.beta)
    }

    /// Fraction of the null deviance explained.
    pub fn dev_ratio(&self) -> f64 {
        if self.yy > 0.0 {
            1.0 - self.rss_over_n() / self.yy
        } else {
            0.0
        }
    }

    fn record(&mut self, lambda: f64) {
        if self.trace.is_some() {
            let obj = self.objective(lambda);
            self.trace.as_mut().unwrap().push(obj);
        }
    }

    /// Active-set descent on the current support: a proximal Newton step on the
    /// quadratic with the current signs held fixed (the proximal term keeps
    /// the system solvable when the support is rank deficient); if a
    /// coefficient would cross zero, stop there, drop it and repeat on the
    /// smaller support. On each segment the objective is convex and no higher
    /// at the step target than at the start. The whole move is undone if
    /// rounding makes the objective rise.
    fn newton_step(&mut self, lambda: f64, refactor: bool) {
        let mut support: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&j| self.beta[j] != 0.0)
            .collect();
        let before = self.objective(lambda);
        let old = self.beta.clone();
        let mut current = old.clone();
        let l2 = lambda * self.penalty.l2;
        while !support.is_empty() {
            let m = support.len();
            let shift = l2 + PROXIMAL;
            let rhs = DVector::<f64>::from_iterator(
                m,
                support.iter().map(|&k| {
                    self.xty[k] - lambda * self.penalty.l1[k] * current[k].signum() + PROXIMAL * current[k]
                }),
            );
            let cached = self
                .factor
                .as_ref()
                .is_some_and(|f| f.shift == shift && f.support == support);
            if !cached && !refactor {
                break;
            }
            if !cached {
                let mut gram = DMatrix::<f64>::zeros(m, m);
                for (b, &k) in support.iter().enumerate() {
                    let col = self.gram[k].as_deref().expect("active column has gram");
                    for (a, &j) in support.iter().enumerate() {
                        gram[(a, b)] = col[j];
                    }
                    gram[(b, b)] += shift;
                }
                let Some(chol) = gram.cholesky() else {
                    self.factor = None;
                    break;
                };
                self.factor = Some(SupportFactor {
                    support: support.clone(),
                    shift,
                    chol,
                });
            }
            let target = self.factor.as_ref().unwrap().chol.solve(&rhs);
            if target.iter().any(|v| !v.is_finite()) {
                break;
            }
            // largest step in (0, 1] that keeps every sign
            let mut step = 1.0f64;
            let mut blocking = None;
            for (a, &j) in support.iter().enumerate() {
                let (cur, dest) = (current[j], target[a]);
                if dest.signum() != cur.signum() || dest == 0.0 {
                    let t = cur / (cur - dest);
                    if t < step {
                        step = t;
                        blocking = Some(a);
                    }
                }
            }
            for (a, &j) in support.iter().enumerate() {
                let v = current[j] + step * (target[a] - current[j]);
                current[j] = if blocking == Some(a) || v.signum() != current[j].signum() {
                    0.0
                } else {
                    v
                };
            }
            if blocking.is_none() {
                break;
            }
            support.retain(|&j| current[j] != 0.0);
        }
        self.set_beta(&current);
        if self.objective(lambda) > before + 1e-12 * before.abs().max(1.0) {
            self.set_beta(&old);
        }
    }

    /// Jump when the observed contraction predicts a long tail of sweeps that
    /// would cost more than one factorisation.
    fn tail_jump(&mut self, lambda: f64, max_change: f64, prev_change: &mut f64) {
        let rate = max_change / *prev_change;
        *prev_change = max_change;
        if !rate.is_finite() {
            return;
        }
        let remaining = if rate >= 1.0 {
            f64::INFINITY
        } else {
            (TOLERANCE / max_change).ln() / rate.ln()
        };
        let m = self.active.len() as f64;
        if remaining > NEWTON_MIN_TAIL.max(m * m / (3.0 * self.design.p() as f64)) {
            self.newton_step(lambda, true);
            *prev_change = f64::INFINITY;
        }
    }

    /// Minimise at `lambda` starting from the current coefficients.
    /// Returns the number of sweeps used.
    pub fn solve(&mut self, lambda: f64) -> Result<usize> {
        let p = self.design.p();
        let mut sweeps = 0usize;
        if self.factor.is_some() {
            self.newton_step(lambda, false);
        }
        // carried across full and active sweeps: alternating between them can
        // stall just above the tolerance
        let mut prev_change = f64::INFINITY;
        loop {
            let mut max_change = 0.0f64;
            for j in 0..p {
                max_change = max_change.max(self.update(j, lambda));
            }
            sweeps += 1;
            self.record(lambda);
            if max_change <= TOLERANCE {
                return Ok(sweeps);
            }
            if sweeps >= MAX_SWEEPS {
                return Err(Error::NonConvergence(MAX_SWEEPS));
            }
            self.tail_jump(lambda, max_change, &mut prev_change);
            loop {
                let mut max_change = 0.0f64;
                for idx in 0..self.active.len() {
                    let j = self.active[idx];
                    max_change = max_change.max(self.update(j, lambda));
                }
                sweeps += 1;
                self.record(lambda);
                if max_change <= TOLERANCE {
                    break;
                }
                if sweeps >= MAX_SWEEPS {
                    return Err(Error::NonConvergence(MAX_SWEEPS));
                }
                self.tail_jump(lambda, max_change, &mut prev_change);
            }
        }
    }
}

/// Walk a decreasing λ sequence with warm starts, handing each solution to `visit`.
/// With `early_stop`, the walk ends once the fit saturates; the number of
/// points visited is returned.
pub(crate) fn walk_path<F>(
    design: &Design,
    penalty: &Penalty,
    lambdas: &[f64],
    early_stop: bool,
    mut visit: F,
) -> Result<usize>
where
    F: FnMut(usize, &[f64]),
{
    let mut state = CdState::new(design, penalty);
    let mut prev_dev = 0.0;
    for (k, &lambda) in lambdas.iter().enumerate() {
        state.solve(lambda)?;
        visit(k, state.beta());
        if early_stop {
            let dev = state.dev_ratio();
            if k + 1 >= MIN_PATH_POINTS
                && (dev >= DEV_RATIO_MAX || dev - prev_dev < DEV_CHANGE_MIN * dev)
            {
                return Ok(k + 1);
            }
            prev_dev = dev;
        }
    }
    Ok(lambdas.len())
}
