use ndarray::{Array1, Array2};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::covariance::{CovarianceKind, CovarianceSpec};
use crate::data::{standardize, CoefficientVector, Dataset};
use crate::error::{Error, Result};
use crate::seed::SeedStream;

/// How the nonzero coefficients are laid out in each replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalPlacement {
    /// Exactly as in `beta_true`.
    Fixed,
    /// The nonzero values of `beta_true`, at fresh uniformly random positions.
    Anywhere,
    /// The k-th nonzero value at a random position inside the k-th block.
    OnePerBlock { block_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    pub n: usize,
    pub p: usize,
    /// Coefficients of the reference layout; see `placement`.
    pub beta_true: CoefficientVector,
    pub covariance: CovarianceSpec,
    /// Noise level; for SNR-controlled designs this is the population value
    /// `sqrt(βᵀVβ)/SNR`, and each draw re-solves it from the realized design.
    pub sigma: f64,
    pub snr_nominal: Option<f64>,
    pub placement: SignalPlacement,
}

pub const SCENARIO_NAMES: [&str; 12] = [
    "example1", "example2", "example3", "example4", "example5", "example6", "example7", "example8",
    "example9", "example10", "null50", "null100",
];

impl SimScenario {
    pub fn s0(&self) -> usize {
        self.beta_true.support().len()
    }

    /// SNR-controlled designs solve σ per draw.
    pub fn snr_controlled(&self) -> bool {
        self.snr_nominal.is_some()
    }

    /// Coefficients for one replicate.
    pub fn draw_beta<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let values: Vec<f64> = self.beta_true.values().iter().copied().filter(|b| *b != 0.0).collect();
        match &self.placement {
            SignalPlacement::Fixed => self.beta_true.values().to_vec(),
            SignalPlacement::Anywhere => {
                let mut beta = vec![0.0; self.p];
                for (pos, v) in index::sample(rng, self.p, values.len()).into_iter().zip(&values) {
                    beta[pos] = *v;
                }
                beta
            }
            SignalPlacement::OnePerBlock { block_size } => {
                let mut beta = vec![0.0; self.p];
                for (k, v) in values.iter().enumerate() {
                    beta[k * block_size + rng.random_range(0..*block_size)] = *v;
                }
                beta
            }
        }
    }
}

fn signals(p: usize, placed: &[(usize, f64)]) -> CoefficientVector {
    let mut beta = vec![0.0; p];
    for &(j, v) in placed {
        beta[j] = v;
    }
    CoefficientVector::new(beta)
}

fn default_n(name: &str) -> Option<usize> {
    Some(match name {
        "example1" | "example2" => 20,
        "example3" | "example4" | "example5" | "example6" => 100,
        "example7" => 200,
        "example8" => 100,
        "example9" | "example10" => 300,
        "null50" => 50,
        "null100" => 100,
        _ => return None,
    })
}

/// The named simulation design at its default sample size.
pub fn build_scenario(name: &str) -> Result<SimScenario> {
    let n = default_n(name).ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    build_scenario_with_n(name, n)
}

/// The named design with `n` rows per draw.
///
/// `example6` is the null model (`p = 300`, `β = 0`, unit noise); `null50` and
/// `null100` are the same design with the sample size fixed by the name.
pub fn build_scenario_with_n(name: &str, n: usize) -> Result<SimScenario> {
    if default_n(name).is_none() {
        return Err(Error::UnknownScenario(name.to_string()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    let three_four = [3.0, 3.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0, 4.0];
    let (p, beta, cov, sigma, snr, placement) = match name {
        "example1" | "example2" => {
            let beta = if name == "example1" {
                signals(8, &[(0, 3.0), (1, 1.5), (4, 2.0)])
            } else {
                CoefficientVector::new(vec![0.85; 8])
            };
            let cov = CovarianceSpec::new(CovarianceKind::Toeplitz { rho: 0.5 }, 8)?;
            (8, beta, cov, 3.0, None, SignalPlacement::Fixed)
        }
        "example3" => {
            let placed: Vec<_> = (0..10).map(|j| (j, if j < 5 { 3.0 } else { -2.0 })).collect();
            let cov = CovarianceSpec::new(
                CovarianceKind::PairwiseBlocks {
                    block_size: 10,
                    rho: 0.9,
                    n_blocks: 1,
                    independent_tail: 30,
                },
                40,
            )?;
            (40, signals(40, &placed), cov, 3.0, None, SignalPlacement::Fixed)
        }
        "example4" => {
            let placed: Vec<_> = three_four.iter().enumerate().map(|(k, v)| (k, *v)).collect();
            let cov = CovarianceSpec::identity(300);
            (300, signals(300, &placed), cov, 3.0, None, SignalPlacement::Anywhere)
        }
        "example5" => {
            let placed: Vec<_> = three_four.iter().enumerate().map(|(k, v)| (10 * k, *v)).collect();
            let cov = CovarianceSpec::new(
                CovarianceKind::PairwiseBlocks {
                    block_size: 10,
                    rho: 0.7,
                    n_blocks: 10,
                    independent_tail: 200,
                },
                300,
            )?;
            let placement = SignalPlacement::OnePerBlock { block_size: 10 };
            (300, signals(300, &placed), cov, 3.0, None, placement)
        }
        "example6" | "null50" | "null100" => {
            let cov = CovarianceSpec::identity(300);
            (300, CoefficientVector::zeros(300), cov, 1.0, None, SignalPlacement::Fixed)
        }
        "example7" => {
            let placed: Vec<_> = (0..20).map(|k| (k, 3.0)).collect();
            let cov = CovarianceSpec::identity(500);
            (500, signals(500, &placed), cov, 0.0, Some(1.0), SignalPlacement::Anywhere)
        }
        "example8" => {
            let placed: Vec<_> = (0..4).flat_map(|b| (0..5).map(move |k| (10 * b + k, 3.0))).collect();
            let cov = CovarianceSpec::new(
                CovarianceKind::PairwiseBlocks {
                    block_size: 10,
                    rho: 0.9,
                    n_blocks: 50,
                    independent_tail: 0,
                },
                500,
            )?;
            (500, signals(500, &placed), cov, 0.0, Some(4.0), SignalPlacement::Fixed)
        }
        "example9" => {
            let placed: Vec<_> = (0..10).flat_map(|b| [(100 * b, 3.0), (100 * b + 1, 3.0)]).collect();
            let cov = CovarianceSpec::new(
                CovarianceKind::PairwiseBlocks {
                    block_size: 100,
                    rho: 0.7,
                    n_blocks: 10,
                    independent_tail: 0,
                },
                1000,
            )?;
            (1000, signals(1000, &placed), cov, 0.0, Some(2.0), SignalPlacement::Fixed)
        }
        "example10" => {
            // a pair seven apart in the middle of each block: correlation 0.95^7
            let placed: Vec<_> = (0..10)
                .flat_map(|b| [(100 * b + 46, 3.0), (100 * b + 53, 3.0)])
                .collect();
            let cov = CovarianceSpec::new(
                CovarianceKind::BlockToeplitz {
                    block_size: 100,
                    rho: 0.95,
                    n_blocks: 10,
                },
                1000,
            )?;
            (1000, signals(1000, &placed), cov, 0.0, Some(2.0), SignalPlacement::Fixed)
        }
        _ => unreachable!(),
    };
    let n = match name {
        "null50" => 50,
        "null100" => 100,
        _ => n,
    };
    let sigma = match snr {
        Some(s) => cov.quad_form(beta.values())?.sqrt() / s,
        None => sigma,
    };
    Ok(SimScenario {
        name: name.to_string(),
        n,
        p,
        beta_true: beta,
        covariance: cov,
        sigma,
        snr_nominal: snr,
        placement,
    })
}

/// One simulated replicate.
#[derive(Debug, Clone)]
pub struct SimDraw {
    pub dataset: Dataset,
    pub raw_x: Array2<f64>,
    pub raw_y: Array1<f64>,
    pub beta_true: Vec<f64>,
    pub truth: Vec<usize>,
    pub sigma: f64,
}

impl SimDraw {
    pub fn snr(&self) -> f64 {
        snr(self.raw_x.view(), &self.beta_true, self.sigma)
    }
}

/// `sqrt(βᵀXᵀXβ / (nσ²))` for the realized design; 0 when `β = 0`.
pub fn snr(x: ndarray::ArrayView2<'_, f64>, beta: &[f64], sigma: f64) -> f64 {
    let signal = signal_power(x, beta);
    if signal == 0.0 {
        return 0.0;
    }
    (signal / (sigma * sigma)).sqrt()
}

/// `βᵀXᵀXβ / n`.
fn signal_power(x: ndarray::ArrayView2<'_, f64>, beta: &[f64]) -> f64 {
    let xb = x.dot(&ndarray::ArrayView1::from(beta));
    xb.iter().map(|v| v * v).sum::<f64>() / x.nrows() as f64
}

/// Draw `X ~ N(0, V)` row-wise, then `y = Xβ + σε`, and standardize.
pub fn sample_dataset(scenario: &SimScenario, seed: &SeedStream) -> Result<SimDraw> {
    let (n, p) = (scenario.n, scenario.p);
    let mut rng = seed.rng();
    let beta = scenario.draw_beta(&mut rng);
    let mut raw_x = Array2::<f64>::zeros((n, p));
    let mut row = vec![0.0; p];
    for i in 0..n {
        scenario.covariance.sample_row(&mut rng, &mut row);
        raw_x.row_mut(i).iter_mut().zip(&row).for_each(|(d, s)| *d = *s);
    }
    let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let sigma = match scenario.snr_nominal {
        Some(target) if scenario.snr_controlled() => signal_power(raw_x.view(), &beta).sqrt() / target,
        _ => scenario.sigma,
    };
    let xb = raw_x.dot(&ndarray::ArrayView1::from(&beta[..]));
    let raw_y = Array1::from_iter(xb.iter().zip(&noise).map(|(s, e)| s + sigma * e));
    let dataset = standardize(raw_x.view(), raw_y.view())?;
    let truth = (0..p).filter(|&j| beta[j] != 0.0).collect();
    Ok(SimDraw {
        dataset,
        raw_x,
        raw_y,
        beta_true: beta,
        truth,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds() {
        for name in SCENARIO_NAMES {
            let s = build_scenario(name).unwrap();
            assert_eq!(s.beta_true.len(), s.p);
            assert_eq!(s.covariance.p, s.p);
        }
        assert!(matches!(build_scenario("example11"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn sizes() {
        let s = build_scenario("example1").unwrap();
        assert_eq!((s.p, s.s0(), s.sigma), (8, 3, 3.0));
        assert_eq!(build_scenario("example2").unwrap().s0(), 8);
        assert_eq!(build_scenario("example3").unwrap().s0(), 10);
        assert_eq!(build_scenario("example8").unwrap().s0(), 20);
        assert_eq!(build_scenario("example9").unwrap().s0(), 20);
        assert_eq!(build_scenario("null100").unwrap().s0(), 0);
        assert_eq!(build_scenario_with_n("example3", 50).unwrap().n, 50);
    }

    #[test]
    fn example10_pair_correlation() {
        let s = build_scenario("example10").unwrap();
        let truth = s.beta_true.support();
        let r = s.covariance.entry(truth[0], truth[1]);
        assert!((r - 0.95f64.powi(7)).abs() < 1e-15);
        assert!((r - 0.698).abs() < 1e-3);
    }

    #[test]
    fn per_block_placement_stays_in_block() {
        let s = build_scenario("example5").unwrap();
        let mut rng = SeedStream::new(1).rng();
        for _ in 0..20 {
            let beta = s.draw_beta(&mut rng);
            let support: Vec<usize> = (0..300).filter(|&j| beta[j] != 0.0).collect();
            assert_eq!(support.len(), 10);
            for (k, j) in support.iter().enumerate() {
                assert_eq!(j / 10, k);
            }
        }
    }

    #[test]
    fn snr_is_exact_when_solved() {
        let s = build_scenario_with_n("example8", 60).unwrap();
        let d = sample_dataset(&s, &SeedStream::new(9)).unwrap();
        assert!((d.snr() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_draw() {
        let s = build_scenario("example4").unwrap();
        let a = sample_dataset(&s, &SeedStream::new(5)).unwrap();
        let b = sample_dataset(&s, &SeedStream::new(5)).unwrap();
        assert_eq!(a.raw_x, b.raw_x);
        assert_eq!(a.raw_y, b.raw_y);
        assert_eq!(a.truth, b.truth);
    }
}
