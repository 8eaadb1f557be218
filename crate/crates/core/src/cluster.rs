//! Correlation-guided partition of the variables into an independent group
//! `G0` and correlated groups `G1..GK`, plus the random and single-group
//! variants used for ablations.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::correlation::{median, standardized_correlation};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::SeedStream;
use crate::solvers::{BaseLearner, CvConfig, SubsetFit};

pub const DEFAULT_RHO0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusteringMode {
    Correlation,
    RandomAssign,
    NoClustering,
}

impl ClusteringMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Correlation => "correlation",
            Self::RandomAssign => "random",
            Self::NoClustering => "none",
        }
    }
}

/// `groups[0]` is the independent group; every later group has at least two members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub groups: Vec<Vec<usize>>,
    pub k_count: usize,
    pub rho0: f64,
    pub mode: ClusteringMode,
}

impl Clustering {
    pub fn p(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// Check that the groups partition `0..p` and correlated groups have ≥ 2 members.
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.groups.is_empty() || self.k_count + 1 != self.groups.len() {
            return Err(Error::InvalidArgument("malformed clustering".into()));
        }
        let mut seen = vec![false; p];
        for g in &self.groups {
            for &j in g {
                if j >= p || seen[j] {
                    return Err(Error::InvalidArgument(format!(
                        "variable {j} is out of range or assigned twice"
                    )));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("clustering does not cover every variable".into()));
        }
        if self.groups[1..].iter().any(|g| g.len() < 2) {
            return Err(Error::InvalidArgument("correlated group with fewer than 2 members".into()));
        }
        Ok(())
    }
}

/// One greedy addition: `variable` joined group `group` with median |corr| `score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Addition {
    pub group: usize,
    pub variable: usize,
    pub score: f64,
    pub committed: bool,
}

/// Grow correlated groups from the seed variables `selected` (visited in ascending order).
///
/// Returns the partition and the trail of every addition, including those made
/// to groups that were later discarded for having a single member.
pub fn cluster_from_selection(
    dataset: &Dataset,
    selected: &[usize],
    rho0: f64,
) -> Result<(Clustering, Vec<Addition>)> {
    if !(rho0 > 0.0 && rho0 <= 1.0) {
        return Err(Error::InvalidArgument(format!("rho0 must lie in (0, 1], got {rho0}")));
    }
    let p = dataset.p();
    let mut seeds = selected.to_vec();
    seeds.sort_unstable();
    seeds.dedup();

    let mut remaining = vec![true; p];
    let mut grouped = vec![false; p];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut trail = Vec::new();

    for &seed in &seeds {
        if grouped[seed] {
            continue;
        }
        let mut members = vec![seed];
        let mut in_group = vec![false; p];
        in_group[seed] = true;
        // |corr| of every candidate with each current member
        let mut scores: Vec<Vec<f64>> = vec![Vec::new(); p];
        let mut newest = seed;
        let trail_start = trail.len();
        loop {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..p {
                if !remaining[r] || in_group[r] {
                    continue;
                }
                scores[r].push(standardized_correlation(dataset, r, newest).abs());
                let mut buf = scores[r].clone();
                let m = median(&mut buf);
                // strict comparison keeps the lowest index on ties
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((r, m));
                }
            }
            match best {
                Some((r, m)) if m >= rho0 => {
                    members.push(r);
                    in_group[r] = true;
                    newest = r;
                    trail.push(Addition {
                        group: groups.len() + 1,
                        variable: r,
                        score: m,
                        committed: false,
                    });
                }
                _ => break,
            }
        }
        if members.len() >= 2 {
            for &j in &members {
                remaining[j] = false;
                grouped[j] = true;
            }
            trail[trail_start..].iter_mut().for_each(|a| a.committed = true);
            members.sort_unstable();
            groups.push(members);
        }
    }

    let independent: Vec<usize> = (0..p).filter(|&j| remaining[j]).collect();
    let k_count = groups.len();
    let mut all = Vec::with_capacity(k_count + 1);
    all.push(independent);
    all.extend(groups);
    Ok((
        Clustering {
            groups: all,
            k_count,
            rho0,
            mode: ClusteringMode::Correlation,
        },
        trail,
    ))
}

/// Run the base learner on all data, then grow groups from its selected set.
///
/// The full-data fit is returned alongside so callers can reuse its λ.
pub fn correlation_cluster(
    dataset: &Dataset,
    base_learner: &BaseLearner,
    cv: &CvConfig,
    rho0: f64,
    seed: &SeedStream,
) -> Result<(Clustering, SubsetFit)> {
    let fit = base_learner.fit_all(dataset, cv, seed)?;
    let (clustering, _) = cluster_from_selection(dataset, &fit.coefficients.support(), rho0)?;
    Ok((clustering, fit))
}

/// Same number and sizes of groups as `template`, uniformly random membership.
pub fn random_cluster(template: &Clustering, seed: &SeedStream) -> Clustering {
    if template.k_count == 0 {
        return Clustering {
            mode: ClusteringMode::RandomAssign,
            ..template.clone()
        };
    }
    let mut vars: Vec<usize> = (0..template.p()).collect();
    vars.shuffle(&mut seed.rng());
    let mut groups = Vec::with_capacity(template.groups.len());
    let mut offset = 0;
    for g in &template.groups {
        let mut members = vars[offset..offset + g.len()].to_vec();
        members.sort_unstable();
        offset += g.len();
        groups.push(members);
    }
    Clustering {
        groups,
        k_count: template.k_count,
        rho0: template.rho0,
        mode: ClusteringMode::RandomAssign,
    }
}

/// Every variable in the independent group.
pub fn no_cluster(p: usize) -> Clustering {
    Clustering {
        groups: vec![(0..p).collect()],
        k_count: 0,
        rho0: DEFAULT_RHO0,
        mode: ClusteringMode::NoClustering,
    }
}
