use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strands_core::ndarray::{Array1, Array2};
use strands_core::sim::{bootstrap_se, selection_metrics};
use strands_core::solvers::soft_threshold;
use strands_core::strands::draw_structured_subset;
use strands_core::{
    no_cluster, random_cluster, standardize, threshold_select, weighted_sample_without_replacement, Clustering,
    ClusteringMode, Ranking, SeedStream,
};

fn matrix(n: usize, p: usize) -> impl Strategy<Value = (Array2<f64>, Array1<f64>)> {
    (
        prop::collection::vec(-100.0f64..100.0, n * p),
        prop::collection::vec(-100.0f64..100.0, n),
    )
        .prop_map(move |(x, y)| (Array2::from_shape_vec((n, p), x).unwrap(), Array1::from(y)))
}

fn partition(p: usize, cuts: &[usize]) -> Clustering {
    let mut groups = vec![Vec::new()];
    let mut start = 0;
    for &c in cuts {
        let end = (start + c).min(p);
        if end - start >= 2 {
            groups.push((start..end).collect());
            start = end;
        }
    }
    groups[0] = (start..p).collect();
    Clustering {
        k_count: groups.len() - 1,
        groups,
        rho0: 0.5,
        mode: ClusteringMode::Correlation,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardized_columns_have_zero_mean_unit_sd((x, y) in matrix(12, 4)) {
        if let Ok(ds) = standardize(x.view(), y.view()) {
            for j in 0..4 {
                let col = ds.column(j);
                let mean = col.iter().sum::<f64>() / 12.0;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 12.0;
                prop_assert!(mean.abs() < 1e-10);
                prop_assert!((var - 1.0).abs() < 1e-10);
            }
            prop_assert!(ds.y().iter().sum::<f64>().abs() < 1e-8);
            let back = ds.destandardize_x();
            for (a, b) in back.iter().zip(x.iter()) {
                prop_assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero(z in -10.0f64..10.0, g in 0.0f64..5.0) {
        let s = soft_threshold(z, g);
        prop_assert!(s.abs() <= z.abs());
        prop_assert!(s == 0.0 || s.signum() == z.signum());
        prop_assert!((z.abs() - s.abs() - g.min(z.abs())).abs() < 1e-12);
    }

    #[test]
    fn weighted_draws_are_distinct_and_positive(
        weights in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0], 1..30),
        amount in 0usize..35,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = weighted_sample_without_replacement(&mut rng, &weights, amount);
        let positive = weights.iter().filter(|w| **w > 0.0).count();
        prop_assert_eq!(draw.len(), amount.min(positive));
        let mut sorted = draw.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), draw.len());
        prop_assert!(draw.iter().all(|&j| weights[j] > 0.0));
    }

    #[test]
    fn structured_subsets_respect_groups(
        p in 2usize..40,
        cuts in prop::collection::vec(0usize..8, 0..5),
        seed in any::<u64>(),
    ) {
        let clustering = partition(p, &cuts);
        clustering.validate(p).unwrap();
        let subset = draw_structured_subset(&clustering, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(subset.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(subset.iter().all(|&j| j < p));
    }

    #[test]
    fn random_clusters_keep_the_template_shape(
        p in 2usize..40,
        cuts in prop::collection::vec(0usize..8, 0..5),
        seed in any::<u64>(),
    ) {
        let template = partition(p, &cuts);
        let shuffled = random_cluster(&template, &SeedStream::new(seed));
        prop_assert!(shuffled.validate(p).is_ok());
        prop_assert_eq!(shuffled.group_sizes(), template.group_sizes());
        prop_assert_eq!(shuffled.k_count, template.k_count);
    }

    #[test]
    fn threshold_selection_is_consistent(
        pi in prop::collection::vec(0.0f64..=1.0, 1..25),
        thr in 0.05f64..=1.0,
        by_coefficient in any::<bool>(),
    ) {
        let beta: Vec<f64> = pi.iter().enumerate().map(|(j, v)| (v - 0.5) * (j as f64 + 1.0)).collect();
        let ranking = if by_coefficient { Ranking::ByCoefficient } else { Ranking::ByProbability };
        let (s0, selected) = threshold_select(&beta, &pi, thr, ranking).unwrap();
        prop_assert_eq!(s0, pi.iter().filter(|v| **v >= thr).count());
        prop_assert_eq!(selected.len(), s0);
        prop_assert!(selected.windows(2).all(|w| w[0] < w[1]));
        if !by_coefficient {
            prop_assert!(selected.iter().all(|&j| pi[j] >= thr));
        }
    }

    #[test]
    fn selection_counts_add_up(
        selected in prop::collection::btree_set(0usize..30, 0..30),
        truth in prop::collection::btree_set(0usize..30, 0..30),
    ) {
        let selected: Vec<usize> = selected.into_iter().collect();
        let truth: Vec<usize> = truth.into_iter().collect();
        let m = selection_metrics(&selected, &truth, 30).unwrap();
        prop_assert_eq!(m.tp + m.fp, selected.len());
        prop_assert!(m.tp <= truth.len());
        if let Some(ppv) = m.ppv {
            prop_assert!((0.0..=1.0).contains(&ppv));
        } else {
            prop_assert!(selected.is_empty());
        }
    }

    #[test]
    fn bootstrap_se_is_nonnegative_and_seeded(
        values in prop::collection::vec(-50.0f64..50.0, 2..40),
        seed in any::<u64>(),
    ) {
        let s = SeedStream::new(seed);
        let a = bootstrap_se(&values, &s).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(Some(a), bootstrap_se(&values, &s));
    }

    #[test]
    fn seed_streams_depend_only_on_the_path(master in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        use rand::RngCore;
        let s = SeedStream::new(master);
        let x = s.derive(a).derive(b).rng().next_u64();
        let y = s.derive_path(&[a, b]).rng().next_u64();
        prop_assert_eq!(x, y);
    }
}

#[test]
fn no_cluster_is_one_group() {
    let c = no_cluster(7);
    assert_eq!(c.groups, vec![(0..7).collect::<Vec<_>>()]);
    assert_eq!(c.k_count, 0);
}
