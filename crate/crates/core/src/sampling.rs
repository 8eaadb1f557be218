use rand::Rng;

/// Draw `amount` distinct indices, each draw proportional to the weights of the
/// indices not yet drawn. Indices with zero weight are never drawn, so fewer
/// than `amount` indices come back when too few weights are positive.
///
/// The result is sorted ascending.
pub fn weighted_sample_without_replacement<R: Rng + ?Sized>(
    rng: &mut R,
    weights: &[f64],
    amount: usize,
) -> Vec<usize> {
    let mut pool: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0 && w.is_finite())
        .map(|(j, w)| (j, *w))
        .collect();
    let mut out = Vec::with_capacity(amount.min(pool.len()));
    if amount >= pool.len() {
        out.extend(pool.iter().map(|(j, _)| *j));
        return out;
    }
    let mut total: f64 = pool.iter().map(|(_, w)| w).sum();
    for _ in 0..amount {
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = pool.len() - 1;
        for (pos, (_, w)) in pool.iter().enumerate() {
            acc += w;
            if target < acc {
                pick = pos;
                break;
            }
        }
        let (j, w) = pool.swap_remove(pick);
        out.push(j);
        total -= w;
        if total <= 0.0 {
            // rounding left the remaining mass at zero
            total = pool.iter().map(|(_, w)| w).sum();
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedStream;

    #[test]
    fn zero_weights_never_drawn() {
        let mut rng = SeedStream::new(3).rng();
        let w = [0.0, 1.0, 0.0, 2.0, 5.0, 0.0];
        for _ in 0..500 {
            let s = weighted_sample_without_replacement(&mut rng, &w, 2);
            assert_eq!(s.len(), 2);
            assert!(s.iter().all(|j| w[*j] > 0.0));
        }
    }

    #[test]
    fn too_few_positive_returns_all_positive() {
        let mut rng = SeedStream::new(4).rng();
        let s = weighted_sample_without_replacement(&mut rng, &[0.0, 3.0, 1.0, 0.0], 3);
        assert_eq!(s, vec![1, 2]);
    }

    #[test]
    fn single_draw_frequencies_follow_weights() {
        let mut rng = SeedStream::new(5).rng();
        let w = [1.0, 3.0];
        let trials = 20_000;
        let ones = (0..trials)
            .filter(|_| weighted_sample_without_replacement(&mut rng, &w, 1) == vec![1])
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.75).abs() < 0.015, "freq {freq}");
    }

    #[test]
    fn two_draws_match_successive_sampling() {
        // P(first two draws are {0,1}) with weights (1,2,3):
        // 1/6*2/5 + 2/6*1/4 = 1/15 + 1/12 = 0.15
        let mut rng = SeedStream::new(6).rng();
        let w = [1.0, 2.0, 3.0];
        let trials = 40_000;
        let hits = (0..trials)
            .filter(|_| weighted_sample_without_replacement(&mut rng, &w, 2) == vec![0, 1])
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.15).abs() < 0.01, "freq {freq}");
    }
}
