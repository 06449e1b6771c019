//! K-nearest-neighbor baseline classifier. Euclidean metric, majority
//! vote over the k nearest stored points; distance ties break toward the
//! lower stored index and vote ties toward the label of the single
//! nearest neighbor.

use crate::error::{Error, Result};
use crate::signal::{ClassLabel, LabeledPointSet};

/// A lazy learner: stored training points plus k.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    points: Vec<(Vec<f64>, u8)>,
    dim: usize,
}

impl KnnModel {
    pub fn points(&self) -> &[(Vec<f64>, u8)] {
        &self.points
    }
}

/// Stores the points verbatim, in input order.
pub fn knn_fit(points: &LabeledPointSet, k: usize) -> Result<KnnModel> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot fit KNN on an empty set".into()));
    }
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={}, got {k}",
            points.len()
        )));
    }
    Ok(KnnModel {
        k,
        points: points.points.clone(),
        dim: points.feature_names.len(),
    })
}

/// Majority label among the k nearest stored points.
pub fn knn_predict(model: &KnnModel, x: &[f64]) -> Result<u8> {
    if x.len() != model.dim {
        return Err(Error::InvalidArgument(format!(
            "query has {} features, model stores {}",
            x.len(),
            model.dim
        )));
    }
    let mut order: Vec<(f64, usize)> = model
        .points
        .iter()
        .enumerate()
        .map(|(i, (p, _))| {
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let mut votes = [0usize; ClassLabel::COUNT];
    for &(_, i) in &order[..model.k] {
        votes[model.points[i].1 as usize] += 1;
    }
    let top = *votes.iter().max().unwrap();
    let winners: Vec<u8> = (0..votes.len() as u8).filter(|&c| votes[c as usize] == top).collect();
    if winners.len() == 1 {
        Ok(winners[0])
    } else {
        Ok(model.points[order[0].1].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(points: Vec<(Vec<f64>, u8)>) -> LabeledPointSet {
        let dim = points[0].0.len();
        let names = (0..dim).map(|i| format!("f{i}")).collect();
        LabeledPointSet::new(names, points).unwrap()
    }

    #[test]
    fn fit_stores_points_in_order() {
        let s = set(vec![(vec![1.0], 0), (vec![2.0], 1), (vec![3.0], 2)]);
        let m = knn_fit(&s, 3).unwrap();
        assert_eq!(m.points(), &s.points[..]);
        assert!(knn_fit(&s, 0).is_err());
        assert!(knn_fit(&s, 4).is_err());
    }

    #[test]
    fn zero_distance_wins_at_k1() {
        let s = set(vec![(vec![1.0, 0.0], 0), (vec![5.0, 5.0], 3)]);
        let m = knn_fit(&s, 1).unwrap();
        assert_eq!(knn_predict(&m, &[1.0, 0.0]).unwrap(), 0);
        assert!(knn_predict(&m, &[1.0]).is_err());
    }

    #[test]
    fn two_cluster_geometry() {
        let mut points = Vec::new();
        for i in 0..10 {
            let jitter = i as f64 * 0.01;
            points.push((vec![-10.0 + jitter, 0.0], 0));
            points.push((vec![10.0 - jitter, 0.0], 1));
        }
        let m = knn_fit(&set(points), 5).unwrap();
        assert_eq!(knn_predict(&m, &[0.5, 0.0]).unwrap(), 1);
        assert_eq!(knn_predict(&m, &[-0.5, 0.0]).unwrap(), 0);
    }

    /// Brute-force oracle: independent distance scan with selection sort
    /// and a fresh vote tally.
    fn oracle(points: &[(Vec<f64>, u8)], k: usize, x: &[f64]) -> u8 {
        let mut idx: Vec<usize> = (0..points.len()).collect();
        let d2 = |i: usize| -> f64 {
            points[i].0.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum()
        };
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                let (a, b) = (idx[i], idx[j]);
                if d2(b) < d2(a) || (d2(b) == d2(a) && b < a) {
                    idx.swap(i, j);
                }
            }
        }
        let mut votes = std::collections::BTreeMap::new();
        for &i in &idx[..k] {
            *votes.entry(points[i].1).or_insert(0usize) += 1;
        }
        let top = *votes.values().max().unwrap();
        let winners: Vec<u8> = votes.iter().filter(|(_, &v)| v == top).map(|(&c, _)| c).collect();
        if winners.len() == 1 {
            winners[0]
        } else {
            points[idx[0]].1
        }
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..50 {
            let n = rng.gen_range(5..40);
            let points: Vec<(Vec<f64>, u8)> = (0..n)
                .map(|_| {
                    (
                        (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                        rng.gen_range(0..5u8),
                    )
                })
                .collect();
            let k = rng.gen_range(1..=n.min(9));
            let m = knn_fit(&set(points.clone()), k).unwrap();
            let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert_eq!(
                knn_predict(&m, &q).unwrap(),
                oracle(&points, k, &q),
                "trial {trial}"
            );
        }
    }

    proptest! {
        // k=1 is idempotent on training points
        #[test]
        fn k1_idempotent_on_training_points(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points: Vec<(Vec<f64>, u8)> = (0..20)
                .map(|_| ((0..2).map(|_| rng.gen_range(-5.0..5.0)).collect(), rng.gen_range(0..7u8)))
                .collect();
            let m = knn_fit(&set(points.clone()), 1).unwrap();
            for (p, c) in &points {
                // duplicates may shadow each other; only check unique points
                let dup = points.iter().filter(|(q, _)| q == p).count() > 1;
                if !dup {
                    prop_assert_eq!(knn_predict(&m, p).unwrap(), *c);
                }
            }
        }

        // prediction is invariant under permutation of stored points when
        // all pairwise distances to the query are distinct
        #[test]
        fn permutation_invariance(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000));
            let points: Vec<(Vec<f64>, u8)> = (0..15)
                .map(|_| ((0..2).map(|_| rng.gen_range(-5.0..5.0)).collect(), rng.gen_range(0..4u8)))
                .collect();
            let q: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let d2 = |p: &[f64]| -> f64 { p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum() };
            let mut ds: Vec<f64> = points.iter().map(|(p, _)| d2(p)).collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(ds.windows(2).all(|w| w[1] - w[0] > 1e-12));

            let base = knn_predict(&knn_fit(&set(points.clone()), 5).unwrap(), &q).unwrap();
            let mut shuffled = points;
            for i in (1..shuffled.len()).rev() {
                let j = rng.gen_range(0..=i);
                shuffled.swap(i, j);
            }
            let permuted = knn_predict(&knn_fit(&set(shuffled), 5).unwrap(), &q).unwrap();
            prop_assert_eq!(base, permuted);
        }
    }
}
