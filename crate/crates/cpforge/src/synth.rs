//! Synthetic data generators used by the examples and the verification
//! suites: anchored/derived dependent features, the two-spiral domain, and
//! the three-variable confounded chain.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::Result;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Two anchor features drive the label; two shuffle features are strong
/// nonlinear functions of the anchors but carry almost no class signal of
/// their own. Kernel tests see heavy anchor/shuffle dependence, yet a
/// within-class reshuffle can dissolve it.
pub fn dependent_features(m: usize, noise: f64, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let a0 = normal(&mut rng);
        let a1 = normal(&mut rng);
        let s0 = a0 * a1 + noise * normal(&mut rng);
        let s1 = a0 * a0 - a1 * a1 + noise * normal(&mut rng);
        rows.push(vec![a0, a1, s0, s1]);
        labels.push(if a0 + a1 > 0.0 { 1 } else { -1 });
    }
    balance_labels(&mut labels);
    Dataset::from_rows(rows, labels, names(&["a0", "a1", "s0", "s1"]))
}

/// Two interleaved spirals with Gaussian jitter; positives on one arm,
/// negatives on the arm rotated by pi.
pub fn two_spirals(m: usize, noise: f64, turns: f64, seed: u64) -> Result<Dataset> {
    let (rows, labels) = spiral_arms(m, noise, turns, 0.25, seed);
    Dataset::from_rows(rows, labels, names(&["x", "y"]))
}

/// The spiral domain with a constant zero third coordinate. With `z` as the
/// anchor, a crossover may mix both visible coordinates; class-uniform
/// mixing then collapses each class onto its mean point.
pub fn two_spirals_3d(m: usize, noise: f64, turns: f64, inner: f64, seed: u64) -> Result<Dataset> {
    let (rows, labels) = spiral_arms(m, noise, turns, inner, seed);
    let rows3 = rows.into_iter().map(|mut r| {
        r.push(0.0);
        r
    });
    Dataset::from_rows(rows3.collect(), labels, names(&["x", "y", "z"]))
}

fn spiral_arms(m: usize, noise: f64, turns: f64, inner: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let positive = i % 2 == 0;
        let phase = if positive { 0.0 } else { std::f64::consts::PI };
        let t: f64 = rng.random_range(inner..1.0);
        let ang = 2.0 * std::f64::consts::PI * turns * t + phase;
        let x = t * ang.cos() + noise * normal(&mut rng);
        let y = t * ang.sin() + noise * normal(&mut rng);
        rows.push(vec![x, y]);
        labels.push(if positive { 1 } else { -1 });
    }
    (rows, labels)
}

/// Confounded chain `x1 -> x2 -> x3` with a latent common cause of `x2` and
/// `x3`: conditioning on `x2` leaves a strong positive partial correlation
/// between `x1` and `x3`. Labels are symmetric coin flips, so class means
/// carry no signal.
pub fn confounded_chain(m: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let x1 = normal(&mut rng);
        let u = normal(&mut rng);
        let x2 = 0.7 * x1 + 0.6 * u + 0.4 * normal(&mut rng);
        let x3 = 0.6 * x2 - 0.8 * u + 0.3 * normal(&mut rng);
        rows.push(vec![x1, x2, x3]);
        labels.push(if i % 2 == 0 { 1 } else { -1 });
    }
    Dataset::from_rows(rows, labels, names(&["x1", "x2", "x3"]))
}

/// Splits off the last `holdout` rows of each class as a test set; both
/// halves keep the class-sorted invariant.
pub fn train_test_split(ds: &Dataset, holdout_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_mask = vec![false; ds.m()];
    for positive in [true, false] {
        let mut idx: Vec<usize> = ds.class_range(positive).collect();
        // Fisher-Yates, then mark the prefix
        for i in (1..idx.len()).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        let k = ((idx.len() as f64) * holdout_fraction).round() as usize;
        let k = k.clamp(1, idx.len().saturating_sub(1).max(1));
        for &i in idx.iter().take(k) {
            test_mask[i] = true;
        }
    }
    let train_idx: Vec<usize> = (0..ds.m()).filter(|&i| !test_mask[i]).collect();
    let test_idx: Vec<usize> = (0..ds.m()).filter(|&i| test_mask[i]).collect();
    Ok((ds.subset(&train_idx)?, ds.subset(&test_idx)?))
}

fn names(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

fn balance_labels(labels: &mut [i8]) {
    // guarantee both classes occur even on degenerate draws
    if labels.iter().all(|&y| y == 1) {
        labels[0] = -1;
    }
    if labels.iter().all(|&y| y == -1) {
        labels[0] = 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_per_seed() {
        let a = dependent_features(50, 0.1, 7).unwrap();
        let b = dependent_features(50, 0.1, 7).unwrap();
        assert_eq!(a.observations(), b.observations());
        let c = dependent_features(50, 0.1, 8).unwrap();
        assert_ne!(a.observations(), c.observations());
    }

    #[test]
    fn spirals_have_both_classes_and_right_size() {
        let ds = two_spirals(101, 0.1, 1.0, 3).unwrap();
        assert_eq!(ds.m(), 101);
        assert!(ds.m_pos() > 0 && ds.m_neg() > 0);
    }

    #[test]
    fn split_respects_fraction_and_classes() {
        let ds = two_spirals(100, 0.1, 1.0, 5).unwrap();
        let (train, test) = train_test_split(&ds, 0.2, 1).unwrap();
        assert_eq!(train.m() + test.m(), 100);
        assert!((test.m() as f64 - 20.0).abs() <= 2.0);
        assert!(train.m_pos() > 0 && train.m_neg() > 0);
        assert!(test.m_pos() > 0 && test.m_neg() > 0);
    }
}
