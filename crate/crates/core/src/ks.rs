//! Kolmogorov-Smirnov distances between empirical and reference CDFs.

use crate::error::{Error, Result};

/// Sup-norm distance between the empirical CDF of `samples` and `cdf`.
/// Samples need not be pre-sorted.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Usage("ks_distance requires at least one sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        sup = sup.max((f - lo).abs()).max((hi - f).abs());
    }
    Ok(sup)
}

/// KS distance for a weighted sample (self-normalized weights), used by the
/// importance-sampling validators. Reduces to `ks_distance` when all weights
/// are equal.
pub fn ks_distance_weighted<F: Fn(f64) -> f64>(
    samples: &[f64],
    weights: &[f64],
    cdf: F,
) -> Result<f64> {
    if samples.is_empty() || samples.len() != weights.len() {
        return Err(Error::Usage(
            "weighted ks_distance requires equal, non-empty samples and weights".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Usage("weights must have positive sum".into()));
    }
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_unstable_by(|&i, &j| samples[i].partial_cmp(&samples[j]).unwrap());
    let mut cum = 0.0;
    let mut sup: f64 = 0.0;
    for &i in &idx {
        let f = cdf(samples[i]);
        sup = sup.max((f - cum / total).abs());
        cum += weights[i];
        sup = sup.max((cum / total - f).abs());
    }
    Ok(sup)
}

/// Effective sample size of a set of importance weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Seed, Stream};

    #[test]
    fn single_point_vs_uniform() {
        let d = ks_distance(&[0.5], |x| x).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn centered_grid_vs_uniform() {
        let n = 100;
        let xs: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let d = ks_distance(&xs, |x| x).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn uniform_draws_below_critical_value() {
        // KS critical value at the 1% level is about 1.63/sqrt(n).
        let mut s = Stream::new(Seed(11));
        let xs: Vec<f64> = (0..100_000).map(|_| s.uniform()).collect();
        let d = ks_distance(&xs, |x| x).unwrap();
        assert!(d < 0.006, "d = {d}");
    }

    #[test]
    fn empty_is_usage_error() {
        assert!(ks_distance(&[], |x| x).is_err());
    }

    #[test]
    fn weighted_matches_unweighted_for_equal_weights() {
        let mut s = Stream::new(Seed(5));
        let xs: Vec<f64> = (0..1000).map(|_| s.uniform()).collect();
        let ws = vec![2.5; xs.len()];
        let a = ks_distance(&xs, |x| x).unwrap();
        let b = ks_distance_weighted(&xs, &ws, |x| x).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
