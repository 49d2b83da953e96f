//! Aggregation over repetitions and significance against a baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_BOOTSTRAP_ITERATIONS: usize = 1000;
pub const DEFAULT_BOOTSTRAP_ITERATIONS: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no values to aggregate")]
    Empty,
    #[error("bootstrap needs at least {MIN_BOOTSTRAP_ITERATIONS} iterations, got {0}")]
    TooFewIterations(usize),
    #[error("paired samples differ in shape: {0}")]
    Mismatch(String),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

/// One metric of one condition: a value per repetition, plus per-unit
/// (document) scores per repetition for pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionScores {
    pub condition: String,
    pub values: Vec<f64>,
    pub units: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for one value).
pub fn aggregate(values: &[f64]) -> Result<Summary, StatsError> {
    let n = values.len();
    if n == 0 {
        return Err(StatsError::Empty);
    }
    // summation rounding would otherwise leave a tiny sd for constant input
    if values.iter().all(|v| *v == values[0]) {
        return Ok(Summary { mean: values[0], sd: 0.0, n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n == 1 { 0.0 } else { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() };
    Ok(Summary { mean, sd, n })
}

fn unit_means(reps: &[Vec<f64>], side: &str) -> Result<Vec<f64>, StatsError> {
    let first = reps.first().ok_or_else(|| StatsError::Mismatch(format!("{side} has no repetitions")))?;
    if reps.iter().any(|r| r.len() != first.len()) {
        return Err(StatsError::Mismatch(format!("{side} repetitions cover different numbers of documents")));
    }
    Ok((0..first.len())
        .map(|u| {
            let v = reps[0][u];
            if reps.iter().all(|r| r[u] == v) {
                v
            } else {
                reps.iter().map(|r| r[u]).sum::<f64>() / reps.len() as f64
            }
        })
        .collect())
}

/// Differences smaller than this are rounding noise for scores in [0, 1].
pub const NUMERIC_TOLERANCE: f64 = 1e-12;

/// Two-sided paired bootstrap over units.
///
/// Inputs are indexed `[repetition][unit]`; each side is first averaged over
/// its repetitions, then units are resampled with replacement. The p-value
/// is twice the share of resampled mean differences that are zero or of the
/// opposite sign to the observed one, capped at 1. An observed difference of
/// zero (up to [`NUMERIC_TOLERANCE`]) gives p = 1. Iteration `i` draws from its own ChaCha stream,
/// so the result does not depend on the thread count.
pub fn paired_bootstrap_test(baseline: &[Vec<f64>], condition: &[Vec<f64>], iterations: usize, seed: u64) -> Result<f64, StatsError> {
    if iterations < MIN_BOOTSTRAP_ITERATIONS {
        return Err(StatsError::TooFewIterations(iterations));
    }
    let b = unit_means(baseline, "baseline")?;
    let c = unit_means(condition, "condition")?;
    if b.len() != c.len() {
        return Err(StatsError::Mismatch(format!("baseline has {} documents, condition {}", b.len(), c.len())));
    }
    if b.is_empty() {
        return Err(StatsError::Mismatch("no documents".into()));
    }
    let d: Vec<f64> = c.iter().zip(&b).map(|(c, b)| c - b).map(|x| if x.abs() < NUMERIC_TOLERANCE { 0.0 } else { x }).collect();
    let n = d.len();
    let observed = d.iter().sum::<f64>() / n as f64;
    if observed.abs() < NUMERIC_TOLERANCE {
        return Ok(1.0);
    }
    let opposing: usize = (0..iterations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mean = (0..n).map(|_| d[rng.random_range(0..n)]).sum::<f64>() / n as f64;
            usize::from(mean * observed.signum() <= 0.0)
        })
        .sum();
    Ok((2.0 * opposing as f64 / iterations as f64).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub p_value: f64,
    pub significant: bool,
    pub m: usize,
    pub alpha: f64,
}

/// Flags `p < alpha / m` with `m` the number of p-values.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<SignificanceResult>, StatsError> {
    bonferroni_with_m(p_values, alpha, p_values.len())
}

/// As [`bonferroni`] with an explicit comparison count.
pub fn bonferroni_with_m(p_values: &[f64], alpha: f64, m: usize) -> Result<Vec<SignificanceResult>, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let m = m.max(1);
    Ok(p_values.iter().map(|&p_value| SignificanceResult { p_value, significant: p_value < alpha / m as f64, m, alpha }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[0.8]).unwrap(), Summary { mean: 0.8, sd: 0.0, n: 1 });
        let s = aggregate(&[0.7, 0.9]).unwrap();
        assert!((s.mean - 0.8).abs() < 1e-12);
        assert!((s.sd - 0.02f64.sqrt()).abs() < 1e-12);
        assert_eq!(aggregate(&[0.42; 20]).unwrap().sd, 0.0);
        assert_eq!(aggregate(&[]), Err(StatsError::Empty));
    }

    #[test]
    fn identical_samples_give_one() {
        let x = vec![vec![0.1, 0.5, 0.9, 0.3]];
        assert_eq!(paired_bootstrap_test(&x, &x, 1000, 7).unwrap(), 1.0);
    }

    #[test]
    fn large_shift_gives_tiny_p() {
        let b = vec![(0..30).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>()];
        let c = vec![b[0].iter().map(|v| v + 100.0).collect()];
        let p = paired_bootstrap_test(&b, &c, 2000, 1).unwrap();
        assert!(p <= 2.0 / 2000.0, "{p}");
    }

    #[test]
    fn input_errors() {
        let b = vec![vec![0.1, 0.2]];
        let c = vec![vec![0.1, 0.2, 0.3]];
        assert!(matches!(paired_bootstrap_test(&b, &c, 1000, 0), Err(StatsError::Mismatch(_))));
        assert!(matches!(paired_bootstrap_test(&b, &b, 999, 0), Err(StatsError::TooFewIterations(999))));
        let ragged = vec![vec![0.1, 0.2], vec![0.3]];
        assert!(paired_bootstrap_test(&ragged, &ragged, 1000, 0).is_err());
    }

    #[test]
    fn averaging_noise_is_not_a_difference() {
        let b = vec![vec![0.1, 0.7, 1.0 / 3.0]];
        let c = vec![b[0].clone(); 20];
        assert_eq!(paired_bootstrap_test(&b, &c, 1000, 5).unwrap(), 1.0);
        let c = vec![vec![0.1 + 0.2 - 0.2, 0.7, 1.0 / 3.0]];
        assert_eq!(paired_bootstrap_test(&b, &c, 1000, 5).unwrap(), 1.0);
    }

    #[test]
    fn repetitions_are_averaged_per_unit() {
        let b = vec![vec![0.5, 0.5, 0.5]];
        let c = vec![vec![0.4, 0.6, 0.5], vec![0.6, 0.4, 0.5]];
        assert_eq!(paired_bootstrap_test(&b, &c, 1000, 3).unwrap(), 1.0);
    }

    #[test]
    fn bonferroni_examples() {
        let r = bonferroni(&[0.01], 0.05).unwrap();
        assert!(r[0].significant);
        let r = bonferroni(&[0.01, 0.04], 0.05).unwrap();
        assert_eq!(r.iter().map(|x| x.significant).collect::<Vec<_>>(), vec![true, false]);
        assert_eq!(r[0].m, 2);
        assert!(bonferroni(&[], 0.05).unwrap().is_empty());
        assert!(bonferroni(&[0.5], 1.5).is_err());
        assert!(!bonferroni_with_m(&[0.01], 0.05, 13).unwrap()[0].significant);
    }

    fn scores() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..25).prop_flat_map(|n| (prop::collection::vec(0.0f64..1.0, n), prop::collection::vec(0.0f64..1.0, n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn swapping_sides_keeps_p((b, c) in scores(), seed in any::<u64>()) {
            let p1 = paired_bootstrap_test(std::slice::from_ref(&b), std::slice::from_ref(&c), 1000, seed).unwrap();
            let p2 = paired_bootstrap_test(&[c], &[b], 1000, seed).unwrap();
            prop_assert_eq!(p1, p2);
        }

        #[test]
        fn widening_the_gap_never_raises_p((b, c) in scores(), seed in any::<u64>(), shift in 0.0f64..0.5) {
            let mean_d: f64 = c.iter().zip(&b).map(|(c, b)| c - b).sum::<f64>();
            prop_assume!(mean_d.abs() > 1e-9);
            let dir = mean_d.signum();
            let wider: Vec<f64> = c.iter().map(|v| v + dir * shift).collect();
            let p1 = paired_bootstrap_test(std::slice::from_ref(&b), &[c], 1000, seed).unwrap();
            let p2 = paired_bootstrap_test(&[b], &[wider], 1000, seed).unwrap();
            prop_assert!(p2 <= p1, "{} > {}", p2, p1);
        }

        #[test]
        fn reproducible((b, c) in scores(), seed in any::<u64>()) {
            prop_assert_eq!(
                paired_bootstrap_test(std::slice::from_ref(&b), std::slice::from_ref(&c), 1000, seed).unwrap().to_bits(),
                paired_bootstrap_test(&[b], &[c], 1000, seed).unwrap().to_bits()
            );
        }

        #[test]
        fn bonferroni_threshold(ps in prop::collection::vec(0.0f64..=1.0, 0..20), alpha in 0.001f64..0.5) {
            let r = bonferroni(&ps, alpha).unwrap();
            for (p, s) in ps.iter().zip(&r) {
                prop_assert_eq!(s.significant, *p < alpha / ps.len() as f64);
                prop_assert!((0.0..=1.0).contains(&s.p_value));
            }
        }
    }
}
