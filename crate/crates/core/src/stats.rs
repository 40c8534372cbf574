//! Monte Carlo aggregation for the length spectrum: mergeable histograms,
//! empirical factorial moments with z-scores against the model prediction,
//! a one-sample Kolmogorov–Smirnov test, and a Poisson total-count test.

use thiserror::Error;

use crate::numeric::kolmogorov_sf;
use crate::poisson::{factorial_moment_prediction, IntensityParams, IntervalSpec, ModelError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("samples must be sorted ascending")]
    Unsorted,
    #[error("histograms have different bin edges")]
    BinMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Counts of observed values in uniform bins over [lo, lo + bins * width),
/// together with how many trials contributed. Values outside the range are
/// ignored. Two accumulators with identical edges merge by summing.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramAccumulator {
    lo: f64,
    width: f64,
    counts: Vec<u64>,
    trials: u64,
}

impl Default for HistogramAccumulator {
    /// Bins of width 0.08 covering [0, 4).
    fn default() -> Self {
        Self::new(0.0, 0.08, 50)
    }
}

impl HistogramAccumulator {
    pub fn new(lo: f64, width: f64, bins: usize) -> Self {
        assert!(width > 0.0 && bins >= 1);
        Self { lo, width, counts: vec![0; bins], trials: 0 }
    }

    pub fn observe(&mut self, x: f64) {
        let idx = ((x - self.lo) / self.width).floor();
        if idx >= 0.0 && (idx as usize) < self.counts.len() {
            self.counts[idx as usize] += 1;
        }
    }

    /// Records one trial's values in a single step.
    pub fn observe_trial(&mut self, values: impl IntoIterator<Item = f64>) {
        self.trials += 1;
        for v in values {
            self.observe(v);
        }
    }

    pub fn merge(&self, other: &Self) -> Result<Self, StatsError> {
        if self.lo != other.lo || self.width != other.width || self.counts.len() != other.counts.len()
        {
            return Err(StatsError::BinMismatch);
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self { lo: self.lo, width: self.width, counts, trials: self.trials + other.trials })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn bin_width(&self) -> f64 {
        self.width
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        (self.lo + i as f64 * self.width, self.lo + (i + 1) as f64 * self.width)
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }
}

/// Count per trial per unit length in each bin, keyed by bin center.
pub fn histogram_density(h: &HistogramAccumulator) -> Vec<(f64, f64)> {
    assert!(h.trials >= 1, "density needs at least one trial");
    let norm = h.trials as f64 * h.width;
    h.counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (h.lo + (i as f64 + 0.5) * h.width, c as f64 / norm))
        .collect()
}

/// x (x-1) ... (x-r+1); equals 1 for r = 0 and 0 for r > x.
pub fn falling_factorial(x: u64, r: u32) -> u64 {
    if u64::from(r) > x {
        return 0;
    }
    (0..u64::from(r)).map(|i| x - i).product()
}

/// Empirical joint factorial moment of interval counts across trials,
/// compared against the model prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub specs: Vec<IntervalSpec<f64>>,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    pub z: f64,
}

/// Sample mean and standard error of prod_i (n_i)_{r_i} over trials, with a
/// z-score against the predicted product of interval means.
pub fn empirical_factorial_moment(
    samples: &[Vec<u64>],
    specs: &[IntervalSpec<f64>],
    params: &IntensityParams<f64>,
) -> Result<MomentReport, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::InsufficientSamples { needed: 2, got: samples.len() });
    }
    let predicted = factorial_moment_prediction(specs, params)?;
    let t = samples.len() as f64;
    let values: Vec<f64> = samples
        .iter()
        .map(|counts| {
            assert_eq!(counts.len(), specs.len(), "count vector must match specs");
            counts
                .iter()
                .zip(specs)
                .map(|(&n, s)| falling_factorial(n, s.r) as f64)
                .product()
        })
        .collect();
    let empirical = values.iter().sum::<f64>() / t;
    let variance = values.iter().map(|v| (v - empirical).powi(2)).sum::<f64>() / t;
    let se = (variance / t).sqrt();
    let z = if se > 0.0 {
        (empirical - predicted) / se
    } else if empirical == predicted {
        0.0
    } else {
        f64::INFINITY * (empirical - predicted).signum()
    };
    Ok(MomentReport { specs: specs.to_vec(), empirical, se, predicted, z })
}

/// One-sample Kolmogorov–Smirnov test of sorted samples against a CDF.
/// Returns (statistic, asymptotic p-value).
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64), StatsError> {
    if samples.len() < 10 {
        return Err(StatsError::InsufficientSamples { needed: 10, got: samples.len() });
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(StatsError::Unsorted);
    }
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok((d, kolmogorov_sf(n.sqrt() * d)))
}

/// z-score of an observed total count against a Poisson total mean.
pub fn poisson_count_test(total_count: u64, total_mean: f64) -> f64 {
    assert!(total_mean > 0.0);
    (total_count as f64 - total_mean) / total_mean.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
        ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5, 2), 20);
        assert_eq!(falling_factorial(3, 0), 1);
        assert_eq!(falling_factorial(2, 3), 0);
        assert_eq!(falling_factorial(7, 7), 5040);
    }

    #[test]
    fn histogram_density_examples() {
        let mut h = HistogramAccumulator::default();
        for t in 0..100 {
            if t < 8 {
                h.observe_trial([0.01]);
            } else {
                h.observe_trial([]);
            }
        }
        let d = histogram_density(&h);
        assert_eq!(d.len(), 50);
        assert_relative_eq!(d[0].0, 0.04);
        assert_relative_eq!(d[0].1, 1.0, max_relative = 1e-12);
        assert!(d[1..].iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn histogram_ignores_out_of_range() {
        let mut h = HistogramAccumulator::default();
        h.observe_trial([-0.5, 4.0, 100.0, 3.999, 0.0]);
        assert_eq!(h.counts().iter().sum::<u64>(), 2);
        assert_eq!(h.counts()[0], 1);
        assert_eq!(h.counts()[49], 1);
    }

    #[test]
    fn histogram_merge_is_commutative_associative_and_density_averages() {
        let mut a = HistogramAccumulator::new(0.0, 0.5, 4);
        let mut b = HistogramAccumulator::new(0.0, 0.5, 4);
        let mut c = HistogramAccumulator::new(0.0, 0.5, 4);
        a.observe_trial([0.1, 0.6]);
        b.observe_trial([1.2]);
        b.observe_trial([1.9, 0.2]);
        c.observe_trial([0.9]);

        let ab_c = a.merge(&b).unwrap().merge(&c).unwrap();
        let a_bc = a.merge(&b.merge(&c).unwrap()).unwrap();
        let ba_c = b.merge(&a).unwrap().merge(&c).unwrap();
        assert_eq!(ab_c, a_bc);
        assert_eq!(ab_c, ba_c);
        assert_eq!(ab_c.trials(), 4);

        let merged_density = histogram_density(&ab_c);
        let (da, db, dc) =
            (histogram_density(&a), histogram_density(&b), histogram_density(&c));
        for i in 0..4 {
            let weighted =
                (1.0 * da[i].1 + 2.0 * db[i].1 + 1.0 * dc[i].1) / 4.0;
            assert_relative_eq!(merged_density[i].1, weighted, max_relative = 1e-12);
        }

        let other = HistogramAccumulator::new(0.0, 0.25, 4);
        assert_eq!(a.merge(&other).unwrap_err(), StatsError::BinMismatch);
    }

    #[test]
    fn moment_constant_counts_has_zero_se() {
        let params = IntensityParams::new(1.0);
        let specs = [IntervalSpec::new(0.0, 1.0, 2).unwrap()];
        let samples = vec![vec![2u64]; 50];
        let rep = empirical_factorial_moment(&samples, &specs, &params).unwrap();
        assert_eq!(rep.empirical, 2.0);
        assert_eq!(rep.se, 0.0);
        assert!(rep.z.is_infinite());
    }

    #[test]
    fn moment_alternating_counts_matches_direct_formula() {
        let params = IntensityParams::new(1.0);
        let specs = [IntervalSpec::new(0.0, 1.0, 1).unwrap()];
        let t = 64usize;
        let samples: Vec<Vec<u64>> =
            (0..t).map(|i| vec![if i % 2 == 0 { 0 } else { 2 }]).collect();
        let rep = empirical_factorial_moment(&samples, &specs, &params).unwrap();
        assert_eq!(rep.empirical, 1.0);
        assert_relative_eq!(rep.se, 1.0 / (t as f64).sqrt(), max_relative = 1e-12);
        assert!(rep.z.is_finite());
    }

    #[test]
    fn moment_with_r_one_is_the_plain_mean() {
        let params = IntensityParams::new(1.0);
        let specs = [IntervalSpec::new(0.0, 2.0, 1).unwrap()];
        let samples = vec![vec![3u64], vec![0], vec![1], vec![5], vec![1]];
        let rep = empirical_factorial_moment(&samples, &specs, &params).unwrap();
        assert_eq!(rep.empirical, 2.0);
    }

    #[test]
    fn moment_requires_two_samples() {
        let params = IntensityParams::new(1.0);
        let specs = [IntervalSpec::new(0.0, 1.0, 1).unwrap()];
        let err = empirical_factorial_moment(&[vec![1]], &specs, &params).unwrap_err();
        assert_eq!(err, StatsError::InsufficientSamples { needed: 2, got: 1 });
    }

    fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
        let u = uniform01(rng);
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cum = p;
        while u > cum && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cum += p;
        }
        k
    }

    #[test]
    fn synthetic_poisson_counts_match_predictions() {
        let params = IntensityParams::new(1.0);
        let a = IntervalSpec::new(0.0, 1.0, 1).unwrap();
        let b = IntervalSpec::new(1.0, 2.0, 1).unwrap();
        let mean_a = crate::poisson::expected_count(0.0, 1.0, &params);
        let mean_b = crate::poisson::expected_count(1.0, 2.0, &params);
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<Vec<u64>> = (0..4000)
                .map(|_| vec![poisson_draw(&mut rng, mean_a), poisson_draw(&mut rng, mean_b)])
                .collect();
            for specs in [
                vec![a, b],
                vec![IntervalSpec::new(0.0, 1.0, 2).unwrap(), b],
                vec![IntervalSpec::new(0.0, 1.0, 3).unwrap()],
                vec![a, IntervalSpec::new(1.0, 2.0, 2).unwrap()],
            ] {
                let columns = specs.len();
                let trimmed: Vec<Vec<u64>> =
                    samples.iter().map(|s| s[..columns].to_vec()).collect();
                let rep = empirical_factorial_moment(&trimmed, &specs, &params).unwrap();
                assert!(rep.z.abs() < 4.0, "seed {seed}: z = {} for {specs:?}", rep.z);
            }
        }
    }

    #[test]
    fn ks_accepts_its_own_cdf_and_rejects_shifts() {
        let cdf = |x: f64| 1.0 - (-x).exp();
        for seed in [1u64, 2, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut samples: Vec<f64> =
                (0..300).map(|_| -(1.0 - uniform01(&mut rng)).ln()).collect();
            samples.sort_by(f64::total_cmp);
            let (_, p) = ks_test(&samples, cdf).unwrap();
            assert!(p > 0.001, "seed {seed}: p = {p}");

            let shifted: Vec<f64> = samples.iter().map(|x| x + 2.0).collect();
            let (_, p_shift) = ks_test(&shifted, cdf).unwrap();
            assert!(p_shift < 0.001, "seed {seed}: p = {p_shift}");
        }
    }

    #[test]
    fn ks_statistic_at_the_median_is_half() {
        let median = std::f64::consts::LN_2;
        let samples = vec![median; 12];
        let (d, _) = ks_test(&samples, |x| 1.0 - (-x).exp()).unwrap();
        assert_relative_eq!(d, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn ks_input_validation() {
        let cdf = |x: f64| x;
        assert_eq!(
            ks_test(&[0.5; 5], cdf).unwrap_err(),
            StatsError::InsufficientSamples { needed: 10, got: 5 }
        );
        let mut bad = vec![0.5; 10];
        bad[3] = 0.1;
        assert_eq!(ks_test(&bad, cdf).unwrap_err(), StatsError::Unsorted);
    }

    #[test]
    fn poisson_count_test_examples() {
        assert_eq!(poisson_count_test(100, 100.0), 0.0);
        assert_relative_eq!(poisson_count_test(110, 100.0), 1.0, max_relative = 1e-12);
        assert!(poisson_count_test(80, 100.0) < 0.0);
    }
}
