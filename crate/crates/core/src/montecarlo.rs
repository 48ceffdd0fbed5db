//! Seeded uniform sampling of `S_n` and the empirical distribution of `s_n`.
//!
//! Draw `i` of a run with seed `s` uses ChaCha8 keyed by `s` on stream `i`, so
//! every draw is reproducible on its own and the split of draws across worker
//! threads cannot change any result.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::thread;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{normal_cdf, normalization};
use crate::enumerate::default_workers;
use crate::error::{LabError, Result};
use crate::fmt17;
use crate::perm::{s_stat_streaming, Permutation};

/// Largest `n * samples` accepted by [`run_simulation`].
pub const DEFAULT_OP_BUDGET: u128 = 20_000_000_000;
/// Largest `n` accepted by [`empirical_pmf`].
pub const PMF_MAX_N: usize = 12;

const QUANTILE_PROBS: [f64; 11] = [
    0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimulationConfig {
    fn validate(&self, budget: u128) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::invalid("n must be at least 1"));
        }
        if self.samples == 0 {
            return Err(LabError::invalid("samples must be at least 1"));
        }
        if self.workers == 0 {
            return Err(LabError::invalid("workers must be at least 1"));
        }
        let ops = self.n as u128 * self.samples as u128;
        if ops > budget {
            return Err(LabError::ResourceLimit(format!(
                "n * samples = {ops} exceeds the operation budget {budget}"
            )));
        }
        Ok(())
    }
}

/// Generator for draw `index` of a run seeded with `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn shuffle_identity<R: Rng + ?Sized>(buf: &mut [usize], rng: &mut R) {
    for (i, v) in buf.iter_mut().enumerate() {
        *v = i + 1;
    }
    buf.shuffle(rng);
}

/// Uniform permutation of size `n` by Fisher–Yates shuffle of the identity.
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Permutation> {
    if n == 0 {
        return Err(LabError::invalid("n must be at least 1"));
    }
    let mut buf = vec![0; n];
    shuffle_identity(&mut buf, rng);
    Ok(Permutation::from_image_unchecked(buf))
}

/// Draw `index` of the run seeded with `seed`.
pub fn sample_permutation_at(n: usize, seed: u64, index: u64) -> Result<Permutation> {
    sample_permutation(n, &mut draw_rng(seed, index))
}

fn block_histogram(n: usize, seed: u64, draws: std::ops::Range<u64>) -> Vec<u64> {
    let mut hist = vec![0u64; n + 1];
    let mut buf = vec![0usize; n];
    let mut visited = vec![false; n + 1];
    for index in draws {
        shuffle_identity(&mut buf, &mut draw_rng(seed, index));
        visited.fill(false);
        hist[s_stat_streaming(&buf, &mut visited)] += 1;
    }
    hist
}

/// Histogram of `s_n` over draws `0..samples`, indexed by `s`.
fn sample_histogram(n: usize, samples: u64, seed: u64, workers: usize) -> Vec<u64> {
    let workers = (workers as u64).clamp(1, samples) as usize;
    let bounds: Vec<u64> = (0..=workers as u64)
        .map(|w| (samples as u128 * w as u128 / workers as u128) as u64)
        .collect();
    let parts: Vec<Vec<u64>> = thread::scope(|scope| {
        let handles: Vec<_> = bounds
            .windows(2)
            .map(|b| {
                let range = b[0]..b[1];
                scope.spawn(move || block_histogram(n, seed, range))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    });
    let mut hist = vec![0u64; n + 1];
    for part in parts {
        for (h, c) in hist.iter_mut().zip(part) {
            *h += c;
        }
    }
    hist
}

/// Kolmogorov–Smirnov distance between the empirical distribution of a sorted
/// sample and the standard normal.
pub fn ks_statistic(sorted_normalized: &[f64]) -> Result<f64> {
    if sorted_normalized.is_empty() {
        return Err(LabError::invalid("KS statistic needs at least one value"));
    }
    if sorted_normalized.iter().any(|x| x.is_nan()) {
        return Err(LabError::invalid("KS input contains NaN"));
    }
    if let Some(i) = sorted_normalized.windows(2).position(|w| w[0] > w[1]) {
        return Err(LabError::invalid(format!("KS input is not sorted at index {}", i + 1)));
    }
    let m = sorted_normalized.len() as f64;
    Ok(sorted_normalized
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi = normal_cdf(x);
            ((i + 1) as f64 / m - phi).abs().max((i as f64 / m - phi).abs())
        })
        .fold(0.0, f64::max))
}

/// KS distance for a sample given as `(value, multiplicity)` pairs in
/// increasing value order. Equal to [`ks_statistic`] on the expanded sample.
pub fn ks_from_counts(points: &[(f64, u64)]) -> f64 {
    let m: u64 = points.iter().map(|p| p.1).sum();
    let mut below = 0u64;
    let mut d = 0.0f64;
    for &(x, c) in points {
        let phi = normal_cdf(x);
        let lo = below as f64 / m as f64;
        below += c;
        let hi = below as f64 / m as f64;
        d = d.max((lo - phi).abs()).max((hi - phi).abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub p: f64,
    pub s: usize,
    /// `s` under the `(s - e ln n)/sqrt(3 e ln n)` normalization; absent for n = 1.
    pub s_normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    /// `empirical_mean - e ln n`.
    pub mean_offset: Option<f64>,
    /// KS distance of the normalized sample from the standard normal.
    pub ks_distance: Option<f64>,
    /// KS distance after standardizing by the empirical mean and variance.
    pub ks_distance_standardized: Option<f64>,
    /// Number of draws the KS distances are computed over (all of them).
    pub ks_sample_count: u64,
    pub quantiles: Vec<QuantilePoint>,
    /// `s -> count`, zero counts omitted.
    pub histogram: BTreeMap<usize, u64>,
}

impl SimulationReport {
    fn from_histogram(n: usize, samples: u64, seed: u64, hist: &[u64]) -> Result<Self> {
        let histogram: BTreeMap<usize, u64> = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s, c))
            .collect();
        let m = samples as u128;
        let (s1, s2) = histogram.iter().fold((0u128, 0u128), |(a, b), (&s, &c)| {
            let (s, c) = (s as u128, c as u128);
            (a + s * c, b + s * s * c)
        });
        let mean = s1 as f64 / samples as f64;
        let variance = (m * s2 - s1 * s1) as f64 / (samples as f64 * samples as f64);

        let norm = (n >= 2).then(|| normalization(n as u64)).transpose()?;
        let to_norm = |s: usize| norm.map(|(c, sc)| (s as f64 - c) / sc);

        let quantiles = QUANTILE_PROBS
            .iter()
            .map(|&p| {
                let target = (p * samples as f64).ceil().max(1.0) as u64;
                let mut cum = 0u64;
                let s = histogram
                    .iter()
                    .find(|(_, &c)| {
                        cum += c;
                        cum >= target
                    })
                    .map(|(&s, _)| s)
                    .unwrap_or(n);
                QuantilePoint {
                    p,
                    s,
                    s_normalized: to_norm(s),
                }
            })
            .collect();

        let ks_distance = norm.map(|(c, sc)| {
            let pts: Vec<(f64, u64)> =
                histogram.iter().map(|(&s, &k)| ((s as f64 - c) / sc, k)).collect();
            ks_from_counts(&pts)
        });
        let ks_distance_standardized = (variance > 0.0).then(|| {
            let sd = variance.sqrt();
            let pts: Vec<(f64, u64)> =
                histogram.iter().map(|(&s, &k)| ((s as f64 - mean) / sd, k)).collect();
            ks_from_counts(&pts)
        });

        Ok(Self {
            n,
            samples,
            seed,
            empirical_mean: mean,
            empirical_variance: variance,
            mean_offset: norm.map(|(c, _)| mean - c),
            ks_distance,
            ks_distance_standardized,
            ks_sample_count: samples,
            quantiles,
            histogram,
        })
    }

    /// Empirical frequencies `s -> count / samples`.
    pub fn pmf(&self) -> BTreeMap<usize, f64> {
        self.histogram
            .iter()
            .map(|(&s, &c)| (s, c as f64 / self.samples as f64))
            .collect()
    }

    /// `(s_normalized, empirical_cdf, normal_cdf)` at each observed `s`.
    pub fn cdf_rows(&self) -> Result<Vec<(f64, f64, f64)>> {
        let (c, sc) = normalization(self.n as u64)?;
        let mut cum = 0u64;
        Ok(self
            .histogram
            .iter()
            .map(|(&s, &k)| {
                cum += k;
                let x = (s as f64 - c) / sc;
                (x, cum as f64 / self.samples as f64, normal_cdf(x))
            })
            .collect())
    }

    pub fn cdf_csv(&self) -> Result<String> {
        let mut out = String::from("s_normalized,empirical_cdf,normal_cdf\n");
        for (x, f, phi) in self.cdf_rows()? {
            let _ = writeln!(out, "{},{},{}", fmt17(x), fmt17(f), fmt17(phi));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationReport> {
    run_simulation_with_budget(cfg, DEFAULT_OP_BUDGET)
}

pub fn run_simulation_with_budget(cfg: &SimulationConfig, budget: u128) -> Result<SimulationReport> {
    cfg.validate(budget)?;
    let hist = sample_histogram(cfg.n, cfg.samples, cfg.seed, cfg.workers);
    SimulationReport::from_histogram(cfg.n, cfg.samples, cfg.seed, &hist)
}

/// Normalized histogram of `s_n` over `samples` draws, for small `n`.
pub fn empirical_pmf(n: usize, samples: u64, seed: u64) -> Result<BTreeMap<usize, f64>> {
    if n > PMF_MAX_N {
        return Err(LabError::Capability(format!(
            "empirical_pmf serves n <= {PMF_MAX_N}, got {n}"
        )));
    }
    let cfg = SimulationConfig {
        n,
        samples,
        seed,
        workers: default_workers(),
    };
    Ok(run_simulation(&cfg)?.pmf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::s_stat;

    // bisection on the forward CDF
    fn inverse_normal(p: f64) -> f64 {
        let mut lo = -40.0;
        let mut hi = 40.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn n_one_is_identity() {
        for i in 0..10 {
            assert_eq!(sample_permutation_at(1, 7, i).unwrap().one_line(), &[1]);
        }
        assert!(sample_permutation_at(0, 7, 0).is_err());
    }

    #[test]
    fn draws_are_reproducible() {
        let a = sample_permutation_at(50, 11, 123).unwrap();
        let b = sample_permutation_at(50, 11, 123).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_permutation_at(50, 11, 124).unwrap());
        assert_ne!(a, sample_permutation_at(50, 12, 123).unwrap());
    }

    #[test]
    fn s3_draws_are_uniform() {
        let draws = 60_000u64;
        let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for i in 0..draws {
            *counts
                .entry(sample_permutation_at(3, 2024, i).unwrap().into_one_line())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (perm, &c) in &counts {
            assert!(
                (c as f64 - draws as f64 * p).abs() < 4.0 * sigma,
                "{perm:?}: {c}"
            );
        }
    }

    #[test]
    fn histogram_matches_per_draw_statistic() {
        let cfg = SimulationConfig { n: 20, samples: 500, seed: 5, workers: 3 };
        let report = run_simulation(&cfg).unwrap();
        let mut direct: BTreeMap<usize, u64> = BTreeMap::new();
        for i in 0..500 {
            *direct.entry(s_stat(&sample_permutation_at(20, 5, i).unwrap())).or_default() += 1;
        }
        assert_eq!(report.histogram, direct);
    }

    #[test]
    fn n_two_has_no_spread() {
        let r = run_simulation(&SimulationConfig { n: 2, samples: 1000, seed: 1, workers: 2 }).unwrap();
        assert_eq!(r.histogram, BTreeMap::from([(2, 1000)]));
        assert_eq!(r.empirical_variance, 0.0);
        assert_eq!(r.empirical_mean, 2.0);
        assert!(r.ks_distance_standardized.is_none());
        assert!(r.ks_distance.unwrap() <= 1.0);
    }

    #[test]
    fn n_one_skips_normalized_outputs() {
        let r = run_simulation(&SimulationConfig { n: 1, samples: 10, seed: 1, workers: 1 }).unwrap();
        assert!(r.ks_distance.is_none());
        assert!(r.mean_offset.is_none());
        assert!(r.cdf_rows().is_err());
        assert_eq!(empirical_pmf(1, 10, 3).unwrap(), BTreeMap::from([(1, 1.0)]));
    }

    #[test]
    fn report_invariants_and_worker_independence() {
        let base = SimulationConfig { n: 300, samples: 2_000, seed: 99, workers: 1 };
        let r1 = run_simulation(&base).unwrap();
        for workers in [2, 7, 64] {
            let r = run_simulation(&SimulationConfig { workers, ..base }).unwrap();
            assert_eq!(r.to_json().unwrap(), r1.to_json().unwrap());
        }
        assert_eq!(r1.histogram.values().sum::<u64>(), 2_000);
        assert!(r1.histogram.keys().all(|&s| (1..=300).contains(&s)));
        let ks = r1.ks_distance.unwrap();
        assert!((0.0..=1.0).contains(&ks));
        assert!(r1.quantiles.windows(2).all(|w| w[0].s <= w[1].s));
    }

    #[test]
    fn config_guards() {
        let ok = SimulationConfig { n: 10, samples: 10, seed: 0, workers: 1 };
        assert!(run_simulation(&SimulationConfig { n: 0, ..ok }).is_err());
        assert!(run_simulation(&SimulationConfig { samples: 0, ..ok }).is_err());
        assert!(run_simulation(&SimulationConfig { workers: 0, ..ok }).is_err());
        assert!(matches!(
            run_simulation_with_budget(&ok, 99),
            Err(LabError::ResourceLimit(_))
        ));
        assert!(empirical_pmf(13, 10, 0).is_err());
    }

    #[test]
    fn pmf_sums_to_one_and_matches_s3() {
        let pmf = empirical_pmf(3, 60_000, 17).unwrap();
        assert!((pmf.values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(pmf.keys().copied().collect::<Vec<_>>(), vec![2, 3]);
        let sigma = (1.0 / 6.0 * 5.0 / 6.0 / 60_000.0f64).sqrt();
        assert!((pmf[&2] - 1.0 / 6.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn ks_examples() {
        for m in [1usize, 5, 100] {
            let grid: Vec<f64> = (1..=m)
                .map(|i| inverse_normal((i as f64 - 0.5) / m as f64))
                .collect();
            let d = ks_statistic(&grid).unwrap();
            assert!((d - 0.5 / m as f64).abs() < 1e-9, "m={m} d={d}");
        }
        assert_eq!(ks_statistic(&[0.0]).unwrap(), 0.5);
        let far = ks_statistic(&[10.0, 10.0]).unwrap();
        assert!((far - normal_cdf(10.0)).abs() < 1e-15);
        assert!((far - 1.0).abs() < 1e-15);
        assert!(ks_statistic(&[]).is_err());
        assert!(ks_statistic(&[1.0, 0.0]).is_err());
        assert!(ks_statistic(&[f64::NAN]).is_err());
    }

    #[test]
    fn ks_from_counts_matches_expanded_sample() {
        let pts = [(-1.3, 3u64), (-0.2, 1), (0.0, 5), (0.4, 2), (2.2, 4)];
        let expanded: Vec<f64> = pts
            .iter()
            .flat_map(|&(x, c)| std::iter::repeat_n(x, c as usize))
            .collect();
        let a = ks_statistic(&expanded).unwrap();
        assert!((a - ks_from_counts(&pts)).abs() < 1e-15);
    }

    #[test]
    fn cdf_csv_rows() {
        let r = run_simulation(&SimulationConfig { n: 50, samples: 400, seed: 3, workers: 2 }).unwrap();
        let csv = r.cdf_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("s_normalized,empirical_cdf,normal_cdf"));
        let last: Vec<f64> = lines
            .last()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(last[1], 1.0);
    }
}
