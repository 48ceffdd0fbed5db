//! Cross-validation matrix run by `ilis-lab verify`.
//!
//! Each check pairs two independent routes to the same quantity. The `h`
//! evaluator is injectable so a deliberately broken one can be shown to trip
//! the integral/h check.

use std::fmt;

use crate::asymptotics::{clt_target, darboux_expectation, mgf_normalized, MgfSource};
use crate::enumerate::{enumerate_distribution_with, EnumOptions};
use crate::error::Result;
use crate::montecarlo::{run_simulation, SimulationConfig, SimulationReport};
use crate::perm::{PermStats, Permutation};
use crate::series::{h_eval, h_series, integral_series};

/// Seed used by every Monte Carlo check.
pub const FROZEN_SEED: u64 = 20_231_118;
/// Largest KS distance accepted at `n = 10^4` with `10^5` samples.
pub const KS_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:<28} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub struct Verifier {
    pub level: Level,
    pub workers: usize,
    pub h: fn(f64, f64) -> f64,
}

impl Verifier {
    pub fn new(level: Level, workers: usize) -> Self {
        Self {
            level,
            workers: workers.max(1),
            h: h_eval,
        }
    }

    fn enum_opts(&self) -> EnumOptions {
        EnumOptions {
            cap: 10,
            workers: self.workers,
        }
    }

    pub fn run(&self) -> Vec<Check> {
        vec![
            check("worked example", self.worked_example()),
            check("enumeration <-> series", self.enumeration_vs_series()),
            check("normalization", self.normalization()),
            check("integral <-> h", self.integral_vs_h()),
            check("series <-> darboux trend", self.series_vs_darboux()),
            check("mgf -> e^(t^2/2) trend", self.mgf_trend()),
            check("monte carlo <-> exact", self.montecarlo_vs_exact()),
            check("monte carlo determinism", self.determinism()),
            check("clt ks trend", self.clt()),
        ]
    }

    pub fn worked_example(&self) -> Result<(bool, String)> {
        let p: Permutation = "1,3,5,4,7,6,2".parse()?;
        let st = PermStats::of(&p);
        let ok = st.ilis == 3
            && st.lis == 4
            && st.max_ilis == 4
            && st.s == 7
            && st.cycles == "(1)(2 3 5 7)(4)(6)";
        Ok((ok, format!("{st:?}")))
    }

    pub fn enumeration_vs_series(&self) -> Result<(bool, String)> {
        let top = match self.level {
            Level::Quick => 8,
            Level::Full => 9,
        };
        let mut worst = 0.0f64;
        for y in [0.9, 1.0, 1.1] {
            let h = h_series(y, 64)?;
            for n in 1..=top {
                let exact = enumerate_distribution_with(n, self.enum_opts())?.expected_y_power(y);
                worst = worst.max(((h.coeff(n) - exact) / exact).abs());
            }
        }
        Ok((worst <= 1e-10, format!("n<={top}, max rel err {worst:.3e} (tol 1e-10)")))
    }

    pub fn normalization(&self) -> Result<(bool, String)> {
        let mut fact: u128 = 1;
        let mut sums_ok = true;
        for n in 1..=9 {
            fact *= n as u128;
            sums_ok &= enumerate_distribution_with(n, self.enum_opts())?.total() == fact;
        }
        let worst = h_series(1.0, 256)?
            .coeffs()
            .iter()
            .map(|c| (c - 1.0).abs())
            .fold(0.0, f64::max);
        Ok((
            sums_ok && worst <= 1e-12,
            format!("counts sum to n!: {sums_ok}; max |H(x,1)_k - 1| = {worst:.3e}"),
        ))
    }

    pub fn integral_vs_h(&self) -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        for y in [0.9, 1.0, 1.1] {
            let sum: f64 = integral_series(y, 60)?.coeffs().iter().sum();
            worst = worst.max((sum - (self.h)(y, 1e-12)).abs());
        }
        let quad = simpson(
            &|t: f64| if t == 0.0 { 1.0 } else { -(-t).exp_m1() / t },
            0.0,
            1.0,
            1e-14,
        );
        let h1_err = ((self.h)(1.0, 1e-12) - quad).abs();
        Ok((
            worst <= 1e-10 && h1_err <= 1e-6,
            format!("max |Σa_k - h| = {worst:.3e}; |h(1) - quadrature| = {h1_err:.3e}"),
        ))
    }

    pub fn series_vs_darboux(&self) -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for y in [0.95, 1.05] {
            let h = h_series(y, 4096)?;
            let err = |n: usize| -> Result<f64> {
                Ok((darboux_expectation(y, n as u64)? / h.coeff(n) - 1.0).abs())
            };
            let (e64, e4096) = (err(64)?, err(4096)?);
            ok &= e4096 < e64 && e4096 < 0.2;
            parts.push(format!("y={y}: {e64:.2e} -> {e4096:.2e}"));
        }
        Ok((ok, parts.join("; ")))
    }

    /// The worst error over `t = ±0.5` must shrink strictly along the grid.
    pub fn mgf_trend(&self) -> Result<(bool, String)> {
        let mut at_zero = 0.0f64;
        for source in [MgfSource::Enumeration, MgfSource::Series, MgfSource::Darboux] {
            at_zero = at_zero.max((mgf_normalized(7, 0.0, source)? - 1.0).abs());
        }
        let grid = [1e3, 1e4, 1e5, 1e6, 1e7];
        let mut sup = Vec::new();
        for &n in &grid {
            let mut worst = 0.0f64;
            for t in [-0.5, 0.5] {
                let m = mgf_normalized(n as u64, t, MgfSource::Darboux)?;
                worst = worst.max((m - clt_target(t)).abs());
            }
            sup.push(worst);
        }
        let ok = at_zero <= 1e-12 && sup.windows(2).all(|w| w[1] < w[0]);
        Ok((
            ok,
            format!(
                "sup_t |M_n - e^(t^2/2)| over n=1e3..1e7: {}",
                sup.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
            ),
        ))
    }

    pub fn montecarlo_vs_exact(&self) -> Result<(bool, String)> {
        let samples = match self.level {
            Level::Quick => 200_000,
            Level::Full => 1_000_000,
        };
        let exact = enumerate_distribution_with(7, self.enum_opts())?;
        let report = run_simulation(&SimulationConfig {
            n: 7,
            samples,
            seed: FROZEN_SEED,
            workers: self.workers,
        })?;
        let (ok, worst) = pmf_within_sigmas(&exact.pmf(), &report, 4.0);
        Ok((ok, format!("n=7, {samples} draws, worst |z| = {worst:.2}")))
    }

    pub fn determinism(&self) -> Result<(bool, String)> {
        let cfg = SimulationConfig {
            n: 500,
            samples: 5_000,
            seed: FROZEN_SEED,
            workers: 1,
        };
        let a = run_simulation(&cfg)?.to_json()?;
        let b = run_simulation(&SimulationConfig {
            workers: self.workers.max(2) + 1,
            ..cfg
        })?
        .to_json()?;
        Ok((a == b, "reports identical across worker counts".to_owned()))
    }

    pub fn clt(&self) -> Result<(bool, String)> {
        let (small, large, samples) = match self.level {
            Level::Quick => (100, 1_000, 20_000),
            Level::Full => (100, 10_000, 100_000),
        };
        let sim = |n| {
            run_simulation(&SimulationConfig {
                n,
                samples,
                seed: FROZEN_SEED,
                workers: self.workers,
            })
        };
        let a = sim(small)?.ks_distance.unwrap_or(1.0);
        let b = sim(large)?.ks_distance.unwrap_or(1.0);
        let mut ok = b < a;
        if self.level == Level::Full {
            ok &= b <= KS_THRESHOLD;
        }
        Ok((
            ok,
            format!("KS n={small}: {a:.4}, n={large}: {b:.4} ({samples} draws)"),
        ))
    }
}

/// True iff every exact `P(s = j)` lies within `sigmas` binomial standard
/// deviations of the empirical frequency. Also returns the worst z-score.
pub fn pmf_within_sigmas(
    exact: &[(usize, f64)],
    report: &SimulationReport,
    sigmas: f64,
) -> (bool, f64) {
    let m = report.samples as f64;
    let freq = report.pmf();
    let mut worst = 0.0f64;
    let mut ok = freq.keys().all(|s| exact.iter().any(|(j, _)| j == s));
    for &(j, p) in exact {
        let f = freq.get(&j).copied().unwrap_or(0.0);
        let sd = (p * (1.0 - p) / m).sqrt();
        let z = (f - p).abs() / sd;
        worst = worst.max(z);
        ok &= z <= sigmas;
    }
    (ok, worst)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}
