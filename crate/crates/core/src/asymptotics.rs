//! Singularity-analysis asymptotics for `E(y^{s_n})`, the normalization of
//! `s_n`, and the moment generating function of the normalized statistic.

use std::f64::consts::{E, PI};

use crate::enumerate::{enumerate_distribution_with, EnumOptions};
use crate::error::{LabError, Result};
use crate::series::{h_eval, h_series, DEFAULT_ORDER};

/// Default half-width of the admissible `y` window.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Default bound on `|t|` for moment generating function evaluations.
pub const DEFAULT_T_MAX: f64 = 1.0;

const H_TOL: f64 = 1e-17;

/// True iff `0 < delta < e^{-2}` and `1 - delta < y < 1 + delta`.
pub fn validate_y(y: f64, delta: f64) -> bool {
    delta > 0.0 && delta < (-2.0f64).exp() && 1.0 - delta < y && y < 1.0 + delta
}

/// Parameters of the algebraic singularity of `H(·, y)` at `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub y: f64,
    /// `(1 - y) e^y`
    pub c: f64,
    /// exponent of `(1 - x)`, `c - 1`
    pub alpha: f64,
    /// analytic factor at the singularity, `e^{c h(y)}`
    pub g1: f64,
}

impl AsymptoticParams {
    pub fn new(y: f64) -> Self {
        let c = (1.0 - y) * y.exp();
        Self {
            y,
            c,
            alpha: c - 1.0,
            g1: (c * h_eval(y, H_TOL)).exp(),
        }
    }
}

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    // z here is the shifted argument (Γ(z + 1))
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, &c)| acc + c / (z + i as f64 + 1.0))
}

fn is_pole(z: f64) -> bool {
    z <= 0.0 && z == z.floor()
}

/// Euler's gamma function.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if !z.is_finite() || is_pole(z) {
        return Err(LabError::domain(format!("Γ has a pole or is undefined at {z}")));
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: f64) -> f64 {
    if z == z.floor() && (1.0..=30.0).contains(&z) {
        return (2..z as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if z < 0.5 {
        // reflection: Γ(z) Γ(1 - z) = π / sin(πz)
        PI / ((PI * z).sin() * gamma_unchecked(1.0 - z))
    } else {
        let z = z - 1.0;
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
    }
}

/// `ln Γ(z)` for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z < 0.5 {
        return (PI / (PI * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// `(y - 1) e^y`, with `y - 1` formed without cancellation when `y = e^u`.
fn shifted_exponent(u: f64) -> f64 {
    let y = u.exp();
    u.exp_m1() * y.exp()
}

/// Leading term of `E(y^{s_n})`:
/// `n^{(y-1)e^y} / Γ(1 + (y-1)e^y) · e^{-(y-1)e^y h(y)}`.
pub fn darboux_expectation(y: f64, n: u64) -> Result<f64> {
    darboux_expectation_with(y, n, DEFAULT_DELTA)
}

pub fn darboux_expectation_with(y: f64, n: u64, delta: f64) -> Result<f64> {
    if !validate_y(y, delta) {
        return Err(LabError::domain(format!(
            "y = {y} is outside the window 1 - {delta} < y < 1 + {delta}"
        )));
    }
    if n < 2 {
        return Err(LabError::domain("asymptotic estimate needs n >= 2"));
    }
    Ok(darboux_from_exponent((y - 1.0) * y.exp(), y, n))
}

fn darboux_from_exponent(b: f64, y: f64, n: u64) -> f64 {
    let ln_n = (n as f64).ln();
    (b * ln_n - b * h_eval(y, H_TOL)).exp() / gamma_unchecked(1.0 + b)
}

/// The normalized statistic `(s - e ln n) / sqrt(3 e ln n)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedValue(pub f64);

impl NormalizedValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Centering `e ln n` and scale `sqrt(3 e ln n)`.
pub fn normalization(n: u64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(LabError::domain(format!("normalization needs n >= 2, got {n}")));
    }
    let l = (n as f64).ln();
    Ok((E * l, (3.0 * E * l).sqrt()))
}

pub fn normalize_value(s: f64, n: u64) -> Result<NormalizedValue> {
    let (center, scale) = normalization(n)?;
    Ok(NormalizedValue((s - center) / scale))
}

/// Where `E(y^{s_n})` comes from when evaluating the moment generating
/// function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MgfSource {
    Enumeration,
    Series,
    Darboux,
}

#[derive(Debug, Clone, Copy)]
pub struct MgfOptions {
    pub delta: f64,
    pub t_max: f64,
    /// Largest `n` served by the series source.
    pub series_order: usize,
    pub enumeration: EnumOptions,
}

impl Default for MgfOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            t_max: DEFAULT_T_MAX,
            series_order: DEFAULT_ORDER,
            enumeration: EnumOptions::default(),
        }
    }
}

/// `M_n(t) = E(e^{t s'_n})`, computed as `e^{-t sqrt(e ln n / 3)} E(y^{s_n})`
/// with `y = e^{t / sqrt(3 e ln n)}`.
pub fn mgf_normalized(n: u64, t: f64, source: MgfSource) -> Result<f64> {
    mgf_normalized_with(n, t, source, &MgfOptions::default())
}

pub fn mgf_normalized_with(n: u64, t: f64, source: MgfSource, opts: &MgfOptions) -> Result<f64> {
    if t.is_nan() || t.abs() > opts.t_max {
        return Err(LabError::domain(format!("|t| = {} exceeds t_max = {}", t.abs(), opts.t_max)));
    }
    let (_, scale) = normalization(n)?;
    let u = t / scale;
    let y = u.exp();
    if !validate_y(y, opts.delta) {
        return Err(LabError::domain(format!(
            "n = {n}, t = {t} gives y = {y}, outside 1 ± {}",
            opts.delta
        )));
    }
    let expectation = match source {
        MgfSource::Enumeration => {
            let cap = opts.enumeration.cap;
            if n as usize > cap {
                return Err(LabError::Capability(format!(
                    "enumeration source serves n <= {cap}, got {n}"
                )));
            }
            enumerate_distribution_with(n as usize, opts.enumeration)?.expected_y_power(y)
        }
        MgfSource::Series => {
            if n as usize > opts.series_order {
                return Err(LabError::Capability(format!(
                    "series source serves n <= {}, got {n}",
                    opts.series_order
                )));
            }
            h_series(y, n as usize)?.coeff(n as usize)
        }
        MgfSource::Darboux => darboux_from_exponent(shifted_exponent(u), y, n),
    };
    let ln_n = (n as f64).ln();
    Ok(expectation * (-t * (E * ln_n / 3.0).sqrt()).exp())
}

/// Moment generating function of the standard normal, `e^{t²/2}`.
pub fn clt_target(t: f64) -> f64 {
    (0.5 * t * t).exp()
}

/// `|(y-1)e^y - e (t/sqrt(3e ln n) + t²/(2e ln n))|` at `y = e^{t/sqrt(3e ln n)}`:
/// the remainder of the two-term expansion of the exponent.
pub fn expansion_error(n: u64, t: f64) -> Result<f64> {
    let (_, scale) = normalization(n)?;
    let ln_n = (n as f64).ln();
    let u = t / scale;
    let two_term = E * (u + t * t / (2.0 * E * ln_n));
    Ok((shifted_exponent(u) - two_term).abs())
}

/// Standard normal distribution function.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / std::f64::consts::SQRT_2)
}
