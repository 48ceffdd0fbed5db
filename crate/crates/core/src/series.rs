//! Truncated power series in `x` with real coefficients, and the bivariate
//! generating function `H(x, y) = Σ E(y^{s_n}) x^n` materialized at a fixed `y`.

use std::fmt::Write as _;

use crate::asymptotics::ln_gamma;
use crate::error::{LabError, Result};
use crate::fmt17;

/// Default order used by cross-checks.
pub const DEFAULT_ORDER: usize = 256;

/// Coefficients `c_0 … c_N` of a power series truncated after `x^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(LabError::invalid("a truncated series needs at least one coefficient"));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(LabError::invalid(format!("coefficient {k} is not finite")));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = 1.0;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    /// Keeps coefficients `0..=order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_orders(self, other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        series_mul(self, other)
    }

    pub fn exp(&self) -> Self {
        series_exp(self)
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `k,coefficient` rows, header first, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,coefficient\n");
        for (k, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{k},{}", fmt17(*c));
        }
        out
    }
}

fn check_orders(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<()> {
    if a.order() != b.order() {
        return Err(LabError::invalid(format!(
            "series orders differ ({} vs {})",
            a.order(),
            b.order()
        )));
    }
    Ok(())
}

/// Cauchy product truncated at the common order.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_orders(a, b)?;
    let (ac, bc) = (a.coeffs(), b.coeffs());
    let coeffs = (0..ac.len())
        .map(|n| (0..=n).map(|k| ac[k] * bc[n - k]).sum())
        .collect();
    Ok(TruncatedSeries { coeffs })
}

/// `exp(A)` as a formal series: `b_0 = e^{a_0}` and
/// `n b_n = Σ_{k=1..n} k a_k b_{n-k}`.
pub fn series_exp(a: &TruncatedSeries) -> TruncatedSeries {
    let ac = a.coeffs();
    let mut b = vec![0.0; ac.len()];
    b[0] = ac[0].exp();
    for n in 1..ac.len() {
        let s: f64 = (1..=n).map(|k| k as f64 * ac[k] * b[n - k]).sum();
        b[n] = s / n as f64;
    }
    TruncatedSeries { coeffs: b }
}

/// Taylor coefficients of `(1 - x)^{-beta}`.
pub fn binomial_series(beta: f64, order: usize) -> Result<TruncatedSeries> {
    if !beta.is_finite() {
        return Err(LabError::invalid("beta must be finite"));
    }
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(1.0);
    for k in 1..=order {
        let prev = coeffs[k - 1];
        coeffs.push(prev * (beta + k as f64 - 1.0) / k as f64);
    }
    TruncatedSeries::new(coeffs)
}

/// `γ(k, y) / k!`, the lower incomplete gamma function scaled by `k!`.
///
/// Uses the tail form `(e^{-y}/k) Σ_{j≥k} y^j/j!`, which has no cancellation as
/// `k` grows.
pub fn lower_gamma_ratio(k: usize, y: f64) -> Result<f64> {
    if k == 0 {
        return Err(LabError::invalid("k must be at least 1"));
    }
    if !y.is_finite() || y <= 0.0 {
        return Err(LabError::invalid(format!("y must be positive and finite, got {y}")));
    }
    let kf = k as f64;
    // r = Σ_{j≥k} (y^j/j!) / (y^k/k!)
    let mut r = 1.0;
    let mut term = 1.0;
    let mut j = kf;
    loop {
        j += 1.0;
        term *= y / j;
        r += term;
        if !r.is_finite() || term < 1e-18 * r {
            break;
        }
    }
    if r.is_finite() {
        let lead = if y <= 50.0 && k <= 170 {
            (1..=k).fold((-y).exp(), |acc, i| acc * y / i as f64)
        } else {
            (kf * y.ln() - ln_gamma(kf + 1.0) - y).exp()
        };
        Ok(lead * r / kf)
    } else {
        // y far beyond k: the head sum is tiny and the complement is safe.
        let head: f64 = (0..k)
            .map(|j| (j as f64 * y.ln() - ln_gamma(j as f64 + 1.0) - y).exp())
            .sum();
        Ok((1.0 - head) / kf)
    }
}

/// Series of `∫_0^1 (e^{-y(1-x)u} - e^{-yu}) / u du` in `x`; its `x^k`
/// coefficient is `γ(k, y)/k!`.
pub fn integral_series(y: f64, order: usize) -> Result<TruncatedSeries> {
    let mut coeffs = vec![0.0; order + 1];
    for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = lower_gamma_ratio(k, y)?;
    }
    TruncatedSeries::new(coeffs)
}

/// `h(y) = Σ_{j≥1} (-1)^{j-1} y^j / (j·j!)`, summed until the next term drops
/// below `tol` in magnitude.
pub fn h_eval(y: f64, tol: f64) -> f64 {
    let mut sum = 0.0;
    // power = y^j / j!
    let mut power = 1.0;
    let mut j = 1.0;
    loop {
        power *= y / j;
        let term = power / j;
        if term.abs() < tol || term == 0.0 {
            break;
        }
        sum += term;
        j += 1.0;
        power = -power;
    }
    sum
}

/// Admissible half-width of the `y` window around 1 for the generating
/// function: `|y - 1| < e^{-2}`.
pub fn window_half_width() -> f64 {
    (-2.0f64).exp()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeriesOptions {
    /// Materialize `H` even when `y` lies outside `|y - 1| < e^{-2}`. The
    /// identity is not claimed to hold there.
    pub allow_outside_window: bool,
}

/// `H(x, y)` truncated at `x^order`; coefficient `n` is `E(y^{s_n})`.
pub fn h_series(y: f64, order: usize) -> Result<TruncatedSeries> {
    h_series_with(y, order, SeriesOptions::default())
}

pub fn h_series_with(y: f64, order: usize, opts: SeriesOptions) -> Result<TruncatedSeries> {
    if order == 0 {
        return Err(LabError::invalid("series order must be at least 1"));
    }
    if !opts.allow_outside_window && (y.is_nan() || (y - 1.0).abs() >= window_half_width()) {
        return Err(LabError::domain(format!(
            "y = {y} lies outside the window 1 - δ < y < 1 + δ, 0 < δ < e^-2"
        )));
    }
    let c = (1.0 - y) * y.exp();
    let pole = binomial_series(1.0 - c, order)?;
    let analytic = series_exp(&integral_series(y, order)?.scale(c));
    series_mul(&pole, &analytic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec()).unwrap()
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(TruncatedSeries::new(vec![]).is_err());
        assert!(TruncatedSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TruncatedSeries::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn multiplication_examples() {
        let p = series_mul(&s(&[1.0, 1.0, 0.0]), &s(&[1.0, -1.0, 0.0])).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);

        let a = s(&[0.3, -1.2, 2.5, 0.7]);
        assert_eq!(series_mul(&a, &TruncatedSeries::one(3)).unwrap(), a);

        let geometric = s(&[1.0; 6]);
        let one_minus_x = s(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let t = series_mul(&geometric, &one_minus_x).unwrap();
        assert_eq!(t.coeffs(), TruncatedSeries::one(5).coeffs());

        assert!(matches!(
            series_mul(&s(&[1.0]), &s(&[1.0, 2.0])),
            Err(LabError::InvalidInput(_))
        ));
    }

    #[test]
    fn exponential_examples() {
        assert_eq!(series_exp(&TruncatedSeries::zero(6)), TruncatedSeries::one(6));
        let e = series_exp(&s(&[0.0, 1.0, 0.0, 0.0, 0.0]));
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (got, want) in e.coeffs().iter().zip(want) {
            assert!((got - want).abs() < 1e-16);
        }
        let e0 = series_exp(&s(&[2.0, 0.0]));
        assert!((e0.coeff(0) - 2.0f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn exp_of_negation_is_inverse() {
        let a = TruncatedSeries::new((0..=32).map(|k| ((k * 7 % 11) as f64 - 5.0) / 20.0).collect())
            .unwrap();
        let prod = series_mul(&series_exp(&a.neg()), &series_exp(&a)).unwrap();
        for (k, c) in prod.coeffs().iter().enumerate() {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-12, "k={k} c={c}");
        }
    }

    #[test]
    fn binomial_examples() {
        assert!(binomial_series(1.0, 8).unwrap().coeffs().iter().all(|&c| c == 1.0));
        assert_eq!(binomial_series(0.0, 3).unwrap().coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(binomial_series(2.0, 3).unwrap().coeffs(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(binomial_series(f64::NAN, 3).is_err());
        // (1-x)^{1/2}: 1, -1/2, -1/8, -1/16
        let half = binomial_series(-0.5, 3).unwrap();
        for (got, want) in half.coeffs().iter().zip([1.0, -0.5, -0.125, -0.0625]) {
            assert!((got - want).abs() < 1e-16);
        }
    }

    #[test]
    fn lower_gamma_ratio_examples() {
        for y in [0.3, 1.0, 2.0] {
            let got = lower_gamma_ratio(1, y).unwrap();
            assert!((got - (1.0 - (-y).exp())).abs() < 1e-15);
        }
        let want = (1.0 - 2.0 * (-1.0f64).exp()) / 2.0;
        assert!((lower_gamma_ratio(2, 1.0).unwrap() - want).abs() < 1e-15);
        let quad = simpson(&|u: f64| u * (-u).exp(), 0.0, 1.0, 1e-14) / 2.0;
        assert!((quad - want).abs() < 1e-12);
        assert!(lower_gamma_ratio(0, 1.0).is_err());
        assert!(lower_gamma_ratio(1, 0.0).is_err());
        assert!(lower_gamma_ratio(1, -1.0).is_err());
    }

    #[test]
    fn lower_gamma_ratio_decays_below_crude_bound() {
        for y in [0.9, 1.0, 1.1] {
            let mut prev = f64::INFINITY;
            let mut bound = 1.0;
            for k in 1..=200 {
                bound *= y / k as f64;
                let v = lower_gamma_ratio(k, y).unwrap();
                assert!(v <= prev && v >= 0.0);
                assert!(v <= bound / k as f64 * (1.0 + 1e-12));
                prev = v;
            }
            assert_eq!(lower_gamma_ratio(400, y).unwrap(), 0.0);
        }
    }

    #[test]
    fn lower_gamma_ratio_large_arguments() {
        // γ(k, y)/k! → 1/k as y → ∞
        let v = lower_gamma_ratio(3, 900.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let v = lower_gamma_ratio(200, 180.0).unwrap();
        assert!(v > 0.0 && v < 1.0 / 200.0);
    }

    #[test]
    fn integral_coefficients_match_quadrature() {
        for y in [0.9, 1.0, 1.1] {
            let series = integral_series(y, 60).unwrap();
            assert_eq!(series.coeff(0), 0.0);
            for x in [0.25, 0.5, 0.75] {
                let f = |u: f64| {
                    if u == 0.0 {
                        y * x
                    } else {
                        (-y * u).exp() * (y * u * x).exp_m1() / u
                    }
                };
                let quad = simpson(&f, 0.0, 1.0, 1e-15);
                assert!((series.eval(x) - quad).abs() < 1e-12, "y={y} x={x}");
            }
        }
        let a1 = integral_series(1.0, 4).unwrap().coeff(1);
        assert!((a1 - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn h_eval_examples() {
        assert_eq!(h_eval(0.0, 1e-12), 0.0);
        let quad = simpson(
            &|t: f64| if t == 0.0 { 1.0 } else { -(-t).exp_m1() / t },
            0.0,
            1.0,
            1e-15,
        );
        let h1 = h_eval(1.0, 1e-15);
        assert!((h1 - quad).abs() < 1e-12);
        assert!((h1 - 0.796_599).abs() < 1e-6);
        for y in [1e-3, 1e-2] {
            let approx = y - y * y / 4.0;
            assert!((h_eval(y, 1e-18) - approx).abs() < y * y * y);
        }
    }

    #[test]
    fn integral_sum_approaches_h() {
        for y in [0.9, 1.0, 1.1] {
            let sum: f64 = integral_series(y, 60).unwrap().coeffs().iter().sum();
            assert!((sum - h_eval(y, 1e-12)).abs() < 1e-10);
        }
    }

    #[test]
    fn h_series_at_one_is_geometric() {
        let h = h_series(1.0, 256).unwrap();
        assert!(h.coeffs().iter().all(|c| (c - 1.0).abs() < 1e-12));
    }

    #[test]
    fn h_series_first_coefficient_is_y() {
        for y in [0.95, 1.05] {
            let h = h_series(y, 4).unwrap();
            assert!((h.coeff(1) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn h_series_is_probability_like_below_one() {
        for y in [0.88, 0.95, 0.99] {
            let h = h_series(y, 128).unwrap();
            assert!(h.coeffs().iter().all(|&c| c > 0.0 && c <= 1.0 + 1e-15));
        }
    }

    #[test]
    fn h_series_truncation_is_stable() {
        for y in [0.9, 1.03] {
            let short = h_series(y, 50).unwrap();
            let long = h_series(y, 100).unwrap();
            assert_eq!(short.coeffs(), &long.coeffs()[..=50]);
        }
    }

    #[test]
    fn h_series_window() {
        assert!(h_series(0.9, 8).is_ok());
        assert!(h_series(1.1, 8).is_ok());
        assert!(matches!(h_series(1.2, 8), Err(LabError::Domain(_))));
        assert!(matches!(h_series(0.8, 8), Err(LabError::Domain(_))));
        let loose = SeriesOptions {
            allow_outside_window: true,
        };
        assert!(h_series_with(1.2, 8, loose).is_ok());
        assert!(h_series_with(-0.5, 8, loose).is_err());
        assert!(h_series(1.0, 0).is_err());
    }

    #[test]
    fn csv_rows() {
        let csv = s(&[1.0, 0.1]).to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "k,coefficient");
        assert_eq!(lines[2], "1,1.0000000000000001e-1");
        assert_eq!(lines[2].split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.1);
    }
}
