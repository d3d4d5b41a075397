//! The kappa-generalized distribution on `(0, inf)`.
//!
//! `P(X > x) = exp_k(-beta x^alpha)` with `alpha, beta > 0`, `0 <= kappa < 1`.
//! Bulk behaves like a Weibull law, the upper tail like a Pareto law with
//! exponent `alpha / kappa`.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::kexp::{ln_exp_k, ln_k_from_ln, Kappa};
use crate::special::ln_gamma_ratio_unchecked;

/// Parameter triple of the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct KappaParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: Kappa,
}

#[derive(Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
    kappa: f64,
}

impl TryFrom<RawParams> for KappaParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        KappaParams::new(raw.alpha, raw.beta, raw.kappa)
    }
}

/// Location of the density maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub location: f64,
    /// Supremum at the origin (`alpha <= 1`): a pole for `alpha < 1`,
    /// a boundary maximum for `alpha = 1`.
    pub zero_modal: bool,
    /// The closed form disagreed with the bracketed root and was replaced.
    pub numeric_fallback: bool,
}

/// Mean, variance, skewness and excess kurtosis. `None` where the
/// underlying raw moment does not exist (`kappa >= alpha / r`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

const MODE_AGREEMENT: f64 = 1e-6;

impl KappaParams {
    pub fn new(alpha: f64, beta: f64, kappa: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("alpha must be positive and finite, got {alpha}"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return domain(format!("beta must be positive and finite, got {beta}"));
        }
        Ok(KappaParams {
            alpha,
            beta,
            kappa: Kappa::new(kappa)?,
        })
    }

    /// Parameters with `beta` fixed by the unit-mean constraint.
    pub fn with_unit_mean(alpha: f64, kappa: f64) -> Result<Self> {
        let beta = crate::estimation::beta_from(alpha, kappa)?;
        KappaParams::new(alpha, beta, kappa)
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.kappa.get()
    }

    /// Whether the `r`-th raw moment is finite.
    pub fn moment_exists(&self, r: u32) -> bool {
        self.kappa.is_classical() || self.k() < self.alpha / r as f64
    }

    /// `P(X > x)`.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        check_support(x)?;
        Ok(self.ccdf_at(x))
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_support(x)?;
        Ok(self.cdf_at(x))
    }

    /// Density. At `x = 0` returns the limit: `0` for `alpha > 1`, `beta` for
    /// `alpha = 1` and `+inf` for `alpha < 1`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_support(x)?;
        if x == 0.0 {
            return Ok(if self.alpha > 1.0 {
                0.0
            } else if self.alpha == 1.0 {
                self.beta
            } else {
                f64::INFINITY
            });
        }
        Ok(self.ln_pdf_at(x).exp())
    }

    /// Log-density for `x > 0`.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return domain(format!("log-density needs x > 0, got {x}"));
        }
        Ok(self.ln_pdf_at(x))
    }

    /// Inverse of [`cdf`](Self::cdf) on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return domain(format!("quantile level must lie in (0, 1), got {u}"));
        }
        Ok(self.quantile_at(u))
    }

    pub fn median(&self) -> f64 {
        self.quantile_at(0.5)
    }

    pub fn mode(&self) -> Mode {
        let a = self.alpha;
        if a <= 1.0 {
            return Mode {
                location: 0.0,
                zero_modal: true,
                numeric_fallback: false,
            };
        }
        // Work in t = beta x^alpha; the stationarity condition is
        // (a-1) - a t / sqrt(1 + k^2 t^2) - a k^2 t^2 / (1 + k^2 t^2) = 0.
        let closed = self.mode_t_closed_form();
        let numeric = self.mode_t_bisection();
        let (t, fallback) = if ((closed - numeric) / numeric).abs() <= MODE_AGREEMENT {
            (closed, false)
        } else {
            (numeric, true)
        };
        Mode {
            location: (t / self.beta).powf(1.0 / a),
            zero_modal: false,
            numeric_fallback: fallback,
        }
    }

    fn mode_t_closed_form(&self) -> f64 {
        let a = self.alpha;
        let k2 = self.k() * self.k();
        let am1 = a - 1.0;
        let big_a = a * a + 2.0 * k2 * am1;
        let w = 4.0 * k2 * (a * a - k2) * am1 * am1 / (big_a * big_a);
        // A / (2 k^2 (a^2 - k^2)) * (sqrt(1 + w) - 1), with the k^2 cancelled.
        let t2 = 2.0 * am1 * am1 / (big_a * ((1.0 + w).sqrt() + 1.0));
        t2.sqrt()
    }

    fn mode_t_bisection(&self) -> f64 {
        let a = self.alpha;
        let k = self.k();
        let g = |t: f64| {
            let z2 = k * k * t * t;
            (a - 1.0) - a * t / (1.0 + z2).sqrt() - a * z2 / (1.0 + z2)
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `E[X^r]`, or `None` when `kappa >= alpha / r`.
    pub fn raw_moment(&self, r: u32) -> Result<Option<f64>> {
        if r < 1 {
            return domain("moment order must be at least 1");
        }
        if !self.moment_exists(r) {
            return Ok(None);
        }
        Ok(Some(self.ln_raw_moment(r as f64).exp()))
    }

    pub(crate) fn ln_raw_moment(&self, r: f64) -> f64 {
        let a = self.alpha;
        let ra = r / a;
        if self.kappa.is_classical() {
            return -ra * self.beta.ln() + ln_gamma(1.0 + ra);
        }
        let k = self.k();
        let half_inv_k = 0.5 / k;
        -ra * (2.0 * self.beta * k).ln() - (ra * k).ln_1p()
            + ln_gamma_ratio_unchecked(half_inv_k - 0.5 * ra, half_inv_k + 0.5 * ra)
            + ln_gamma(1.0 + ra)
    }

    pub fn moment_summary(&self) -> MomentSummary {
        let mu = |r| self.raw_moment(r).ok().flatten();
        let mean = mu(1);
        let variance = match (mean, mu(2)) {
            (Some(m), Some(m2)) => Some((m2 - m * m).max(0.0)),
            _ => None,
        };
        let skewness = match (mean, variance, mu(3)) {
            (Some(m), Some(v), Some(m3)) => {
                let sd = v.sqrt();
                Some((m3 - 3.0 * m * v - m * m * m) / (sd * sd * sd))
            }
            _ => None,
        };
        let excess_kurtosis = match (mean, variance, skewness, mu(4)) {
            (Some(m), Some(v), Some(g1), Some(m4)) => {
                let sd = v.sqrt();
                let num = m4 - 3.0 * v * v - 4.0 * g1 * sd * sd * sd * m - 6.0 * v * m * m - m.powi(4);
                Some(num / (v * v))
            }
            _ => None,
        };
        MomentSummary {
            mean,
            variance,
            skewness,
            excess_kurtosis,
        }
    }

    /// `n` independent draws by inverse-transform sampling. The same seed
    /// always yields the same draws.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile_at(u)
            })
            .collect())
    }

    // Unchecked kernels. Callers guarantee x >= 0 (x > 0 for ln_pdf_at) and
    // 0 < u < 1.

    #[inline]
    pub(crate) fn stretched(&self, x: f64) -> f64 {
        self.beta * x.powf(self.alpha)
    }

    #[inline]
    pub(crate) fn ccdf_at(&self, x: f64) -> f64 {
        (-ln_exp_k(self.stretched(x), self.k())).exp()
    }

    #[inline]
    pub(crate) fn cdf_at(&self, x: f64) -> f64 {
        -(-ln_exp_k(self.stretched(x), self.k())).exp_m1()
    }

    #[inline]
    pub(crate) fn ln_pdf_at(&self, x: f64) -> f64 {
        self.ln_pdf_from_ln_x(x.ln())
    }

    #[inline]
    pub(crate) fn ln_pdf_from_ln_x(&self, ln_x: f64) -> f64 {
        let k = self.k();
        let y = self.beta * (self.alpha * ln_x).exp();
        let z = k * y;
        let half_ln_1p_z2 = if z < 1e150 { 0.5 * (z * z).ln_1p() } else { z.ln() };
        self.alpha.ln() + self.beta.ln() + (self.alpha - 1.0) * ln_x - ln_exp_k(y, k) - half_ln_1p_z2
    }

    #[inline]
    pub(crate) fn quantile_at(&self, u: f64) -> f64 {
        let ln_y = -(-u).ln_1p();
        (ln_k_from_ln(ln_y, self.k()) / self.beta).powf(1.0 / self.alpha)
    }
}

fn check_support(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return domain(format!("x must be nonnegative, got {x}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use kappa_oracles::{bisect, derivative, golden_max};
    use std::f64::consts::{E, LN_2, PI};

    fn p(a: f64, b: f64, k: f64) -> KappaParams {
        KappaParams::new(a, b, k).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KappaParams::new(0.0, 1.0, 0.1).is_err());
        assert!(KappaParams::new(1.0, -1.0, 0.1).is_err());
        assert!(KappaParams::new(1.0, 1.0, 1.0).is_err());
        assert!(KappaParams::new(f64::NAN, 1.0, 0.1).is_err());
        let bad: std::result::Result<KappaParams, _> =
            serde_json::from_str(r#"{"alpha":1.0,"beta":1.0,"kappa":1.5}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn ccdf_examples() {
        assert_eq!(p(2.3, 0.7, 0.4).ccdf(0.0).unwrap(), 1.0);
        assert!((p(1.0, 1.0, 0.0).ccdf(1.0).unwrap() - (-1f64).exp()).abs() < 1e-16);
        // 40-digit reference for exp_0.5(-4)
        let v = p(2.0, 1.0, 0.5).ccdf(2.0).unwrap();
        assert!((v - 0.055_728_090_000_841_214_363_305_325).abs() < 1e-15);
        assert!(p(1.0, 1.0, 0.3).ccdf(-1.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(p(2.3, 0.7, 0.4).cdf(0.0).unwrap(), 0.0);
        assert!((p(1.0, 1.0, 0.0).cdf(LN_2).unwrap() - 0.5).abs() < 1e-15);
        let q = p(1.7, 1.3, 0.35);
        assert!((q.cdf(q.quantile(0.75).unwrap()).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn pdf_examples() {
        assert!((p(2.0, 1.0, 0.0).pdf(1.0).unwrap() - 2.0 / E).abs() < 1e-15);
        let d = p(2.0, 1.0, 0.5);
        assert_eq!(d.pdf(0.0).unwrap(), 0.0);
        assert!(d.pdf(1e-12).unwrap() < 1e-11);
        let fd = derivative(|x| d.cdf(x).unwrap(), 1.0, 1e-4);
        assert!((d.pdf(1.0).unwrap() - fd).abs() < 1e-6);
        // 40-digit reference
        assert!((d.pdf(1.0).unwrap() - 0.683_281_572_999_747_635_691).abs() < 1e-14);
        assert_eq!(p(1.0, 2.5, 0.3).pdf(0.0).unwrap(), 2.5);
        assert_eq!(p(0.7, 2.5, 0.3).pdf(0.0).unwrap(), f64::INFINITY);
        assert!(d.pdf(-1.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        let d = p(2.0, 1.0, 0.5);
        let ln_k2 = 2f64.sqrt() - 1.0 / 2f64.sqrt();
        assert!((d.quantile(0.5).unwrap() - ln_k2.sqrt()).abs() < 1e-15);
        assert!((d.quantile(0.5).unwrap() - 0.840_896_415_253_714_5).abs() < 1e-15);
        assert!((p(1.0, 1.0, 0.0).quantile(1.0 - (-1f64).exp()).unwrap() - 1.0).abs() < 1e-14);

        let h = p(2.2, 0.9, 0.7);
        let x = h.quantile(0.99).unwrap();
        let root = bisect(|x| h.cdf(x).unwrap() - 0.99, 0.0, 100.0);
        assert!((x - root).abs() < 1e-10 * root);
        assert!((h.cdf(x).unwrap() - 0.99).abs() < 1e-10);
        assert!((x - 3.894_283_322_655_548_271).abs() < 1e-12);

        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(f64::NAN).is_err());
    }

    #[test]
    fn median_examples() {
        assert!((p(1.0, 1.0, 0.0).median() - LN_2).abs() < 1e-16);
        assert!((p(2.0, 1.0, 0.5).median() - 0.840_896_415_253_714_5).abs() < 1e-15);
        let d = p(1.5, 2.0, 0.3);
        assert_eq!(d.median(), d.quantile(0.5).unwrap());
    }

    #[test]
    fn mode_examples() {
        let m = p(0.8, 1.0, 0.3).mode();
        assert!(m.zero_modal);
        assert_eq!(m.location, 0.0);
        assert!(p(1.0, 1.0, 0.3).mode().zero_modal);

        let w = p(2.0, 1.0, 0.0).mode();
        let argmax = golden_max(|x| p(2.0, 1.0, 0.0).pdf(x).unwrap(), 0.01, 3.0, 1e-12);
        assert!((w.location - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((w.location - argmax).abs() < 1e-6);

        let d = p(2.0, 1.0, 0.5);
        let argmax = golden_max(|x| d.ln_pdf(x).unwrap(), 0.01, 3.0, 1e-14);
        let m = d.mode();
        assert!(!m.numeric_fallback);
        assert!((m.location - argmax).abs() < 1e-8, "{} vs {argmax}", m.location);
        // 40-digit root of the density derivative
        assert!((m.location - 0.679_183_807_807_413_257_449).abs() < 1e-13);
    }

    #[test]
    fn mode_closed_form_matches_root_on_grid() {
        for &a in &[1.05, 1.5, 2.0, 3.0, 7.0] {
            for &k in &[0.0, 1e-6, 0.01, 0.3, 0.6, 0.95] {
                let d = p(a, 0.8, k);
                let closed = d.mode_t_closed_form();
                let root = d.mode_t_bisection();
                assert!(((closed - root) / root).abs() < 1e-12, "a={a} k={k}");
                assert!(!d.mode().numeric_fallback);
            }
        }
    }

    #[test]
    fn mode_is_global_maximum() {
        for &(a, k) in &[(1.3, 0.2), (2.0, 0.7), (4.0, 0.5)] {
            let d = p(a, 1.2, k);
            let at_mode = d.pdf(d.mode().location).unwrap();
            for i in 1..5000 {
                let x = i as f64 * 1e-3;
                assert!(d.pdf(x).unwrap() <= at_mode * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn raw_moment_examples() {
        assert!((p(2.0, 1.0, 0.0).raw_moment(2).unwrap().unwrap() - 1.0).abs() < 1e-14);
        let half_sqrt_pi = 0.5 * PI.sqrt();
        assert!((p(2.0, 1.0, 0.0).raw_moment(1).unwrap().unwrap() - half_sqrt_pi).abs() < 1e-14);
        // 40-digit reference for the integral of x pdf(x)
        let v = p(2.0, PI / 4.0, 0.5).raw_moment(1).unwrap().unwrap();
        assert!((v - 1.081_565_184_107_655_566_39).abs() < 1e-13);
        assert!(p(2.0, 1.0, 0.5).raw_moment(0).is_err());
        // kappa < alpha / r boundary
        let d = p(1.0, 1.0, 0.5);
        assert!(d.raw_moment(1).unwrap().is_some());
        assert!(d.raw_moment(2).unwrap().is_none());
    }

    #[test]
    fn moment_summary_examples() {
        let w = p(2.0, 1.0, 0.0).moment_summary();
        assert!((w.variance.unwrap() - (1.0 - PI / 4.0)).abs() < 1e-14);

        let e = p(1.0, 1.0, 0.0).moment_summary();
        assert!((e.mean.unwrap() - 1.0).abs() < 1e-14);
        assert!((e.variance.unwrap() - 1.0).abs() < 1e-14);
        assert!((e.skewness.unwrap() - 2.0).abs() < 1e-12);
        assert!((e.excess_kurtosis.unwrap() - 6.0).abs() < 1e-11);

        // alpha 2.5, kappa 0.4, unit-mean beta; 40-digit quadrature references
        let d = KappaParams::with_unit_mean(2.5, 0.4).unwrap();
        let s = d.moment_summary();
        assert!((s.mean.unwrap() - 1.0).abs() < 1e-12);
        assert!((s.variance.unwrap() / 0.233_728_687_742_141_490_47 - 1.0).abs() < 1e-10);
        assert!((s.skewness.unwrap() / 1.179_888_850_474_828_323_58 - 1.0).abs() < 1e-9);
        assert!((s.excess_kurtosis.unwrap() / 4.754_343_985_737_910_636_92 - 1.0).abs() < 1e-8);

        let heavy = p(1.0, 1.0, 0.4).moment_summary();
        assert!(heavy.mean.is_some() && heavy.variance.is_some());
        assert!(heavy.skewness.is_none() && heavy.excess_kurtosis.is_none());
    }

    #[test]
    fn sample_is_deterministic_and_positive() {
        let d = p(1.8, 1.1, 0.45);
        let a = d.sample(5, 42).unwrap();
        assert_eq!(a, d.sample(5, 42).unwrap());
        assert_ne!(a, d.sample(5, 43).unwrap());
        assert!(a.iter().all(|&x| x > 0.0));
        assert!(d.sample(0, 1).is_err());
    }

    #[test]
    fn exponential_sample_mean() {
        let xs = p(1.0, 1.0, 0.0).sample(1_000_000, 1).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 3e-3, "{mean}");
    }
}
