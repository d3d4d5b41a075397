//! Maximum-likelihood fitting under the unit-mean constraint.
//!
//! With incomes normalized to mean 1, `beta` is a closed-form function of
//! `(alpha, kappa)`, so the constrained three-parameter problem becomes a
//! bounded two-parameter search. The search is a multi-start Nelder-Mead on
//! the weighted mean log-likelihood.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::distribution::KappaParams;
use crate::error::{domain, Error, Result};
use crate::ingest::{neumaier_sum, WeightedSample};
use crate::kexp::KAPPA_ZERO_THRESHOLD;
use crate::simplex::{minimize, SimplexConfig};
use crate::special::ln_gamma_ratio_unchecked;

/// `beta` giving mean 1 for the given shape and deformation.
pub fn beta_from(alpha: f64, kappa: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    if !(0.0..1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1), got {kappa}"));
    }
    if kappa >= alpha {
        return domain(format!(
            "mean does not exist for kappa >= alpha ({kappa} >= {alpha})"
        ));
    }
    Ok(beta_from_unchecked(alpha, kappa))
}

fn beta_from_unchecked(alpha: f64, kappa: f64) -> f64 {
    let inv_a = 1.0 / alpha;
    if kappa < KAPPA_ZERO_THRESHOLD {
        return (alpha * ln_gamma(1.0 + inv_a)).exp();
    }
    let h = 0.5 / kappa;
    let inner = ln_gamma(inv_a) - (kappa + alpha).ln()
        + ln_gamma_ratio_unchecked(h - 0.5 * inv_a, h + 0.5 * inv_a);
    (alpha * inner - (2.0 * kappa).ln()).exp()
}

/// `sum_i w_i ln pdf(x_i)`.
pub fn log_likelihood(params: &KappaParams, sample: &WeightedSample) -> f64 {
    neumaier_sum(
        sample
            .incomes()
            .iter()
            .zip(sample.weights())
            .map(|(&x, &w)| w * params.ln_pdf_at(x)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub alpha_bounds: (f64, f64),
    pub kappa_bounds: (f64, f64),
    /// Multi-start initial `(alpha, kappa)` pairs.
    pub starts: Vec<(f64, f64)>,
    /// Tolerance on the mean log-likelihood per unit weight.
    pub loglik_tol: f64,
    pub param_tol: f64,
    pub max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        let mut starts = Vec::with_capacity(9);
        for a in [1.0, 2.0, 3.0] {
            for k in [0.1, 0.4, 0.7] {
                starts.push((a, k));
            }
        }
        FitConfig {
            alpha_bounds: (0.05, 20.0),
            kappa_bounds: (0.0, 1.0 - 1e-6),
            starts,
            loglik_tol: 1e-9,
            param_tol: 1e-7,
            max_iter: 500,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let (alo, ahi) = self.alpha_bounds;
        let (klo, khi) = self.kappa_bounds;
        if !(alo > 0.0 && alo < ahi && ahi.is_finite()) {
            return domain(format!("invalid alpha bounds [{alo}, {ahi}]"));
        }
        if !(klo >= 0.0 && klo < khi && khi < 1.0) {
            return domain(format!("invalid kappa bounds [{klo}, {khi}]"));
        }
        if self.starts.is_empty() {
            return domain("at least one starting point is required");
        }
        if !(self.loglik_tol > 0.0 && self.param_tol > 0.0) || self.max_iter == 0 {
            return domain("tolerances and iteration limit must be positive");
        }
        Ok(())
    }
}

/// Outcome of one start of the multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartDiagnostic {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: KappaParams,
    pub log_likelihood: f64,
    /// Sum of weights.
    pub n_effective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `|E[X] - 1|` under the fitted parameters.
    pub constraint_residual: f64,
    pub starts: Vec<StartDiagnostic>,
}

/// Minimum number of observations accepted by [`fit`].
pub const MIN_FIT_SIZE: usize = 10;

pub fn fit(sample: &WeightedSample, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if sample.len() < MIN_FIT_SIZE {
        return domain(format!(
            "fitting needs at least {MIN_FIT_SIZE} observations, got {}",
            sample.len()
        ));
    }
    let mean = sample.weighted_mean();
    if (mean - 1.0).abs() > 1e-9 {
        return domain(format!("sample must be normalized to weighted mean 1, got {mean}"));
    }

    let total_w = sample.total_weight();
    let ln_x: Vec<f64> = sample.incomes().iter().map(|x| x.ln()).collect();
    let weights = sample.weights();
    let objective = |theta: &[f64; 2]| -> f64 {
        let (alpha, kappa) = (theta[0], theta[1]);
        if kappa >= alpha {
            return f64::INFINITY;
        }
        let beta = beta_from_unchecked(alpha, kappa);
        let Ok(p) = KappaParams::new(alpha, beta, kappa) else {
            return f64::INFINITY;
        };
        let ll = neumaier_sum(ln_x.iter().zip(weights).map(|(&lx, &w)| w * p.ln_pdf_from_ln_x(lx)));
        -ll / total_w
    };

    let simplex = SimplexConfig {
        lower: [cfg.alpha_bounds.0, cfg.kappa_bounds.0],
        upper: [cfg.alpha_bounds.1, cfg.kappa_bounds.1],
        step: [0.25, 0.1],
        f_tol: cfg.loglik_tol,
        x_tol: cfg.param_tol,
        max_iter: cfg.max_iter,
        restarts: 2,
    };

    let runs: Vec<_> = cfg
        .starts
        .par_iter()
        .map(|&(a, k)| (a, k, minimize(objective, [a, k], &simplex)))
        .collect();

    let starts: Vec<StartDiagnostic> = runs
        .iter()
        .map(|(a, k, out)| StartDiagnostic {
            start: (*a, *k),
            end: (out.x[0], out.x[1]),
            log_likelihood: -out.value * total_w,
            iterations: out.iterations,
            converged: out.converged && out.value.is_finite(),
        })
        .collect();

    let best = starts
        .iter()
        .filter(|s| s.converged)
        .fold(None::<&StartDiagnostic>, |acc, s| match acc {
            Some(b) if b.log_likelihood >= s.log_likelihood => Some(b),
            _ => Some(s),
        });
    let Some(best) = best else {
        return Err(Error::FitFailure {
            message: format!("none of {} starts converged", starts.len()),
            diagnostics: starts,
        });
    };

    let (alpha, kappa) = best.end;
    let params = KappaParams::with_unit_mean(alpha, kappa)?;
    let fitted_mean = params.raw_moment(1)?.unwrap_or(f64::INFINITY);
    Ok(FitResult {
        params,
        log_likelihood: log_likelihood(&params, sample),
        n_effective: total_w,
        converged: true,
        iterations: best.iterations,
        constraint_residual: (fitted_mean - 1.0).abs(),
        starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use kappa_oracles::{integrate_to_infinity, naive_log_likelihood};
    use std::f64::consts::PI;

    #[test]
    fn beta_examples() {
        assert!((beta_from(1.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_from(1.0, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!((beta_from(2.0, 0.0).unwrap() - PI / 4.0).abs() < 1e-14);
        // 40-digit reference
        let b = beta_from(2.0, 0.5).unwrap();
        assert!((b - 0.918_745_614_139_046_397_211).abs() < 1e-14);
        let p = KappaParams::new(2.0, b, 0.5).unwrap();
        let q = integrate_to_infinity(|x| x * p.pdf(x).unwrap(), 0.0, 1e-14, 1e-13);
        assert!((q.value - 1.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn beta_domain() {
        assert!(beta_from(0.5, 0.5).is_err());
        assert!(beta_from(0.5, 0.7).is_err());
        assert!(beta_from(-1.0, 0.1).is_err());
        assert!(beta_from(2.0, 1.0).is_err());
    }

    #[test]
    fn beta_is_continuous_at_classical_limit() {
        for &a in &[0.7, 1.0, 2.0, 3.5] {
            let lim = beta_from(a, 0.0).unwrap();
            let near = beta_from(a, 1e-6).unwrap();
            assert!(((near - lim) / lim).abs() < 1e-5, "alpha {a}");
        }
    }

    #[test]
    fn unit_mean_everywhere() {
        for &a in &[0.6, 1.0, 1.7, 2.5, 4.0, 9.0] {
            for &k in &[0.0, 1e-7, 0.05, 0.3, 0.55] {
                if k >= a {
                    continue;
                }
                let p = KappaParams::with_unit_mean(a, k).unwrap();
                let m = p.raw_moment(1).unwrap().unwrap();
                assert!((m - 1.0).abs() < 1e-10, "a={a} k={k} m={m}");
            }
        }
    }

    #[test]
    fn single_exponential_observation() {
        let s = WeightedSample::unweighted(vec![1.0]).unwrap();
        let p = KappaParams::new(1.0, 1.0, 0.0).unwrap();
        assert!((log_likelihood(&p, &s) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_in_weights() {
        let p = KappaParams::new(1.6, 0.8, 0.3).unwrap();
        let xs = p.sample(200, 3).unwrap();
        let ws: Vec<f64> = (0..200).map(|i| 0.5 + (i % 7) as f64).collect();
        let s1 = WeightedSample::new(xs.clone(), ws.clone()).unwrap();
        let s2 = WeightedSample::new(xs, ws.iter().map(|w| 2.0 * w).collect()).unwrap();
        let (a, b) = (log_likelihood(&p, &s1), log_likelihood(&p, &s2));
        assert!((b - 2.0 * a).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn matches_naive_summation() {
        let p = KappaParams::new(2.2, 1.1, 0.45).unwrap();
        let xs = p.sample(1000, 11).unwrap();
        let s = WeightedSample::unweighted(xs.clone()).unwrap();
        let naive = naive_log_likelihood(&xs, &vec![1.0; xs.len()], |x| {
            // the printed product form, term by term
            let k = 0.45;
            let y = 1.1 * x.powf(2.2);
            2.2 * 1.1 * x.powf(1.2) * ((1.0 + k * k * y * y).sqrt() - k * y).powf(1.0 / k)
                / (1.0 + k * k * y * y).sqrt()
        });
        let v = log_likelihood(&p, &s);
        assert!(((v - naive) / naive).abs() < 1e-9, "{v} vs {naive}");
    }

    #[test]
    fn rejects_unnormalized_or_small_samples() {
        let s = WeightedSample::unweighted((1..=20).map(|i| i as f64).collect()).unwrap();
        assert!(matches!(fit(&s, &FitConfig::default()), Err(Error::Domain(_))));
        let small = WeightedSample::unweighted(vec![0.5, 1.5]).unwrap();
        assert!(matches!(fit(&small, &FitConfig::default()), Err(Error::Domain(_))));
        let bad = FitConfig {
            kappa_bounds: (0.0, 1.0),
            ..FitConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn budget_exhaustion_is_fit_failure() {
        let p = KappaParams::with_unit_mean(2.0, 0.6).unwrap();
        let s = WeightedSample::unweighted(p.sample(500, 5).unwrap()).unwrap().normalized();
        let cfg = FitConfig {
            max_iter: 2,
            ..FitConfig::default()
        };
        match fit(&s, &cfg) {
            Err(Error::FitFailure { diagnostics, .. }) => {
                assert_eq!(diagnostics.len(), 9);
                assert!(diagnostics.iter().all(|d| !d.converged));
            }
            other => panic!("expected fit failure, got {other:?}"),
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let p = KappaParams::with_unit_mean(1.8, 0.4).unwrap();
        let s = WeightedSample::unweighted(p.sample(2000, 9).unwrap()).unwrap().normalized();
        let a = fit(&s, &FitConfig::default()).unwrap();
        let b = fit(&s, &FitConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.constraint_residual < 1e-8);
    }
}
