//! Lorenz curve, Gini coefficient and coefficient of variation.

use std::fmt::Write as _;

use serde::Serialize;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::distribution::KappaParams;
use crate::error::{domain, Error, Result};
use crate::ingest::WeightedSample;
use crate::kexp::ln_k_from_ln;
use crate::special::{ln_gamma_ratio_unchecked, ln_incomplete_beta_split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LorenzSource {
    Theoretical,
    Empirical,
}

/// Ordered `(population share, income share)` pairs from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzPoints {
    pub points: Vec<(f64, f64)>,
    pub source: LorenzSource,
}

impl LorenzPoints {
    /// Two-column TSV with header `u\tL`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("u\tL\n");
        for (u, l) in &self.points {
            let _ = writeln!(out, "{u}\t{l}");
        }
        out
    }

    /// Area under the curve by the trapezoidal rule.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    /// Linear interpolation of `L` at population share `u`.
    pub fn interpolate(&self, u: f64) -> f64 {
        let i = self.points.partition_point(|p| p.0 < u);
        if i == 0 {
            return self.points[0].1;
        }
        if i >= self.points.len() {
            return self.points[self.points.len() - 1].1;
        }
        let (u0, l0) = self.points[i - 1];
        let (u1, l1) = self.points[i];
        if u1 == u0 {
            l1
        } else {
            l0 + (l1 - l0) * (u - u0) / (u1 - u0)
        }
    }
}

fn require_mean(p: &KappaParams) -> Result<()> {
    if !p.moment_exists(1) {
        return Err(Error::UndefinedMeasure(format!(
            "the mean is infinite for kappa >= alpha ({} >= {})",
            p.k(),
            p.alpha
        )));
    }
    Ok(())
}

/// Share of total income held by the poorest fraction `u` of the population.
pub fn lorenz(p: &KappaParams, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return domain(format!("population share must lie in [0, 1], got {u}"));
    }
    require_mean(p)?;
    Ok(lorenz_at(p, u))
}

fn lorenz_at(p: &KappaParams, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    if u == 1.0 {
        return 1.0;
    }
    let a = p.alpha;
    let inv_a = 1.0 / a;
    let ln_1mu = (-u).ln_1p();
    if p.kappa.is_classical() {
        // Weibull: regularized lower incomplete gamma at -ln(1 - u).
        return gamma_lr(1.0 + inv_a, -ln_1mu).clamp(0.0, u);
    }
    let k = p.k();
    let h = 0.5 / k;
    let s = h - 0.5 * inv_a;
    let big_x = (2.0 * k * ln_1mu).exp();
    let one_minus_x = -(2.0 * k * ln_1mu).exp_m1();

    let ln_c = (k * inv_a).ln_1p() - std::f64::consts::LN_2 - ln_gamma(inv_a)
        + ln_gamma_ratio_unchecked(h + 0.5 * inv_a, s);
    let ln_term1 = (2.0 * a).ln()
        + inv_a * (2.0 * k).ln()
        + ln_1mu
        + inv_a * ln_k_from_ln(-ln_1mu, k).ln();
    let ln_b1 = ln_incomplete_beta_split(big_x, one_minus_x, s, inv_a);
    let ln_b2 = ln_incomplete_beta_split(big_x, one_minus_x, s + 1.0, inv_a);
    let tail = (ln_c + ln_term1).exp() + (ln_c + ln_b1).exp() + (ln_c + ln_b2).exp();
    (1.0 - tail).clamp(0.0, u)
}

/// Theoretical curve on `u = i / segments`, `i = 0..=segments`.
pub fn lorenz_curve(p: &KappaParams, segments: usize) -> Result<LorenzPoints> {
    require_mean(p)?;
    if segments == 0 {
        return domain("at least one segment is required");
    }
    let points = (0..=segments)
        .map(|i| {
            let u = if i == segments { 1.0 } else { i as f64 / segments as f64 };
            (u, lorenz_at(p, u))
        })
        .collect();
    Ok(LorenzPoints {
        points,
        source: LorenzSource::Theoretical,
    })
}

/// Gini coefficient of the model; independent of `beta`.
pub fn gini(p: &KappaParams) -> Result<f64> {
    require_mean(p)?;
    let a = p.alpha;
    if p.kappa.is_classical() {
        return Ok(-(-(1.0 / a) * std::f64::consts::LN_2).exp_m1());
    }
    let k = p.k();
    let half_inv_a = 0.5 / a;
    let ln_prod = ((2.0 * a + 2.0 * k) / (2.0 * a + k)).ln()
        + ln_gamma_ratio_unchecked(1.0 / k - half_inv_a, 1.0 / k + half_inv_a)
        + ln_gamma_ratio_unchecked(0.5 / k + half_inv_a, 0.5 / k - half_inv_a);
    Ok(-ln_prod.exp_m1())
}

/// Standard deviation over mean; needs `kappa < alpha / 2`.
pub fn coeff_variation(p: &KappaParams) -> Result<f64> {
    if !p.moment_exists(2) {
        return Err(Error::UndefinedMeasure(format!(
            "the variance is infinite for kappa >= alpha / 2 ({} >= {})",
            p.k(),
            p.alpha / 2.0
        )));
    }
    let inv_a = 1.0 / p.alpha;
    let log_ratio = if p.kappa.is_classical() {
        ln_gamma(1.0 + 2.0 * inv_a) - 2.0 * ln_gamma(1.0 + inv_a)
    } else {
        let k = p.k();
        let h = 0.5 / k;
        let ln_second = ln_gamma(1.0 + 2.0 * inv_a) - (2.0 * k * inv_a).ln_1p()
            + ln_gamma_ratio_unchecked(h - inv_a, h + inv_a);
        let ln_first = ln_gamma(1.0 + inv_a) - (k * inv_a).ln_1p()
            + ln_gamma_ratio_unchecked(h - 0.5 * inv_a, h + 0.5 * inv_a);
        ln_second - 2.0 * ln_first
    };
    Ok(log_ratio.exp_m1().max(0.0).sqrt())
}

/// Cumulative weight share against cumulative weighted income share.
/// With unit weights the ordinates are `sum_{j<=i} x_j / sum_j x_j` at `i/n`.
pub fn empirical_lorenz(s: &WeightedSample) -> LorenzPoints {
    LorenzPoints {
        points: lorenz_ordinates(s.incomes(), s.weights()),
        source: LorenzSource::Empirical,
    }
}

pub(crate) fn lorenz_ordinates(xs: &[f64], ws: &[f64]) -> Vec<(f64, f64)> {
    let (total_w, total_s) = xs
        .iter()
        .zip(ws)
        .fold((0.0, 0.0), |(tw, ts), (x, w)| (tw + w, ts + w * x));
    let mut out = Vec::with_capacity(xs.len() + 1);
    out.push((0.0, 0.0));
    let (mut cw, mut cs) = (0.0, 0.0);
    for (x, w) in xs.iter().zip(ws) {
        cw += w;
        cs += w * x;
        out.push((cw / total_w, cs / total_s));
    }
    out
}

/// Empirical Gini coefficient.
///
/// Weighted rank form `sum_j w_j x_j (2 W_j - w_j - W) / (W S)`, where `W_j`
/// is the cumulative weight through observation `j`. This equals one minus
/// twice the trapezoidal area under [`empirical_lorenz`], and with unit
/// weights it is term-for-term `(1/(n^2 mu)) sum (2i - n - 1) x_i`.
pub fn empirical_gini(s: &WeightedSample) -> f64 {
    gini_of_sorted(s.incomes(), s.weights())
}

/// `xs` ascending; zero-weight entries are allowed and contribute nothing.
pub(crate) fn gini_of_sorted(xs: &[f64], ws: &[f64]) -> f64 {
    let (total_w, total_s) = xs
        .iter()
        .zip(ws)
        .fold((0.0, 0.0), |(tw, ts), (x, w)| (tw + w, ts + w * x));
    let mut cum_w = 0.0;
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        cum_w += w;
        acc += w * x * (2.0 * cum_w - w - total_w);
    }
    (acc / (total_w * total_s)).max(0.0)
}
