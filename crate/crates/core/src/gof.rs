//! Goodness of fit: one-sided Kolmogorov-Smirnov statistic with the Stephens
//! tail approximation, Q-Q pairs, and percentile-bootstrap intervals for the
//! empirical Gini coefficient.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::KappaParams;
use crate::error::{domain, Result};
use crate::inequality::{empirical_gini, gini, gini_of_sorted};
use crate::ingest::WeightedSample;
use crate::kexp::ln_exp_k;

/// `x_k = (1/k) ln(sqrt(1 + b^2 k^2 x^(2a)) + b k x^a)`, so that
/// `exp(-x_k) = P(X > x)`. Maps model variates to unit exponentials.
pub fn exp_transform(p: &KappaParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("x must be nonnegative, got {x}"));
    }
    Ok(ln_exp_k(p.stretched(x), p.k()))
}

/// `D+ = max_i [F_n(x_i) - F(x_i)]`, with `F_n(x_i)` the cumulative weight
/// share through the i-th smallest observation (`i/n` for unit weights).
pub fn ks_statistic(p: &KappaParams, s: &WeightedSample) -> f64 {
    let total: f64 = s.weights().iter().sum();
    let mut cum = 0.0;
    let mut d = f64::NEG_INFINITY;
    for (&x, &w) in s.incomes().iter().zip(s.weights()) {
        cum += w;
        d = d.max(cum / total - p.cdf_at(x));
    }
    d.clamp(0.0, 1.0)
}

/// Stephens' finite-sample scaling `D+ (sqrt(n) + 0.12 + 0.11 / sqrt(n))`.
pub fn t_star(d_plus: f64, n: usize) -> f64 {
    let rn = (n.max(1) as f64).sqrt();
    d_plus * (rn + 0.12 + 0.11 / rn)
}

/// Upper-tail significance `exp(-2 T*^2)`.
///
/// Parameters estimated from the same data are not accounted for.
pub fn ks_pvalue(d_plus: f64, n: usize) -> f64 {
    if d_plus <= 0.0 {
        return 1.0;
    }
    let t = t_star(d_plus, n);
    (-2.0 * t * t).exp().clamp(0.0, 1.0)
}

/// `(x_(i), Q(i / (n + 1)))` for the sorted sample.
pub fn qq_points(p: &KappaParams, s: &WeightedSample) -> Result<Vec<(f64, f64)>> {
    let n = s.len();
    if n < 2 {
        return domain("a Q-Q plot needs at least two observations");
    }
    Ok(s.incomes()
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, p.quantile_at((i + 1) as f64 / (n + 1) as f64)))
        .collect())
}

pub fn qq_tsv(pairs: &[(f64, f64)]) -> String {
    let mut out = String::from("sample_quantile\tmodel_quantile\n");
    for (a, b) in pairs {
        let _ = writeln!(out, "{a}\t{b}");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replications: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

pub const MIN_REPLICATIONS: usize = 100;

/// Percentile-bootstrap interval for the empirical Gini.
///
/// Records are resampled uniformly with replacement and keep their survey
/// weights. Replication `r` draws from ChaCha stream `r` of `seed`, so the
/// result does not depend on thread count or scheduling.
pub fn bootstrap_gini_ci(s: &WeightedSample, replications: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    let reps = bootstrap_gini_replicates(s, replications, level, seed)?;
    if reps.is_empty() {
        return Ok((0.0, 0.0));
    }
    let lo = percentile(&reps, 0.5 * (1.0 - level));
    let hi = percentile(&reps, 0.5 * (1.0 + level));
    Ok((lo, hi))
}

/// Sorted replicate Ginis; empty for a degenerate (all-equal) sample.
pub fn bootstrap_gini_replicates(
    s: &WeightedSample,
    replications: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if replications < MIN_REPLICATIONS {
        return domain(format!("at least {MIN_REPLICATIONS} replications are required, got {replications}"));
    }
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("confidence level must lie in (0, 1), got {level}"));
    }
    let xs = s.incomes();
    if xs[0] == xs[xs.len() - 1] {
        return Ok(Vec::new());
    }
    let ws = s.weights();
    let n = xs.len();
    let mut reps: Vec<f64> = (0..replications)
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], vec![0.0; n]),
            |(counts, eff), r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                counts.iter_mut().for_each(|c| *c = 0);
                for _ in 0..n {
                    counts[rng.gen_range(0..n)] += 1;
                }
                // The sample is sorted, so multiplicities give a sorted resample.
                for i in 0..n {
                    eff[i] = counts[i] as f64 * ws[i];
                }
                gini_of_sorted(xs, eff)
            },
        )
        .collect();
    reps.sort_by(f64::total_cmp);
    Ok(reps)
}

/// Linear-interpolation percentile of sorted values.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub ks_d_plus: f64,
    pub t_star: f64,
    pub p_value: f64,
    pub qq_pairs: Vec<(f64, f64)>,
    pub gini_empirical: f64,
    pub gini_theoretical: f64,
    pub gini_ci: (f64, f64),
    pub ci_level: f64,
    pub bootstrap_replications: usize,
}

/// Full goodness-of-fit summary for fixed parameters. The parameters are not
/// re-estimated within bootstrap replications.
pub fn gof_report(p: &KappaParams, s: &WeightedSample, boot: &BootstrapConfig) -> Result<GofReport> {
    let d = ks_statistic(p, s);
    let n = s.len();
    Ok(GofReport {
        ks_d_plus: d,
        t_star: t_star(d, n),
        p_value: ks_pvalue(d, n),
        qq_pairs: qq_points(p, s)?,
        gini_empirical: empirical_gini(s),
        gini_theoretical: gini(p)?,
        gini_ci: bootstrap_gini_ci(s, boot.replications, boot.level, boot.seed)?,
        ci_level: boot.level,
        bootstrap_replications: boot.replications,
    })
}
