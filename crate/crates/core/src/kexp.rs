//! Deformed exponential and logarithm.
//!
//! `exp_k(x) = (sqrt(1 + k^2 x^2) + k x)^(1/k)` is evaluated as
//! `exp(asinh(k x) / k)`, which avoids the cancellation in
//! `sqrt(1 + k^2 x^2) + k x` for large negative `x`. The inverse is
//! `ln_k(y) = (y^k - y^-k) / (2k) = sinh(k ln y) / k`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Below this deformation the ordinary exponential and logarithm are used.
/// The deformed formulas are 0/0 at `k = 0`.
pub const KAPPA_ZERO_THRESHOLD: f64 = 1e-8;

/// Deformation parameter, `0 <= kappa < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    pub const ZERO: Kappa = Kappa(0.0);

    pub fn new(kappa: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) {
            return domain(format!("kappa must lie in [0, 1), got {kappa}"));
        }
        Ok(Kappa(kappa))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_classical(self) -> bool {
        self.0 < KAPPA_ZERO_THRESHOLD
    }
}

impl TryFrom<f64> for Kappa {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Kappa::new(value)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

/// The kappa-exponential. Always positive; `kappa_exp(0, k) = 1`.
pub fn kappa_exp(x: f64, kappa: Kappa) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("kappa_exp argument must be finite, got {x}"));
    }
    Ok(exp_k(x, kappa.0))
}

/// The kappa-logarithm, inverse of [`kappa_exp`] on `(0, inf)`.
pub fn kappa_log(y: f64, kappa: Kappa) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return domain(format!("kappa_log argument must be positive and finite, got {y}"));
    }
    Ok(ln_k(y, kappa.0))
}

/// `ln(exp_k(x))`, i.e. `asinh(k x) / k`.
#[inline]
pub(crate) fn ln_exp_k(x: f64, k: f64) -> f64 {
    if k < KAPPA_ZERO_THRESHOLD {
        x
    } else {
        (k * x).asinh() / k
    }
}

#[inline]
pub(crate) fn exp_k(x: f64, k: f64) -> f64 {
    ln_exp_k(x, k).exp()
}

#[inline]
pub(crate) fn ln_k(y: f64, k: f64) -> f64 {
    ln_k_from_ln(y.ln(), k)
}

/// `ln_k(y)` given `ln y`, so callers holding `ln(1/(1-u)) = -ln_1p(-u)` keep
/// full precision for small `u`.
#[inline]
pub(crate) fn ln_k_from_ln(ln_y: f64, k: f64) -> f64 {
    if k < KAPPA_ZERO_THRESHOLD {
        ln_y
    } else {
        (k * ln_y).sinh() / k
    }
}
