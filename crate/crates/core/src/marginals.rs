//! Per-port marginal laws.
//!
//! Under Rayleigh fading the SNR and INR at a port are exponential; their
//! sum is hypoexponential. The `asym_*` forms are the first-order Taylor
//! expansions used for the high-SNR analysis, clipped into `[0, 1]`.
//!
//! Everything here is linear scale.

use crate::error::{Error, Result};

/// Average SNR and average INR at one receiver, linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    avg_snr: f64,
    avg_inr: f64,
}

impl LinkBudget {
    pub fn new(avg_snr: f64, avg_inr: f64) -> Result<Self> {
        if !(avg_snr > 0.0 && avg_snr.is_finite()) {
            return Err(Error::domain(format!("average SNR must be positive, got {avg_snr}")));
        }
        if !(avg_inr > 0.0 && avg_inr.is_finite()) {
            return Err(Error::domain(format!("average INR must be positive, got {avg_inr}")));
        }
        Ok(LinkBudget { avg_snr, avg_inr })
    }

    pub fn from_db(snr_db: f64, inr_db: f64) -> Result<Self> {
        Self::new(crate::db_to_linear(snr_db), crate::db_to_linear(inr_db))
    }

    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }

    pub fn avg_inr(&self) -> f64 {
        self.avg_inr
    }

    /// Mean of SNR + INR.
    pub fn avg_sum(&self) -> f64 {
        self.avg_snr + self.avg_inr
    }

    /// `avg_snr - avg_inr`, negative under strong interference.
    pub fn delta(&self) -> f64 {
        self.avg_snr - self.avg_inr
    }

    pub fn is_strong_interference(&self) -> bool {
        self.avg_inr > self.avg_snr
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("argument must be nonnegative, got {x}")))
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if mean > 0.0 && mean.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("mean must be positive and finite, got {mean}")))
    }
}

pub fn exp_pdf(x: f64, mean: f64) -> Result<f64> {
    check_x(x)?;
    check_mean(mean)?;
    Ok((-x / mean).exp() / mean)
}

pub fn exp_cdf(x: f64, mean: f64) -> Result<f64> {
    check_x(x)?;
    check_mean(mean)?;
    Ok(-(-x / mean).exp_m1())
}

/// Rates closer than this (relative) use the Erlang-2 limit.
const ERLANG_THRESHOLD: f64 = 1e-9;

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() < ERLANG_THRESHOLD * a.max(b)
}

/// Density of the sum of independent exponentials with means `snr` and `inr`.
pub fn hypoexp_pdf(x: f64, snr: f64, inr: f64) -> Result<f64> {
    check_x(x)?;
    check_mean(snr)?;
    check_mean(inr)?;
    if nearly_equal(snr, inr) {
        return Ok(x * (-x / snr).exp() / (snr * snr));
    }
    // lam t e^{-lam t} mu phi(d t) with lam the smaller rate and phi(y) = (1 - e^{-y}) / y
    let (lam, mu) = rates(snr, inr);
    let y = (mu - lam) * x;
    let phi = if y > 0.0 { -(-y).exp_m1() / y } else { 1.0 };
    Ok(lam * mu * x * (-lam * x).exp() * phi)
}

/// CDF of the sum of independent exponentials with means `snr` and `inr`.
pub fn hypoexp_cdf(x: f64, snr: f64, inr: f64) -> Result<f64> {
    check_x(x)?;
    check_mean(snr)?;
    check_mean(inr)?;
    if nearly_equal(snr, inr) {
        return Ok(erlang2_cdf(x / snr).clamp(0.0, 1.0));
    }
    // Erlang part plus a nonnegative correction, so neither tails nor
    // nearly equal means cancel:
    // F = E2(lam x) + lam x e^{-lam x} (e^{-y} - 1 + y) / y,  y = (mu - lam) x
    let (lam, mu) = rates(snr, inr);
    let s = lam * x;
    let y = (mu - lam) * x;
    let corr = if y > 0.0 { s * (-s).exp() * exp_remainder(y) / y } else { 0.0 };
    Ok((erlang2_cdf(s) + corr).clamp(0.0, 1.0))
}

/// Rates `(1/max, 1/min)` of the two exponential terms.
fn rates(a: f64, b: f64) -> (f64, f64) {
    (1.0 / a.max(b), 1.0 / a.min(b))
}

/// `e^{-s} - 1 + s`, accurate for small `s`.
fn exp_remainder(s: f64) -> f64 {
    if s < 0.1 {
        let mut term = s * s / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            k += 1.0;
            term *= -s / k;
            if k > 40.0 {
                break;
            }
        }
        sum
    } else {
        (-s).exp_m1() + s
    }
}

/// `1 - e^{-s}(1 + s)`.
fn erlang2_cdf(s: f64) -> f64 {
    if s < 0.1 {
        // sum_{k>=2} (-1)^k (k-1) s^k / k!
        let mut sum = 0.0;
        let mut pow_over_fact = s * s / 2.0;
        for k in 2..40 {
            let kf = k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (kf - 1.0) * pow_over_fact;
            pow_over_fact *= s / (kf + 1.0);
            if pow_over_fact < 1e-20 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        -(-s).exp_m1() - s * (-s).exp()
    }
}

/// High-SNR exponential CDF, `min(x / mean, 1)`.
pub fn asym_exp_cdf(x: f64, mean: f64) -> Result<f64> {
    check_x(x)?;
    check_mean(mean)?;
    Ok((x / mean).min(1.0))
}

/// High-SNR hypoexponential CDF, `(x + inr e^{-x/inr}) / (snr - inr)`
/// clipped into `[0, 1]`.
///
/// Only meaningful when `snr >> x`. Under strong interference
/// (`inr > snr`) the raw value is negative and clips to 0.
pub fn asym_hypoexp_cdf(x: f64, snr: f64, inr: f64) -> Result<f64> {
    check_x(x)?;
    check_mean(snr)?;
    check_mean(inr)?;
    let raw = (x + inr * (-x / inr).exp()) / (snr - inr);
    if raw.is_nan() {
        return Ok(0.0);
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// A per-port marginal law, as used by the copula and metric layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Exponential { mean: f64 },
    Hypoexponential { snr: f64, inr: f64 },
    AsymExponential { mean: f64 },
    AsymHypoexponential { snr: f64, inr: f64 },
}

impl Marginal {
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match *self {
            Marginal::Exponential { mean } => exp_cdf(x, mean),
            Marginal::Hypoexponential { snr, inr } => hypoexp_cdf(x, snr, inr),
            Marginal::AsymExponential { mean } => asym_exp_cdf(x, mean),
            Marginal::AsymHypoexponential { snr, inr } => asym_hypoexp_cdf(x, snr, inr),
        }
    }

    /// Density of the exact laws; the clipped linearizations have none.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        match *self {
            Marginal::Exponential { mean } => exp_pdf(x, mean),
            Marginal::Hypoexponential { snr, inr } => hypoexp_pdf(x, snr, inr),
            _ => Err(Error::domain("asymptotic marginals have no density")),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Exponential { mean } | Marginal::AsymExponential { mean } => mean,
            Marginal::Hypoexponential { snr, inr } | Marginal::AsymHypoexponential { snr, inr } => snr + inr,
        }
    }
}
