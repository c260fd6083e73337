//! System-level metrics of the two-user interference channel with
//! fluid-antenna receivers decoding both messages jointly.
//!
//! Receiver `i` sees its own link with average SNR `budget_i.avg_snr()` and
//! the cross link with average INR `budget_i.avg_inr()`. It activates the
//! port maximizing SNR for the individual-rate constraint and the port
//! maximizing SNR + INR for the sum-rate constraint. Receivers are
//! independent.

use crate::copula::{max_cdf_at_level, MvnEstimate, MvnSettings, Tolerance};
use crate::error::{Error, Result};
use crate::geometry::{CorrelationMatrix, PortGrid};
use crate::marginals::{LinkBudget, Marginal};

/// What to do with a receiver whose interference is not stronger than its signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferencePolicy {
    #[default]
    Error,
    Warn,
}

/// Both receivers with their port grids and link budgets.
#[derive(Debug, Clone)]
pub struct Scenario {
    grids: [PortGrid; 2],
    budgets: [LinkBudget; 2],
    corrs: [CorrelationMatrix; 2],
    mvn: MvnSettings,
    policy: InterferencePolicy,
}

impl Scenario {
    /// Strict scenario: every receiver must be in strong interference.
    pub fn new(grid1: PortGrid, grid2: PortGrid, budget1: LinkBudget, budget2: LinkBudget) -> Result<Self> {
        Self::with_policy(grid1, grid2, budget1, budget2, InterferencePolicy::Error)
    }

    pub fn with_policy(
        grid1: PortGrid,
        grid2: PortGrid,
        budget1: LinkBudget,
        budget2: LinkBudget,
        policy: InterferencePolicy,
    ) -> Result<Self> {
        for (i, b) in [budget1, budget2].iter().enumerate() {
            if !b.is_strong_interference() {
                let err = Error::StrongInterference {
                    receiver: i + 1,
                    avg_snr: b.avg_snr(),
                    avg_inr: b.avg_inr(),
                };
                match policy {
                    InterferencePolicy::Error => return Err(err),
                    InterferencePolicy::Warn => log::warn!("{err}"),
                }
            }
        }
        let corrs = [grid1.correlation_matrix()?, grid2.correlation_matrix()?];
        Ok(Scenario {
            grids: [grid1, grid2],
            budgets: [budget1, budget2],
            corrs,
            mvn: MvnSettings::new(Tolerance::adaptive(1e-4, 0.05, 1e-8), 0),
            policy,
        })
    }

    /// Same grid and budget at both receivers.
    pub fn symmetric(grid: PortGrid, budget: LinkBudget) -> Result<Self> {
        Self::new(grid, grid, budget, budget)
    }

    pub fn with_mvn(mut self, mvn: MvnSettings) -> Self {
        self.mvn = mvn;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.mvn.seed = seed;
        self
    }

    /// Receiver `i` in `1..=2`.
    pub fn grid(&self, i: usize) -> &PortGrid {
        &self.grids[i - 1]
    }

    pub fn budget(&self, i: usize) -> &LinkBudget {
        &self.budgets[i - 1]
    }

    pub fn corr(&self, i: usize) -> &CorrelationMatrix {
        &self.corrs[i - 1]
    }

    pub fn mvn(&self) -> &MvnSettings {
        &self.mvn
    }

    pub fn policy(&self) -> InterferencePolicy {
        self.policy
    }

    /// Receivers (1-based) not in strong interference.
    pub fn interference_violations(&self) -> Vec<usize> {
        (1..=2).filter(|&i| !self.budget(i).is_strong_interference()).collect()
    }
}

/// Individual rate thresholds in bits/s/Hz. The sum threshold is their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateThresholds {
    pub r1: f64,
    pub r2: f64,
}

impl RateThresholds {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::domain(format!("rate thresholds must be nonnegative, got ({r1}, {r2})")));
        }
        Ok(RateThresholds { r1, r2 })
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// How the sum-rate delivery threshold is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DorVariant {
    /// `exp((D1 + D2) ln2 / (B_sum T_sum)) - 1`, the same pattern as the individual thresholds.
    #[default]
    Derived,
    /// `exp((D1 + D2) ln2 / (B_sum T_sum))`, no `- 1`.
    Theorem,
    /// `exp(2 (D1 + D2) ln2 / (B_sum T_sum))`, no `- 1`.
    Proof,
}

/// Data sizes (bits), bandwidths (Hz) and deadlines (s) for the delay outage rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DorConfig {
    pub data1: f64,
    pub data2: f64,
    pub band1: f64,
    pub band2: f64,
    pub band_sum: f64,
    pub t1: f64,
    pub t2: f64,
    pub tsum: f64,
    pub variant: DorVariant,
}

impl DorConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(data1: f64, data2: f64, band1: f64, band2: f64, band_sum: f64, t1: f64, t2: f64, tsum: f64) -> Result<Self> {
        for (name, v) in [("data1", data1), ("data2", data2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be nonnegative, got {v}")));
            }
        }
        for (name, v) in [
            ("band1", band1),
            ("band2", band2),
            ("band_sum", band_sum),
            ("t1", t1),
            ("t2", t2),
            ("tsum", tsum),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(DorConfig {
            data1,
            data2,
            band1,
            band2,
            band_sum,
            t1,
            t2,
            tsum,
            variant: DorVariant::Derived,
        })
    }

    /// One data size, bandwidth and deadline shared by both links and the sum channel.
    pub fn symmetric(data_bits: f64, band_hz: f64, t_s: f64) -> Result<Self> {
        Self::new(data_bits, data_bits, band_hz, band_hz, band_hz, t_s, t_s, t_s)
    }

    pub fn with_variant(mut self, variant: DorVariant) -> Self {
        self.variant = variant;
        self
    }

    /// SINR-domain thresholds `(T1, T2, Tsum)`.
    pub fn thresholds(&self) -> (f64, f64, f64) {
        let ln2 = std::f64::consts::LN_2;
        let t1 = (self.data1 * ln2 / (self.band1 * self.t1)).exp_m1();
        let t2 = (self.data2 * ln2 / (self.band2 * self.t2)).exp_m1();
        let e = (self.data1 + self.data2) * ln2 / (self.band_sum * self.tsum);
        let tsum = match self.variant {
            DorVariant::Derived => e.exp_m1(),
            DorVariant::Theorem => e.exp(),
            DorVariant::Proof => (2.0 * e).exp(),
        };
        (t1, t2, tsum)
    }
}

/// A probability with a first-order error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub error: f64,
}

/// Outage components: the CDF of each best-port variable at its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageParts {
    pub kappa1: MvnEstimate,
    pub kappa2: MvnEstimate,
    pub gamma1: MvnEstimate,
    pub gamma2: MvnEstimate,
}

impl OutageParts {
    /// `1 - prod(1 - F_k)`, with the error bound `sum err_k * prod_{j != k} (1 - F_j)`.
    pub fn combine(&self) -> MetricEstimate {
        let parts = [self.kappa1, self.kappa2, self.gamma1, self.gamma2];
        let log_survival: f64 = parts.iter().map(|p| (-p.get()).ln_1p()).sum();
        let value = (-log_survival.exp_m1()).clamp(0.0, 1.0);
        let error = (0..parts.len())
            .map(|k| {
                let others: f64 = (0..parts.len())
                    .filter(|&j| j != k)
                    .map(|j| parts[j].value.complement().get())
                    .product();
                parts[k].abs_error * others
            })
            .sum();
        MetricEstimate { value, error }
    }
}

/// `2^r - 1`, the SNR needed to support `r` bits/s/Hz.
pub fn rate_threshold_transform(r_bits: f64) -> Result<f64> {
    if !(r_bits >= 0.0) {
        return Err(Error::domain(format!("rate must be nonnegative, got {r_bits}")));
    }
    Ok((r_bits * std::f64::consts::LN_2).exp_m1())
}

fn outage_parts(s: &Scenario, t1: f64, t2: f64, tsum: f64, asymptotic: bool) -> Result<OutageParts> {
    let term = |receiver: usize, marginal: Marginal, x: f64, stream: u64| -> Result<MvnEstimate> {
        let u = marginal.cdf(x)?;
        let settings = MvnSettings {
            seed: s.mvn.seed.wrapping_add(stream),
            ..s.mvn
        };
        max_cdf_at_level(u, s.corr(receiver), &settings)
    };
    let kappa = |i: usize| {
        let b = s.budget(i);
        if asymptotic {
            Marginal::AsymHypoexponential {
                snr: b.avg_snr(),
                inr: b.avg_inr(),
            }
        } else {
            Marginal::Hypoexponential {
                snr: b.avg_snr(),
                inr: b.avg_inr(),
            }
        }
    };
    let gamma = |i: usize| {
        let mean = s.budget(i).avg_snr();
        if asymptotic {
            Marginal::AsymExponential { mean }
        } else {
            Marginal::Exponential { mean }
        }
    };
    Ok(OutageParts {
        kappa1: term(1, kappa(1), tsum, 0)?,
        kappa2: term(2, kappa(2), tsum, 1)?,
        gamma1: term(1, gamma(1), t1, 2)?,
        gamma2: term(2, gamma(2), t2, 3)?,
    })
}

pub fn outage_parts_at(s: &Scenario, th: &RateThresholds, asymptotic: bool) -> Result<OutageParts> {
    outage_parts(
        s,
        rate_threshold_transform(th.r1)?,
        rate_threshold_transform(th.r2)?,
        rate_threshold_transform(th.sum())?,
        asymptotic,
    )
}

/// Probability that the rate pair `(r1, r2)` falls outside the instantaneous capacity region.
pub fn outage_probability(s: &Scenario, th: &RateThresholds) -> Result<MetricEstimate> {
    Ok(outage_parts_at(s, th, false)?.combine())
}

/// High-SNR outage probability from the linearized marginals.
pub fn outage_probability_asymptotic(s: &Scenario, th: &RateThresholds) -> Result<MetricEstimate> {
    Ok(outage_parts_at(s, th, true)?.combine())
}

/// Probability that some delivery takes longer than its deadline.
pub fn dor(s: &Scenario, d: &DorConfig) -> Result<MetricEstimate> {
    let (t1, t2, tsum) = d.thresholds();
    Ok(outage_parts(s, t1, t2, tsum, false)?.combine())
}

pub fn dor_asymptotic(s: &Scenario, d: &DorConfig) -> Result<MetricEstimate> {
    let (t1, t2, tsum) = d.thresholds();
    Ok(outage_parts(s, t1, t2, tsum, true)?.combine())
}

/// `H_n = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// `1 - w H_N / (2N)`, the shrinkage applied to the independent-ports maximum.
pub fn heuristic_factor(n: usize, avg_dependence: f64) -> f64 {
    1.0 - avg_dependence * harmonic(n) / (2.0 * n as f64)
}

/// Approximate `E[max_k X_k]` for `N` exponential ports of mean `mean` coupled by `corr`.
pub fn expected_max_heuristic(mean: f64, corr: &CorrelationMatrix) -> Result<f64> {
    expected_max_for(mean, corr, 1)
}

fn expected_max_for(mean: f64, corr: &CorrelationMatrix, receiver: usize) -> Result<f64> {
    let n = corr.dim();
    let factor = heuristic_factor(n, corr.average_dependence());
    if !(factor > 0.0) {
        return Err(Error::HeuristicOutOfRange { receiver, factor });
    }
    Ok(mean * harmonic(n) * factor)
}

/// Ergodic capacities in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicCapacity {
    pub c1: f64,
    pub c2: f64,
    pub csum: f64,
}

fn ergodic(s: &Scenario, asymptotic: bool) -> Result<ErgodicCapacity> {
    let cap = |x: f64| -> Result<f64> {
        if asymptotic {
            if !(x > 0.0) {
                return Err(Error::domain(format!("log argument must be positive, got {x}")));
            }
            Ok(x.log2())
        } else {
            Ok(x.ln_1p() / std::f64::consts::LN_2)
        }
    };
    let mut c = [0.0; 2];
    let mut sums = [0.0; 2];
    for i in 1..=2 {
        let b = s.budget(i);
        c[i - 1] = cap(expected_max_for(b.avg_snr(), s.corr(i), i)?)?;
        sums[i - 1] = cap(expected_max_for(b.avg_sum(), s.corr(i), i)?)?;
    }
    Ok(ErgodicCapacity {
        c1: c[0],
        c2: c[1],
        csum: sums[0].min(sums[1]),
    })
}

/// Ergodic capacities using the heuristic expected maxima inside the logarithm.
pub fn ergodic_capacity(s: &Scenario) -> Result<ErgodicCapacity> {
    ergodic(s, false)
}

/// As [`ergodic_capacity`] with `log2(1 + x)` replaced by `log2(x)`.
pub fn ergodic_capacity_asymptotic(s: &Scenario) -> Result<ErgodicCapacity> {
    ergodic(s, true)
}

/// Instantaneous capacity region for given per-receiver SNR and SNR + INR.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRegion {
    pub c1_max: f64,
    pub c2_max: f64,
    pub csum_max: f64,
    /// Vertices counterclockwise from the origin, duplicates removed.
    pub corners: Vec<(f64, f64)>,
}

impl CapacityRegion {
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        r1 >= 0.0 && r2 >= 0.0 && r1 <= self.c1_max && r2 <= self.c2_max && r1 + r2 <= self.csum_max
    }

    /// True when the sum constraint cuts a corner off the rectangle.
    pub fn is_pentagon(&self) -> bool {
        self.csum_max < self.c1_max + self.c2_max
    }
}

pub fn instantaneous_capacity_region(gamma1: f64, gamma2: f64, kappa1: f64, kappa2: f64) -> Result<CapacityRegion> {
    for (name, v) in [("gamma1", gamma1), ("gamma2", gamma2), ("kappa1", kappa1), ("kappa2", kappa2)] {
        if !(v >= 0.0) {
            return Err(Error::domain(format!("{name} must be nonnegative, got {v}")));
        }
    }
    if kappa1 < gamma1 || kappa2 < gamma2 {
        return Err(Error::domain("SNR + INR must be at least the SNR"));
    }
    let log = |x: f64| x.ln_1p() / std::f64::consts::LN_2;
    let (c1, c2) = (log(gamma1), log(gamma2));
    let csum = log(kappa1).min(log(kappa2));
    let a = c1.min(csum);
    let b = c2.min(csum);
    let raw = if csum >= c1 + c2 {
        vec![(0.0, 0.0), (c1, 0.0), (c1, c2), (0.0, c2)]
    } else {
        vec![(0.0, 0.0), (a, 0.0), (a, csum - a), (csum - b, b), (0.0, b)]
    };
    let mut corners: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for p in raw {
        if !corners.iter().any(|q| (q.0 - p.0).abs() < 1e-12 && (q.1 - p.1).abs() < 1e-12) {
            corners.push(p);
        }
    }
    Ok(CapacityRegion {
        c1_max: c1,
        c2_max: c2,
        csum_max: csum,
        corners,
    })
}
