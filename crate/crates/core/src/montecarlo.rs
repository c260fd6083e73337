//! Monte Carlo simulation of the correlated port gains.
//!
//! Trials are split into chunks of `McConfig::chunk`. Chunk `c` draws from
//! a ChaCha8 generator keyed by `(seed, c)`, and chunk results are reduced
//! in index order, so estimates do not depend on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CorrelationMatrix;
use crate::metrics::{rate_threshold_transform, DorConfig, RateThresholds, Scenario};
use crate::special::std_normal_cdf;

const Z95: f64 = 1.959963984540054;

/// How correlated exponential gains are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    /// Exponential marginals joined by the Gaussian copula with matrix `R`.
    #[default]
    Copula,
    /// `|h|^2` for a circularly-symmetric complex Gaussian `h` with covariance `R`.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub chunk: u64,
    pub sampler: Sampler,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            chunk: 1 << 14,
            sampler: Sampler::Copula,
        }
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_chunk(mut self, chunk: u64) -> Self {
        self.chunk = chunk;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.chunk == 0 {
            return Err(Error::domain("trials and chunk must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    pub ci95: (f64, f64),
}

impl McEstimate {
    /// Proportion with a Wilson score interval. `stderr` is the Wilson
    /// half-width over 1.96, which stays positive when no trial hits.
    pub fn proportion(successes: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        McEstimate {
            value: p,
            stderr: half / Z95,
            trials,
            ci95: ((center - half).max(0.0), (center + half).min(1.0)),
        }
    }

    /// Sample mean with a normal interval.
    pub fn from_moments(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let stderr = (var / n).sqrt();
        McEstimate {
            value: mean,
            stderr,
            trials,
            ci95: (mean - Z95 * stderr, mean + Z95 * stderr),
        }
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }
}

/// Fills `out` with one draw of correlated exponential gains of the given mean.
pub fn sample_gains<R: Rng + ?Sized>(corr: &CorrelationMatrix, mean: f64, sampler: Sampler, rng: &mut R, out: &mut [f64]) {
    let n = corr.dim();
    debug_assert_eq!(out.len(), n);
    let l = corr.chol();
    // the factor may carry diagonal jitter; rescale to unit variance
    let scale = 1.0 / (1.0 + corr.jitter()).sqrt();
    let draws = match sampler {
        Sampler::Copula => n,
        Sampler::Physical => 2 * n,
    };
    let mut stack = [0.0f64; 512];
    let mut heap;
    let w: &mut [f64] = if draws <= stack.len() {
        &mut stack[..draws]
    } else {
        heap = vec![0.0; draws];
        &mut heap
    };
    for v in w.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    for i in 0..n {
        let row = &l[i * n..i * n + i + 1];
        match sampler {
            Sampler::Copula => {
                let z = scale * row.iter().zip(&w[..=i]).map(|(a, b)| a * b).sum::<f64>();
                // -ln(1 - Phi(z)) without cancellation for z < 0
                let log_tail = if z < 0.0 {
                    (-std_normal_cdf(z)).ln_1p()
                } else {
                    std_normal_cdf(-z).ln()
                };
                out[i] = -mean * log_tail;
            }
            Sampler::Physical => {
                let re: f64 = row.iter().zip(&w[..=i]).map(|(a, b)| a * b).sum();
                let im: f64 = row.iter().zip(&w[n..=n + i]).map(|(a, b)| a * b).sum();
                out[i] = mean * 0.5 * scale * scale * (re * re + im * im);
            }
        }
    }
}

/// Best-port values at both receivers for one channel realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    /// Largest SNR over the ports.
    pub gamma_max: [f64; 2],
    /// Largest SNR + INR over the ports.
    pub kappa_max: [f64; 2],
    /// Some receiver has INR <= SNR at its sum-rate port.
    pub weak_interference: bool,
}

struct Buffers {
    gamma: Vec<f64>,
    zeta: Vec<f64>,
}

impl Buffers {
    fn new(s: &Scenario) -> Self {
        let n = s.corr(1).dim().max(s.corr(2).dim());
        Buffers {
            gamma: vec![0.0; n],
            zeta: vec![0.0; n],
        }
    }
}

fn realize<R: Rng + ?Sized>(s: &Scenario, sampler: Sampler, rng: &mut R, buf: &mut Buffers) -> Realization {
    let mut out = Realization {
        gamma_max: [0.0; 2],
        kappa_max: [0.0; 2],
        weak_interference: false,
    };
    for i in 0..2 {
        let corr = s.corr(i + 1);
        let b = s.budget(i + 1);
        let n = corr.dim();
        let (g, z) = (&mut buf.gamma[..n], &mut buf.zeta[..n]);
        sample_gains(corr, b.avg_snr(), sampler, rng, g);
        sample_gains(corr, b.avg_inr(), sampler, rng, z);
        let mut gmax = 0.0f64;
        let mut kmax = f64::NEG_INFINITY;
        let mut kport = 0;
        for k in 0..n {
            gmax = gmax.max(g[k]);
            let kappa = g[k] + z[k];
            if kappa > kmax {
                kmax = kappa;
                kport = k;
            }
        }
        out.gamma_max[i] = gmax;
        out.kappa_max[i] = kmax;
        out.weak_interference |= z[kport] <= g[kport];
    }
    out
}

/// Per-trial statistics summed over all trials.
#[derive(Debug, Clone, PartialEq)]
struct Totals<const K: usize> {
    sum: [f64; K],
    sum_sq: [f64; K],
    weak: u64,
}

impl<const K: usize> Totals<K> {
    fn zero() -> Self {
        Totals {
            sum: [0.0; K],
            sum_sq: [0.0; K],
            weak: 0,
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        for k in 0..K {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
        self.weak += other.weak;
        self
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn for_chunks<T, F>(mc: &McConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = mc.trials.div_ceil(mc.chunk);
    let run = |c: u64| {
        let len = mc.chunk.min(mc.trials - c * mc.chunk);
        f(&mut chunk_rng(mc.seed, c), len)
    };
    #[cfg(feature = "parallel")]
    {
        (0..chunks).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(run).collect()
    }
}

fn accumulate<const K: usize, F>(s: &Scenario, mc: &McConfig, stat: F) -> Result<Totals<K>>
where
    F: Fn(&Realization) -> [f64; K] + Sync,
{
    mc.validate()?;
    let parts = for_chunks(mc, |rng, len| {
        let mut buf = Buffers::new(s);
        let mut t = Totals::<K>::zero();
        for _ in 0..len {
            let r = realize(s, mc.sampler, rng, &mut buf);
            let v = stat(&r);
            for (k, x) in v.into_iter().enumerate() {
                t.sum[k] += x;
                t.sum_sq[k] += x * x;
            }
            t.weak += r.weak_interference as u64;
        }
        t
    });
    Ok(parts.iter().fold(Totals::zero(), |acc, p| acc.merge(p)))
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn proportion(count: f64, trials: u64) -> McEstimate {
    let est = McEstimate::proportion(count.round() as u64, trials);
    if est.value > 0.0 && est.value < 1e-5 {
        log::warn!("rare event: estimated probability {:e} from {trials} trials", est.value);
    }
    est
}

fn outage_event(r: &Realization, t1: f64, t2: f64, tsum: f64) -> bool {
    r.gamma_max[0] < t1 || r.gamma_max[1] < t2 || r.kappa_max[0].min(r.kappa_max[1]) < tsum
}

/// Fraction of trials whose rate pair falls outside the instantaneous capacity region.
pub fn estimate_op(s: &Scenario, th: &RateThresholds, mc: &McConfig) -> Result<McEstimate> {
    let (t1, t2, ts) = (
        rate_threshold_transform(th.r1)?,
        rate_threshold_transform(th.r2)?,
        rate_threshold_transform(th.sum())?,
    );
    let t = accumulate(s, mc, |r| [indicator(outage_event(r, t1, t2, ts))])?;
    Ok(proportion(t.sum[0], mc.trials))
}

/// Fraction of trials in which some delivery misses its deadline, using
/// the thresholds of [`DorConfig::thresholds`] (so the variant applies).
pub fn estimate_dor(s: &Scenario, d: &DorConfig, mc: &McConfig) -> Result<McEstimate> {
    let (t1, t2, ts) = d.thresholds();
    let t = accumulate(s, mc, |r| [indicator(outage_event(r, t1, t2, ts))])?;
    Ok(proportion(t.sum[0], mc.trials))
}

fn capacities(r: &Realization) -> [f64; 3] {
    let log = |x: f64| x.ln_1p() / std::f64::consts::LN_2;
    [log(r.gamma_max[0]), log(r.gamma_max[1]), log(r.kappa_max[0].min(r.kappa_max[1]))]
}

/// Sample means of the instantaneous capacities `(c1, c2, csum)`.
pub fn estimate_ec(s: &Scenario, mc: &McConfig) -> Result<[McEstimate; 3]> {
    let t = accumulate(s, mc, capacities)?;
    Ok(std::array::from_fn(|k| McEstimate::from_moments(t.sum[k], t.sum_sq[k], mc.trials)))
}

/// All metrics from one set of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub op: McEstimate,
    pub dor: McEstimate,
    pub ec: [McEstimate; 3],
    /// Trials where interference was not stronger than the signal at some receiver's sum-rate port.
    pub weak_interference_trials: u64,
}

pub fn simulate(s: &Scenario, th: &RateThresholds, d: &DorConfig, mc: &McConfig) -> Result<McReport> {
    let (o1, o2, os) = (
        rate_threshold_transform(th.r1)?,
        rate_threshold_transform(th.r2)?,
        rate_threshold_transform(th.sum())?,
    );
    let (d1, d2, ds) = d.thresholds();
    let t = accumulate(s, mc, |r| {
        let c = capacities(r);
        [
            indicator(outage_event(r, o1, o2, os)),
            indicator(outage_event(r, d1, d2, ds)),
            c[0],
            c[1],
            c[2],
        ]
    })?;
    Ok(McReport {
        op: proportion(t.sum[0], mc.trials),
        dor: proportion(t.sum[1], mc.trials),
        ec: std::array::from_fn(|k| McEstimate::from_moments(t.sum[k + 2], t.sum_sq[k + 2], mc.trials)),
        weak_interference_trials: t.weak,
    })
}

/// Per-port random variable whose best-port maximum is estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PortVariable {
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Sum of two exponentials with independent copula draws.
    Sum { snr: f64, inr: f64 },
}

/// Sample mean of `max_k X_k`.
pub fn estimate_expected_max(corr: &CorrelationMatrix, var: PortVariable, mc: &McConfig) -> Result<McEstimate> {
    mc.validate()?;
    let n = corr.dim();
    let parts = for_chunks(mc, |rng, len| {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            let m = match var {
                PortVariable::Exponential { mean } => {
                    sample_gains(corr, mean, mc.sampler, rng, &mut a);
                    a.iter().copied().fold(0.0, f64::max)
                }
                PortVariable::Sum { snr, inr } => {
                    sample_gains(corr, snr, mc.sampler, rng, &mut a);
                    sample_gains(corr, inr, mc.sampler, rng, &mut b);
                    a.iter().zip(&b).map(|(x, y)| x + y).fold(0.0, f64::max)
                }
            };
            s += m;
            s2 += m * m;
        }
        (s, s2)
    });
    let (s, s2) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(McEstimate::from_moments(s, s2, mc.trials))
}
