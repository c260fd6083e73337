//! Distribution of the best port under a Gaussian copula.
//!
//! If each of `N` ports has marginal CDF `F` and the ports are coupled by a
//! Gaussian copula with correlation `R`, the maximum has CDF
//! `Phi_R(q, ..., q)` with `q = Phi^{-1}(F(r))`. The multivariate normal
//! CDF is evaluated by sequential conditioning on a Cholesky factor with
//! Genz-Bretz variable reordering, integrated over randomly shifted
//! Richtmyer lattice points (baker-transformed, antithetic). The spread
//! over independent shifts gives the error estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CorrelationMatrix;
use crate::special::{quantile_unchecked, std_normal_cdf, std_normal_pdf, Probability};

/// Largest supported number of ports.
pub const MAX_DIM: usize = 256;

/// Stopping rule for the integrator.
///
/// The target absolute error is `abs` when `rel == 0`, otherwise
/// `max(floor, min(abs, rel * estimate))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub floor: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0, floor: 0.0 }
    }

    /// Tightens towards `rel * estimate` for small probabilities, never below `floor`.
    pub fn adaptive(abs: f64, rel: f64, floor: f64) -> Self {
        Tolerance { abs, rel, floor }
    }

    pub fn target(&self, estimate: f64) -> f64 {
        if self.rel > 0.0 {
            self.floor.max(self.abs.min(self.rel * estimate))
        } else {
            self.abs
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::absolute(1e-4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnSettings {
    pub tol: Tolerance,
    pub seed: u64,
    /// Independent lattice shifts used for the error estimate.
    pub replicates: usize,
    /// Lattice points per shift before giving up on the tolerance.
    pub max_points: usize,
    pub min_points: usize,
}

impl MvnSettings {
    pub fn new(tol: Tolerance, seed: u64) -> Self {
        MvnSettings {
            tol,
            seed,
            ..Self::default()
        }
    }
}

impl Default for MvnSettings {
    fn default() -> Self {
        MvnSettings {
            tol: Tolerance::default(),
            seed: 0,
            replicates: 12,
            max_points: 1 << 22,
            min_points: 1 << 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnEstimate {
    pub value: Probability,
    /// Three standard errors over the randomized replicates.
    pub abs_error: f64,
    /// Integrand evaluations, all replicates included.
    pub samples_used: u64,
    pub seed: u64,
}

impl MvnEstimate {
    fn exact(value: f64, seed: u64) -> Self {
        MvnEstimate {
            value: Probability::clamped(value),
            abs_error: 0.0,
            samples_used: 0,
            seed,
        }
    }

    pub fn get(&self) -> f64 {
        self.value.get()
    }

    pub fn complement(&self) -> Self {
        MvnEstimate {
            value: self.value.complement(),
            ..*self
        }
    }
}

/// `P(Z <= upper)` for `Z ~ N(0, R)`. Entries of `upper` may be infinite.
pub fn mvn_cdf(upper: &[f64], corr: &CorrelationMatrix, settings: &MvnSettings) -> Result<MvnEstimate> {
    let n = corr.dim();
    if upper.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: upper.len(),
        });
    }
    if n > MAX_DIM {
        return Err(Error::DimensionCap { dim: n, cap: MAX_DIM });
    }
    if upper.iter().any(|b| b.is_nan()) {
        return Err(Error::domain("NaN integration limit"));
    }
    if upper.contains(&f64::NEG_INFINITY) {
        return Ok(MvnEstimate::exact(0.0, settings.seed));
    }
    // +inf limits marginalize out
    let active: Vec<usize> = (0..n).filter(|&i| upper[i].is_finite()).collect();
    match active.len() {
        0 => return Ok(MvnEstimate::exact(1.0, settings.seed)),
        1 => return Ok(MvnEstimate::exact(std_normal_cdf(upper[active[0]]), settings.seed)),
        _ => {}
    }
    let m = active.len();
    let mut cov = vec![0.0; m * m];
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate() {
            cov[a * m + b] = corr.get(i, j);
        }
    }
    let limits: Vec<f64> = active.iter().map(|&i| upper[i]).collect();
    let plan = Plan::new(cov, limits);
    Ok(plan.integrate(settings))
}

/// CDF of the maximum at `r`.
pub fn max_cdf<F>(r: f64, marginal_cdf: F, corr: &CorrelationMatrix, settings: &MvnSettings) -> Result<MvnEstimate>
where
    F: Fn(f64) -> f64,
{
    max_cdf_at_level(marginal_cdf(r), corr, settings)
}

/// CCDF of the maximum at `r`.
pub fn max_ccdf<F>(r: f64, marginal_cdf: F, corr: &CorrelationMatrix, settings: &MvnSettings) -> Result<MvnEstimate>
where
    F: Fn(f64) -> f64,
{
    max_cdf(r, marginal_cdf, corr, settings).map(|e| e.complement())
}

/// CDF of the maximum given the common per-port marginal level `u = F(r)`.
pub fn max_cdf_at_level(u: f64, corr: &CorrelationMatrix, settings: &MvnSettings) -> Result<MvnEstimate> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(format!("marginal CDF value {u} outside [0, 1]")));
    }
    let n = corr.dim();
    if n > MAX_DIM {
        return Err(Error::DimensionCap { dim: n, cap: MAX_DIM });
    }
    if u == 0.0 || u == 1.0 || n == 1 {
        return Ok(MvnEstimate::exact(u, settings.seed));
    }
    let q = quantile_unchecked(u);
    mvn_cdf(&vec![q; n], corr, settings)
}

/// The `N`-variate joint density evaluated on the diagonal,
/// `prod f(r) * c_R(u, ..., u)` with `c_R` the Gaussian copula density.
///
/// This is not the density of the maximum for `N >= 2`; that is the
/// derivative of [`max_cdf`].
pub fn max_density_diagonal<P, F>(r: f64, marginal_pdf: P, marginal_cdf: F, corr: &CorrelationMatrix) -> Result<f64>
where
    P: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    let n = corr.dim();
    let f = marginal_pdf(r);
    if !(f >= 0.0) {
        return Err(Error::domain(format!("marginal density {f} is negative")));
    }
    if n == 1 {
        return Ok(f);
    }
    if corr.is_identity() {
        return Ok(f.powi(n as i32));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    let u = marginal_cdf(r);
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(format!("marginal CDF value {u} outside [0, 1]")));
    }
    let q = quantile_unchecked(u);
    // the argument vector is q * 1, so q^T (R^{-1} - I) q = q^2 (1^T R^{-1} 1 - n)
    let z = corr.forward_solve(&vec![1.0; n])?;
    let s = z.iter().map(|v| v * v).sum::<f64>() - n as f64;
    let quad = if q.is_infinite() {
        if s > 1e-12 {
            f64::INFINITY
        } else if s < -1e-12 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    } else {
        q * q * s
    };
    let log_density = n as f64 * f.ln() - 0.5 * quad - 0.5 * corr.log_det();
    Ok(log_density.exp())
}

/// Variance below which a conditioned variable is treated as deterministic.
const DEGENERATE_VARIANCE: f64 = 1e-12;

/// A reordered, factored integration problem for upper limits only.
#[derive(Debug, Clone)]
struct Plan {
    m: usize,
    /// Row-major lower factor of the reordered covariance.
    l: Vec<f64>,
    limits: Vec<f64>,
    first: f64,
    alphas: Vec<f64>,
}

impl Plan {
    fn new(mut c: Vec<f64>, mut b: Vec<f64>) -> Self {
        let m = b.len();
        let mut l = vec![0.0f64; m * m];
        let mut y = vec![0.0f64; m];

        for i in 0..m {
            // choose the remaining variable with the smallest conditional probability
            let mut pivot = i;
            let mut best = f64::INFINITY;
            for j in i..m {
                let var = c[j * m + j] - (0..i).map(|k| l[j * m + k].powi(2)).sum::<f64>();
                let p = if var > DEGENERATE_VARIANCE {
                    let mean: f64 = (0..i).map(|k| l[j * m + k] * y[k]).sum();
                    std_normal_cdf((b[j] - mean) / var.sqrt())
                } else {
                    2.0
                };
                if p < best {
                    best = p;
                    pivot = j;
                }
            }
            if pivot != i {
                b.swap(i, pivot);
                for k in 0..m {
                    c.swap(i * m + k, pivot * m + k);
                }
                for k in 0..m {
                    c.swap(k * m + i, k * m + pivot);
                }
                for k in 0..i {
                    l.swap(i * m + k, pivot * m + k);
                }
            }
            let var = c[i * m + i] - (0..i).map(|k| l[i * m + k].powi(2)).sum::<f64>();
            if var > DEGENERATE_VARIANCE {
                let d = var.sqrt();
                l[i * m + i] = d;
                for j in i + 1..m {
                    let s: f64 = (0..i).map(|k| l[j * m + k] * l[i * m + k]).sum();
                    l[j * m + i] = (c[j * m + i] - s) / d;
                }
                let mean: f64 = (0..i).map(|k| l[i * m + k] * y[k]).sum();
                let bi = (b[i] - mean) / d;
                let p = std_normal_cdf(bi);
                // mean of a standard normal truncated above at bi
                y[i] = if p > 1e-300 { -std_normal_pdf(bi) / p } else { bi };
            } else {
                l[i * m + i] = 0.0;
                y[i] = 0.0;
            }
        }

        let first = if l[0] > 0.0 {
            std_normal_cdf(b[0] / l[0])
        } else if b[0] >= 0.0 {
            1.0
        } else {
            0.0
        };
        Plan {
            m,
            l,
            limits: b,
            first,
            alphas: richtmyer_generators(m - 1),
        }
    }

    fn integrand(&self, w: &[f64], y: &mut [f64]) -> f64 {
        let m = self.m;
        let mut e = self.first;
        let mut f = e;
        for i in 1..m {
            if f == 0.0 {
                return 0.0;
            }
            let prev = i - 1;
            y[prev] = if self.l[prev * m + prev] > 0.0 {
                quantile_unchecked((w[prev] * e).clamp(1e-300, 1.0 - f64::EPSILON / 2.0))
            } else {
                0.0
            };
            let row = &self.l[i * m..i * m + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            let d = self.l[i * m + i];
            e = if d > 0.0 {
                std_normal_cdf((self.limits[i] - s) / d)
            } else if s <= self.limits[i] {
                1.0
            } else {
                0.0
            };
            f *= e;
        }
        f
    }

    /// Sum of antithetic integrand pairs over lattice points `start+1..=end`.
    fn replicate_sum(&self, shift: &[f64], start: usize, end: usize) -> f64 {
        let dims = self.m - 1;
        let mut x = vec![0.0; dims];
        let mut x_anti = vec![0.0; dims];
        let mut y = vec![0.0; self.m];
        let mut sum = 0.0;
        for k in start + 1..=end {
            let kf = k as f64;
            for j in 0..dims {
                let t = ((kf * self.alphas[j]).fract() + shift[j]).fract();
                let w = 1.0 - (2.0 * t - 1.0).abs();
                x[j] = w;
                x_anti[j] = 1.0 - w;
            }
            sum += 0.5 * (self.integrand(&x, &mut y) + self.integrand(&x_anti, &mut y));
        }
        sum
    }

    fn integrate(&self, settings: &MvnSettings) -> MvnEstimate {
        let reps = settings.replicates.max(2);
        let dims = self.m - 1;
        let shifts: Vec<Vec<f64>> = (0..reps)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
                rng.set_stream(r as u64);
                (0..dims).map(|_| rng.random::<f64>()).collect()
            })
            .collect();

        let max_points = settings.max_points.max(1);
        let mut points = settings.min_points.clamp(1, max_points);
        let mut done = 0;
        let mut sums = vec![0.0; reps];
        loop {
            let batch = |r: usize| self.replicate_sum(&shifts[r], done, points);
            #[cfg(feature = "parallel")]
            let partial: Vec<f64> = (0..reps).into_par_iter().map(batch).collect();
            #[cfg(not(feature = "parallel"))]
            let partial: Vec<f64> = (0..reps).map(batch).collect();
            for (s, p) in sums.iter_mut().zip(partial) {
                *s += p;
            }
            done = points;

            let means: Vec<f64> = sums.iter().map(|s| s / points as f64).collect();
            let value = means.iter().sum::<f64>() / reps as f64;
            let var = means.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let abs_error = 3.0 * (var / reps as f64).sqrt();
            if abs_error <= settings.tol.target(value) || points >= max_points {
                if abs_error > settings.tol.target(value) {
                    log::warn!(
                        "MVN integration hit the point cap: error {abs_error:e} > target {:e}",
                        settings.tol.target(value)
                    );
                }
                return MvnEstimate {
                    value: Probability::clamped(value),
                    abs_error,
                    samples_used: (2 * points * reps) as u64,
                    seed: settings.seed,
                };
            }
            points = (points * 2).min(max_points);
        }
    }
}

/// Fractional parts of square roots of the first `n` primes.
fn richtmyer_generators(n: usize) -> Vec<f64> {
    let mut primes = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes.iter().map(|&p| (p as f64).sqrt().fract()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PortGrid;
    use crate::special::{bivariate_normal_cdf, std_normal_quantile};

    fn settings(tol: f64) -> MvnSettings {
        MvnSettings::new(Tolerance::absolute(tol), 7)
    }

    fn corr2(rho: f64) -> CorrelationMatrix {
        CorrelationMatrix::from_entries(2, vec![1.0, rho, rho, 1.0]).unwrap()
    }

    #[test]
    fn mvn_examples() {
        let r = PortGrid::new(2, 2, 0.6, 0.6).unwrap().correlation_matrix().unwrap();
        let e = mvn_cdf(&[f64::INFINITY; 4], &r, &settings(1e-4)).unwrap();
        assert_eq!(e.get(), 1.0);

        let e = mvn_cdf(&[0.0, 0.0], &corr2(0.5), &settings(1e-5)).unwrap();
        let oracle = bivariate_normal_cdf(0.0, 0.0, 0.5).unwrap();
        assert!((e.get() - oracle).abs() <= 1e-5f64.max(e.abs_error), "{e:?}");
        assert!((e.get() - 1.0 / 3.0).abs() < 1e-4);

        let e = mvn_cdf(&[0.0; 3], &CorrelationMatrix::identity(3), &settings(1e-6)).unwrap();
        assert!((e.get() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn mvn_errors() {
        let r = CorrelationMatrix::identity(3);
        assert!(matches!(
            mvn_cdf(&[0.0, 0.0], &r, &settings(1e-4)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(mvn_cdf(&[0.0, f64::NAN, 0.0], &r, &settings(1e-4)).is_err());
        let big = CorrelationMatrix::identity(MAX_DIM + 1);
        assert!(matches!(
            mvn_cdf(&vec![0.0; MAX_DIM + 1], &big, &settings(1e-4)),
            Err(Error::DimensionCap { .. })
        ));
        assert!(matches!(
            max_cdf_at_level(0.5, &big, &settings(1e-4)),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn mvn_infinite_limits() {
        let r = corr2(0.3);
        let e = mvn_cdf(&[f64::NEG_INFINITY, 1.0], &r, &settings(1e-4)).unwrap();
        assert_eq!(e.get(), 0.0);
        let e = mvn_cdf(&[f64::INFINITY, 1.0], &r, &settings(1e-4)).unwrap();
        assert_eq!(e.get(), std_normal_cdf(1.0));
    }

    #[test]
    fn mvn_is_deterministic_per_seed() {
        let r = PortGrid::new(2, 3, 0.5, 0.8).unwrap().correlation_matrix().unwrap();
        let s = settings(1e-5);
        let a = mvn_cdf(&[0.3; 6], &r, &s).unwrap();
        let b = mvn_cdf(&[0.3; 6], &r, &s).unwrap();
        assert_eq!(a, b);
        let c = mvn_cdf(&[0.3; 6], &r, &MvnSettings { seed: 8, ..s }).unwrap();
        assert!((a.get() - c.get()).abs() < 3.0 * (a.abs_error + c.abs_error) + 1e-9);
    }

    #[test]
    fn max_cdf_examples() {
        let r1 = CorrelationMatrix::identity(1);
        let e = max_cdf(2.0, |x| 1.0 - (-x / 3.0f64).exp(), &r1, &settings(1e-4)).unwrap();
        assert_eq!(e.get(), 1.0 - (-2.0 / 3.0f64).exp());

        let e = max_cdf_at_level(0.5, &CorrelationMatrix::identity(4), &settings(1e-6)).unwrap();
        assert!((e.get() - 0.0625).abs() < 1e-12);

        let e = max_cdf_at_level(0.5, &corr2(0.5), &settings(1e-5)).unwrap();
        assert!((e.get() - 1.0 / 3.0).abs() < 1e-5 + e.abs_error);

        let c = max_ccdf(0.0, |x| 1.0 - (-x).exp(), &corr2(0.5), &settings(1e-4)).unwrap();
        assert_eq!(c.get(), 1.0);
        let c = max_ccdf(1.0, |_| 0.5, &corr2(0.5), &settings(1e-5)).unwrap();
        assert!((c.get() - 2.0 / 3.0).abs() < 1e-5 + c.abs_error);
        let c = max_ccdf(1.0, |x| 1.0 - (-x).exp(), &r1, &settings(1e-4)).unwrap();
        assert_eq!(c.get(), (-1.0f64).exp());
        assert!(max_cdf_at_level(1.2, &r1, &settings(1e-4)).is_err());
    }

    #[test]
    fn max_cdf_boundary_levels_are_exact() {
        let r = PortGrid::new(3, 3, 1.0, 1.0).unwrap().correlation_matrix().unwrap();
        let e = max_cdf_at_level(0.0, &r, &settings(1e-4)).unwrap();
        assert_eq!((e.get(), e.samples_used), (0.0, 0));
        let e = max_cdf_at_level(1.0, &r, &settings(1e-4)).unwrap();
        assert_eq!((e.get(), e.samples_used), (1.0, 0));
    }

    #[test]
    fn max_cdf_monotone_in_r() {
        let r = PortGrid::new(2, 2, 0.5, 0.5).unwrap().correlation_matrix().unwrap();
        let s = settings(1e-5);
        let mut prev: Option<MvnEstimate> = None;
        for i in 0..50 {
            let x = 0.1 * i as f64;
            let e = max_cdf(x, |t| 1.0 - (-t / 1.5f64).exp(), &r, &s).unwrap();
            if let Some(p) = prev {
                assert!(e.get() >= p.get() - (e.abs_error + p.abs_error), "x={x}");
            }
            prev = Some(e);
        }
    }

    #[test]
    fn frechet_bounds_hold() {
        for (grid, u) in [((2, 2, 0.3), 0.7), ((2, 3, 1.0), 0.4), ((3, 3, 0.8), 0.95), ((1, 4, 0.2), 0.2)] {
            let g = PortGrid::new(grid.0, grid.1, grid.2, grid.2).unwrap();
            let r = g.correlation_matrix().unwrap();
            let n = r.dim() as f64;
            let e = max_cdf_at_level(u, &r, &settings(1e-5)).unwrap();
            let lower = (n * u - (n - 1.0)).max(0.0);
            assert!(e.get() >= lower - e.abs_error && e.get() <= u + e.abs_error, "{grid:?} u={u}: {e:?}");
        }
    }

    #[test]
    fn comonotone_limit() {
        let r = CorrelationMatrix::equicorrelated(5, 1.0 - 1e-6).unwrap();
        for u in [0.05, 0.3, 0.8] {
            let e = max_cdf_at_level(u, &r, &settings(1e-4)).unwrap();
            assert!((e.get() - u).abs() < 5e-3, "u={u}: {}", e.get());
        }
    }

    /// Tensor-grid Gauss-Legendre over (z1, z2), with z3 integrated in
    /// closed form through its conditional normal law.
    fn trivariate_oracle(t: f64, r: &CorrelationMatrix) -> f64 {
        let rule = crate::special::gauss_legendre_20();
        let (r12, r13, r23) = (r.get(0, 1), r.get(0, 2), r.get(1, 2));
        let det12 = 1.0 - r12 * r12;
        // regression coefficients of z3 on (z1, z2)
        let b1 = (r13 - r12 * r23) / det12;
        let b2 = (r23 - r12 * r13) / det12;
        let cond_sd = (1.0 - b1 * r13 - b2 * r23).max(0.0).sqrt();
        let lo = -9.0;
        let panels = 60;
        let h = (t - lo) / panels as f64;
        let nodes: Vec<(f64, f64)> = (0..panels)
            .flat_map(|p| {
                let mid = lo + (p as f64 + 0.5) * h;
                rule.iter()
                    .flat_map(move |&(x, w)| [(mid + 0.5 * h * x, 0.5 * h * w), (mid - 0.5 * h * x, 0.5 * h * w)])
            })
            .collect();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * det12.sqrt());
        let mut s = 0.0;
        for &(z1, w1) in &nodes {
            for &(z2, w2) in &nodes {
                let q = (z1 * z1 - 2.0 * r12 * z1 * z2 + z2 * z2) / det12;
                let dens = norm * (-0.5 * q).exp();
                let mu = b1 * z1 + b2 * z2;
                s += w1 * w2 * dens * std_normal_cdf((t - mu) / cond_sd);
            }
        }
        s
    }

    #[test]
    fn matches_tensor_grid_oracle_up_to_three_ports() {
        let s = settings(1e-5);
        for (w, u) in [(0.3, 0.4), (0.6, 0.1), (1.0, 0.75)] {
            let r = PortGrid::new(1, 3, 0.0, w).unwrap().correlation_matrix().unwrap();
            let t = std_normal_quantile(u).unwrap();
            let oracle = trivariate_oracle(t, &r);
            let e = max_cdf_at_level(u, &r, &s).unwrap();
            assert!((e.get() - oracle).abs() < 1e-3, "w={w} u={u}: {} vs {oracle}", e.get());

            let r2 = PortGrid::new(1, 2, 0.0, w).unwrap().correlation_matrix().unwrap();
            let e2 = max_cdf_at_level(u, &r2, &s).unwrap();
            let o2 = bivariate_normal_cdf(t, t, r2.get(0, 1)).unwrap();
            assert!((e2.get() - o2).abs() < 1e-3);
        }
    }

    #[test]
    fn small_probabilities_keep_relative_accuracy() {
        // all pairwise correlations positive at this spacing
        let r = PortGrid::new(2, 2, 0.2, 0.2).unwrap().correlation_matrix().unwrap();
        assert!(r.entries().iter().all(|&v| v > 0.0));
        let s = MvnSettings::new(Tolerance::adaptive(1e-4, 0.01, 0.0), 3);
        let e = max_cdf_at_level(1e-4, &r, &s).unwrap();
        assert!(e.get() > 0.0 && e.abs_error <= 0.01 * e.get(), "{e:?}");
        // positive dependence: between the independent value and the comonotone one
        assert!(e.get() >= 1e-16 * (1.0 - 0.01) && e.get() <= 1e-4, "{e:?}");
    }

    #[test]
    fn diagonal_density_examples() {
        let pdf = |x: f64| (-x).exp();
        let cdf = |x: f64| -(-x).exp_m1();
        let r1 = CorrelationMatrix::identity(1);
        assert_eq!(max_density_diagonal(1.0, pdf, cdf, &r1).unwrap(), pdf(1.0));
        let i4 = CorrelationMatrix::identity(4);
        assert!((max_density_diagonal(0.7, pdf, cdf, &i4).unwrap() - pdf(0.7).powi(4)).abs() < 1e-15);

        // closed form for two ports, coded separately
        let rho = 0.5;
        let q = std_normal_quantile(1.0 - (-1.0f64).exp()).unwrap();
        let quad = (q * q - 2.0 * rho * q * q + q * q) / (1.0 - rho * rho) - 2.0 * q * q;
        let expected = pdf(1.0).powi(2) * (-0.5 * quad).exp() / (1.0 - rho * rho).sqrt();
        let got = max_density_diagonal(1.0, pdf, cdf, &corr2(rho)).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    }

    #[test]
    fn density_of_maximum_versus_diagonal_density() {
        let pdf = |x: f64| (-x).exp();
        let cdf = |x: f64| -(-x).exp_m1();
        let s = settings(1e-7);
        // one port: both are the marginal density
        let r1 = CorrelationMatrix::identity(1);
        let h = 1e-4;
        let fd = (max_cdf(1.0 + h, cdf, &r1, &s).unwrap().get() - max_cdf(1.0 - h, cdf, &r1, &s).unwrap().get())
            / (2.0 * h);
        assert!((fd - max_density_diagonal(1.0, pdf, cdf, &r1).unwrap()).abs() < 1e-7);
        // two ports: both nonnegative, generally different
        let r = corr2(0.5);
        let h = 0.05;
        let fd = (max_cdf(1.0 + h, cdf, &r, &s).unwrap().get() - max_cdf(1.0 - h, cdf, &r, &s).unwrap().get())
            / (2.0 * h);
        let diag = max_density_diagonal(1.0, pdf, cdf, &r).unwrap();
        assert!(fd >= 0.0 && diag >= 0.0);
    }

    #[test]
    fn generators_are_irrational_parts() {
        let g = richtmyer_generators(4);
        let expect = [2f64, 3.0, 5.0, 7.0].map(|p| p.sqrt().fract());
        assert_eq!(g, expect.to_vec());
    }
}
