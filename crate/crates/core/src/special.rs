//! Scalar special functions: the spatial correlation kernel, the standard
//! normal CDF and quantile, and the bivariate normal CDF.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::OnceLock;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("probability {value} outside [0, 1]")))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Probability(0.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Spherical Bessel function of the first kind of order zero, `sin(x)/x`.
pub fn spherical_bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-2 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// Cylindrical Bessel function `J0`, the 2-D isotropic scattering kernel.
pub fn cylindrical_bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF. Saturates to exactly 0 and 1 at `-inf` and `+inf`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile.
///
/// `p = 0` and `p = 1` map to `-inf` and `+inf`; anything outside `[0, 1]`
/// (or NaN) is a domain error.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("quantile argument {p} outside [0, 1]")));
    }
    Ok(quantile_unchecked(p))
}

/// Quantile without the domain check; callers guarantee `p` in `[0, 1]`.
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        // 1 - p is exact for p in (0.5, 1)
        return -lower_quantile(1.0 - p);
    }
    lower_quantile(p)
}

// Acklam's rational approximation, relative error ~1.2e-9.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

/// Quantile for `0 < p <= 0.5`, polished with one Halley step.
fn lower_quantile(p: f64) -> f64 {
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = std_normal_cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    if u.is_finite() {
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

/// `P(X <= a, Y <= b)` for standard normals with correlation `rho`.
///
/// Infinite limits are allowed. Uses Genz's BVND scheme with a 20-point
/// Gauss-Legendre rule, accurate to about 1e-15.
pub fn bivariate_normal_cdf(a: f64, b: f64, rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::domain(format!("correlation {rho} outside (-1, 1)")));
    }
    if a.is_nan() || b.is_nan() {
        return Err(Error::domain("NaN integration limit"));
    }
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if a == f64::INFINITY {
        return Ok(std_normal_cdf(b));
    }
    if b == f64::INFINITY {
        return Ok(std_normal_cdf(a));
    }
    Ok(bvnd(-a, -b, rho).clamp(0.0, 1.0))
}

/// Positive nodes and weights of the 20-point Gauss-Legendre rule on [-1, 1].
pub(crate) fn gauss_legendre_20() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let nf = n as f64;
    (1..=n / 2)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Upper orthant `P(X > h, Y > k)`.
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let rule = gauss_legendre_20();
    let two_pi = 2.0 * PI;
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for &(x, w) in rule {
            for sign in [1.0, -1.0] {
                let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (2.0 * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    let k = if r < 0.0 {
        hk = -hk;
        -k
    } else {
        k
    };
    let as_ = (1.0 - r) * (1.0 + r);
    let mut a = as_.sqrt();
    let bs = (h - k) * (h - k);
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    bvn = a
        * (-(bs / as_ + hk) / 2.0).exp()
        * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
    if hk > -160.0 {
        let b = bs.sqrt();
        bvn -= (-hk / 2.0).exp()
            * two_pi.sqrt()
            * std_normal_cdf(-b / a)
            * b
            * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for &(x, w) in rule {
        for sign in [1.0, -1.0] {
            let xs = (a * (sign * x + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            let asr = -(bs / xs + hk) / 2.0;
            if asr > -100.0 {
                bvn += a
                    * w
                    * asr.exp()
                    * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                        - (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
    }
    bvn = -bvn / two_pi;

    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-k)).max(0.0)
    }
}

/// `erf^{-1}` via the normal quantile, `erf^{-1}(y) = quantile((y+1)/2)/sqrt(2)`.
pub fn erf_inv(y: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::domain(format!("erf_inv argument {y} outside [-1, 1]")));
    }
    Ok(quantile_unchecked((y + 1.0) / 2.0) / SQRT_2)
}
