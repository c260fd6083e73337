//! Port grids and their spatial correlation matrices.
//!
//! Ports are numbered `1..=N` in row-major order: port `k` sits at
//! `(k1, k2)` with `k = (k1 - 1) * n2 + k2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{cylindrical_bessel_j0, spherical_bessel_j0};

/// Scattering model behind the port-to-port correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationKernel {
    /// 3-D isotropic scattering, `sin(x)/x`.
    #[default]
    Spherical,
    /// 2-D isotropic scattering, Bessel `J0(x)`.
    Cylindrical,
}

impl CorrelationKernel {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            CorrelationKernel::Spherical => spherical_bessel_j0(x),
            CorrelationKernel::Cylindrical => cylindrical_bessel_j0(x),
        }
    }
}

/// A planar fluid antenna with `n1 x n2` ports spread uniformly over an
/// aperture of `w1 x w2` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortGrid {
    n1: usize,
    n2: usize,
    w1: f64,
    w2: f64,
    kernel: CorrelationKernel,
}

impl PortGrid {
    pub fn new(n1: usize, n2: usize, w1: f64, w2: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::domain(format!("port counts must be positive, got {n1}x{n2}")));
        }
        if !(w1 >= 0.0 && w1.is_finite() && w2 >= 0.0 && w2.is_finite()) {
            return Err(Error::domain(format!("apertures must be finite and nonnegative, got {w1}x{w2}")));
        }
        Ok(PortGrid {
            n1,
            n2,
            w1,
            w2,
            kernel: CorrelationKernel::default(),
        })
    }

    /// The single fixed-position antenna.
    pub fn fixed() -> Self {
        PortGrid {
            n1: 1,
            n2: 1,
            w1: 0.0,
            w2: 0.0,
            kernel: CorrelationKernel::default(),
        }
    }

    pub fn with_kernel(mut self, kernel: CorrelationKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    pub fn kernel(&self) -> CorrelationKernel {
        self.kernel
    }

    /// Total number of ports.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 1-based port index to 1-based `(k1, k2)` grid coordinates.
    pub fn index_to_pair(&self, k: usize) -> Result<(usize, usize)> {
        if k == 0 || k > self.len() {
            return Err(Error::IndexOutOfRange { index: k, max: self.len() });
        }
        Ok(((k - 1) / self.n2 + 1, (k - 1) % self.n2 + 1))
    }

    pub fn pair_to_index(&self, k1: usize, k2: usize) -> Result<usize> {
        if k1 == 0 || k1 > self.n1 {
            return Err(Error::IndexOutOfRange { index: k1, max: self.n1 });
        }
        if k2 == 0 || k2 > self.n2 {
            return Err(Error::IndexOutOfRange { index: k2, max: self.n2 });
        }
        Ok((k1 - 1) * self.n2 + k2)
    }

    /// Correlation between ports `n` and `m` (1-based).
    pub fn spatial_correlation(&self, n: usize, m: usize) -> Result<f64> {
        let (a1, a2) = self.index_to_pair(n)?;
        let (b1, b2) = self.index_to_pair(m)?;
        Ok(self.correlation_at(a1.abs_diff(b1), a2.abs_diff(b2)))
    }

    fn correlation_at(&self, d1: usize, d2: usize) -> f64 {
        // a single-port axis has no extent
        let axis = |d: usize, n: usize, w: f64| {
            if n > 1 {
                d as f64 / (n - 1) as f64 * w
            } else {
                0.0
            }
        };
        let s1 = axis(d1, self.n1, self.w1);
        let s2 = axis(d2, self.n2, self.w2);
        self.kernel.eval(2.0 * PI * s1.hypot(s2)).clamp(-1.0, 1.0)
    }

    pub fn correlation_matrix(&self) -> Result<CorrelationMatrix> {
        let n = self.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let (a1, a2) = (i / self.n2, i % self.n2);
            entries[i * n + i] = 1.0;
            for j in 0..i {
                let (b1, b2) = (j / self.n2, j % self.n2);
                let rho = self.correlation_at(a1.abs_diff(b1), a2.abs_diff(b2));
                entries[i * n + j] = rho;
                entries[j * n + i] = rho;
            }
        }
        CorrelationMatrix::from_entries(n, entries)
    }
}

/// Jitter ladder for the Cholesky factorization.
const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-6;

/// Symmetric, unit-diagonal correlation matrix together with a lower
/// Cholesky factor of `entries + jitter * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<f64>,
    chol: Vec<f64>,
    jitter: f64,
}

impl CorrelationMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        CorrelationMatrix {
            dim,
            chol: entries.clone(),
            entries,
            jitter: 0.0,
        }
    }

    /// All off-diagonal entries equal to `rho`.
    pub fn equicorrelated(dim: usize, rho: f64) -> Result<Self> {
        let mut entries = vec![rho; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self::from_entries(dim, entries)
    }

    /// Validates a row-major matrix and factors it, adding the smallest
    /// jitter from the ladder `0, 1e-12, 1e-11, ..., 1e-6` that succeeds.
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("correlation matrix must have dimension >= 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for i in 0..dim {
            if (entries[i * dim + i] - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if !(a.abs() <= 1.0) || (a - b).abs() > 1e-14 {
                    return Err(Error::domain(format!("entry ({i},{j}) is not a valid symmetric correlation")));
                }
            }
        }
        let mut jitter = 0.0;
        loop {
            if let Some(chol) = cholesky(dim, &entries, jitter) {
                if jitter > 0.0 {
                    log::debug!("correlation matrix of dim {dim} factored with jitter {jitter:e}");
                }
                return Ok(CorrelationMatrix { dim, entries, chol, jitter });
            }
            jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
            if jitter > JITTER_MAX * 1.000_001 {
                return Err(Error::DegenerateGeometry { max_jitter: JITTER_MAX });
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-major lower-triangular factor of `entries + jitter * I`.
    pub fn chol(&self) -> &[f64] {
        &self.chol
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == 0.0))
    }

    /// Mean of the off-diagonal entries, unclamped; 0 for `dim = 1`.
    pub fn mean_off_diagonal(&self) -> f64 {
        let n = self.dim;
        if n < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..i {
                sum += self.get(i, j);
            }
        }
        sum / (n * (n - 1) / 2) as f64
    }

    /// Average pairwise dependence used by the expected-maximum heuristic:
    /// the mean off-diagonal correlation, clamped below at zero.
    pub fn average_dependence(&self) -> f64 {
        let mean = self.mean_off_diagonal();
        if mean < 0.0 {
            log::debug!("average dependence {mean} clamped to 0");
            0.0
        } else {
            mean
        }
    }

    /// `ln det(entries + jitter * I)`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim).map(|i| 2.0 * self.chol[i * self.dim + i].ln()).sum()
    }

    /// Solves `L z = v` by forward substitution.
    pub fn forward_solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let n = self.dim;
        let mut z = vec![0.0; n];
        for i in 0..n {
            let row = &self.chol[i * n..i * n + i];
            let s: f64 = row.iter().zip(&z).map(|(l, zk)| l * zk).sum();
            let d = self.chol[i * n + i];
            if d <= 0.0 {
                return Err(Error::SingularMatrix);
            }
            z[i] = (v[i] - s) / d;
        }
        Ok(z)
    }

    /// Frobenius-relative residual of `L L^T` against `entries + jitter * I`.
    pub fn factor_residual(&self) -> f64 {
        let n = self.dim;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            for j in 0..n {
                let llt: f64 = (0..=i.min(j)).map(|k| self.chol[i * n + k] * self.chol[j * n + k]).sum();
                let target = self.get(i, j) + if i == j { self.jitter } else { 0.0 };
                num += (llt - target).powi(2);
                den += target * target;
            }
        }
        (num / den).sqrt()
    }
}

fn cholesky(n: usize, a: &[f64], jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] + jitter - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_mapping_examples() {
        let g = PortGrid::new(2, 3, 1.0, 1.0).unwrap();
        assert_eq!(g.index_to_pair(1).unwrap(), (1, 1));
        assert_eq!(g.index_to_pair(6).unwrap(), (2, 3));
        assert_eq!(g.index_to_pair(4).unwrap(), (2, 1));
        assert_eq!(g.pair_to_index(1, 1).unwrap(), 1);
        assert_eq!(g.pair_to_index(2, 3).unwrap(), 6);
        assert_eq!(g.pair_to_index(2, 1).unwrap(), 4);
        assert!(matches!(g.index_to_pair(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(g.index_to_pair(7), Err(Error::IndexOutOfRange { .. })));
        assert!(g.pair_to_index(3, 1).is_err());
        assert!(g.pair_to_index(1, 0).is_err());
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(PortGrid::new(0, 2, 1.0, 1.0).is_err());
        assert!(PortGrid::new(2, 2, -0.1, 1.0).is_err());
        assert!(PortGrid::new(2, 2, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn correlation_examples() {
        let g = PortGrid::new(1, 2, 0.0, 0.5).unwrap();
        assert_eq!(g.spatial_correlation(1, 1).unwrap(), 1.0);
        assert!(g.spatial_correlation(1, 2).unwrap().abs() < 1e-15);
        let g = PortGrid::new(1, 2, 0.0, 0.25).unwrap();
        let expected = (PI / 2.0).sin() / (PI / 2.0);
        assert!((expected - std::f64::consts::FRAC_2_PI).abs() < 1e-10);
        assert!((g.spatial_correlation(1, 2).unwrap() - expected).abs() < 1e-15);
        assert_eq!(g.spatial_correlation(2, 1).unwrap(), g.spatial_correlation(1, 2).unwrap());
    }

    #[test]
    fn single_port_axis_ignores_aperture() {
        let g = PortGrid::new(1, 3, 5.0, 1.0).unwrap();
        let h = PortGrid::new(1, 3, 0.0, 1.0).unwrap();
        assert_eq!(g.correlation_matrix().unwrap().entries(), h.correlation_matrix().unwrap().entries());
    }

    #[test]
    fn matrix_examples() {
        let r = PortGrid::fixed().correlation_matrix().unwrap();
        assert_eq!(r.entries(), &[1.0]);
        let r = PortGrid::new(1, 2, 0.0, 0.5).unwrap().correlation_matrix().unwrap();
        assert!((r.get(0, 1)).abs() < 1e-15 && r.get(0, 0) == 1.0);
        let r = PortGrid::new(1, 2, 0.0, 0.25).unwrap().correlation_matrix().unwrap();
        assert!((r.get(0, 1) - std::f64::consts::FRAC_2_PI).abs() < 1e-10);
        assert_eq!(r.jitter(), 0.0);
    }

    #[test]
    fn dense_grid_needs_and_records_jitter() {
        // 8x8 ports in half a wavelength: numerically rank deficient
        let g = PortGrid::new(8, 8, 0.5, 0.5).unwrap();
        let r = g.correlation_matrix().unwrap();
        assert!(r.jitter() > 0.0);
        assert!(r.factor_residual() < 1e-10);
    }

    #[test]
    fn hopeless_matrix_is_degenerate() {
        let r = CorrelationMatrix::from_entries(2, vec![1.0, 1.0, 1.0, 1.0]);
        assert!(r.is_ok(), "rank-one 2x2 is rescued by jitter");
        // indefinite: three mutually anti-correlated variables
        let e = vec![1.0, -0.9, -0.9, -0.9, 1.0, -0.9, -0.9, -0.9, 1.0];
        assert!(matches!(
            CorrelationMatrix::from_entries(3, e),
            Err(Error::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn from_entries_validates() {
        assert!(CorrelationMatrix::from_entries(2, vec![1.0, 0.2, 0.3, 1.0]).is_err());
        assert!(CorrelationMatrix::from_entries(2, vec![0.9, 0.2, 0.2, 1.0]).is_err());
        assert!(CorrelationMatrix::from_entries(2, vec![1.0, 0.2, 0.2]).is_err());
    }

    #[test]
    fn average_dependence_examples() {
        assert_eq!(CorrelationMatrix::identity(4).average_dependence(), 0.0);
        assert_eq!(CorrelationMatrix::identity(1).average_dependence(), 0.0);
        let r = PortGrid::new(1, 2, 0.0, 0.25).unwrap().correlation_matrix().unwrap();
        assert!((r.average_dependence() - std::f64::consts::FRAC_2_PI).abs() < 1e-10);
        let e = vec![1.0, 0.6, 0.4, 0.6, 1.0, 0.2, 0.4, 0.2, 1.0];
        let r = CorrelationMatrix::from_entries(3, e).unwrap();
        assert!((r.average_dependence() - 0.4).abs() < 1e-15);
        let e = vec![1.0, -0.3, -0.3, 1.0];
        let r = CorrelationMatrix::from_entries(2, e).unwrap();
        assert_eq!(r.average_dependence(), 0.0);
        assert_eq!(r.mean_off_diagonal(), -0.3);
    }

    #[test]
    fn symmetric_unit_diagonal_for_many_grids() {
        for n1 in 1..=5 {
            for n2 in 1..=5 {
                for &w in &[0.1, 0.5, 1.0, 2.5] {
                    let r = PortGrid::new(n1, n2, w, 0.7 * w).unwrap().correlation_matrix().unwrap();
                    let n = r.dim();
                    for i in 0..n {
                        assert_eq!(r.get(i, i), 1.0);
                        for j in 0..n {
                            assert!((r.get(i, j) - r.get(j, i)).abs() < 1e-14);
                            assert!(r.get(i, j).abs() <= 1.0);
                        }
                    }
                    assert!(r.factor_residual() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn adjacent_correlation_decreases_with_aperture() {
        for n in [2, 4, 8] {
            let mut prev = f64::INFINITY;
            for i in 0..=50 {
                let w = 0.5 * i as f64 / 50.0;
                let g = PortGrid::new(1, n, 0.0, w).unwrap();
                let rho = g.spatial_correlation(1, 2).unwrap().abs();
                assert!(rho <= prev + 1e-15, "n={n} w={w}");
                prev = rho;
            }
        }
    }

    #[test]
    fn cylindrical_kernel_is_selectable() {
        let g = PortGrid::new(1, 2, 0.0, 0.25)
            .unwrap()
            .with_kernel(CorrelationKernel::Cylindrical);
        let rho = g.spatial_correlation(1, 2).unwrap();
        assert!((rho - libm::j0(PI / 2.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn index_round_trip(n1 in 1usize..=16, n2 in 1usize..=16) {
            let g = PortGrid::new(n1, n2, 1.0, 1.0).unwrap();
            for k in 1..=g.len() {
                let (a, b) = g.index_to_pair(k).unwrap();
                prop_assert!(a >= 1 && a <= n1 && b >= 1 && b <= n2);
                prop_assert_eq!(g.pair_to_index(a, b).unwrap(), k);
            }
        }
    }
}
