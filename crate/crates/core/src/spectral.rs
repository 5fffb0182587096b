//! Fourier representation of functions on the torus `[0, 2pi)`.
//!
//! A [`TorusField`] stores `u(x) = sum_{|n| <= N} c_n e^{inx}` as its `2N + 1`
//! coefficients in `n = -N..=N` order. Integrals are over `[0, 2pi)`, so
//! `int |u|^2 dx = 2pi sum |c_n|^2`; [`TorusField::mean_square`] exposes the
//! normalized `sum |c_n|^2` and [`TorusField::mass`] the unnormalized value.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

const SYMMETRY_TOL: f64 = 1e-12;

/// Collocation grid for physical-space evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Number of equispaced points `x_j = 2 pi j / M`; a power of two.
    pub m_points: usize,
    /// Padding factor used when the grid was sized for products.
    pub padding_factor: f64,
}

impl GridConfig {
    pub fn new(m_points: usize) -> Result<Self> {
        if m_points < 2 || !m_points.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "grid size must be a power of two >= 2, got {m_points}"
            )));
        }
        Ok(Self {
            m_points,
            padding_factor: 1.0,
        })
    }

    /// Smallest power of two `>= padding * (2N + 1)` and `>= 2N + 2`.
    pub fn for_truncation(n_max: usize, padding_factor: f64) -> Self {
        let padded = (padding_factor.max(1.0) * (2 * n_max + 1) as f64).ceil() as usize;
        let m_points = padded.max(2 * n_max + 2).next_power_of_two();
        Self {
            m_points,
            padding_factor,
        }
    }

    /// 3/2 padding: exact quadratic products at truncation `N`.
    pub fn quadratic(n_max: usize) -> Self {
        Self::for_truncation(n_max, 1.5)
    }

    /// Padding 2: exact cubic products at truncation `N`.
    pub fn cubic(n_max: usize) -> Self {
        Self::for_truncation(n_max, 2.0)
    }

    pub fn points(&self) -> usize {
        self.m_points
    }

    pub(crate) fn require(&self, required: usize, what: &str) -> Result<()> {
        if self.m_points < required {
            return Err(Error::GridTooSmall {
                what: what.to_string(),
                required,
                actual: self.m_points,
            });
        }
        Ok(())
    }
}

/// Minimum `M` for which `|u|^p` (or `u^p`) is resolved on the grid.
///
/// For even integer `p` the integrand is a trigonometric polynomial of degree
/// `pN` and the equispaced rule is exact once `M > pN`. Other exponents use the
/// same count as a resolution floor.
pub fn min_points_for_power(n_max: usize, p: f64) -> usize {
    let poly = (p.ceil() as usize) * n_max + 1;
    poly.max(2 * n_max + 2)
}

/// A function on the torus as a truncated Fourier series.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    n_max: usize,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

impl TorusField {
    pub fn zeros(n_max: usize, real_valued: bool) -> Self {
        Self {
            n_max,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n_max + 1],
            real_valued,
        }
    }

    /// Builds a field from coefficients in `n = -N..=N` order.
    ///
    /// With `real_valued`, the coefficients must satisfy `c_{-n} = conj(c_n)`
    /// up to a relative `1e-12`; they are then symmetrized exactly.
    pub fn from_coeffs(n_max: usize, coeffs: Vec<Complex64>, real_valued: bool) -> Result<Self> {
        if coeffs.len() != 2 * n_max + 1 {
            return Err(Error::SizeMismatch {
                expected: 2 * n_max + 1,
                actual: coeffs.len(),
            });
        }
        if let Some(k) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite coefficient at n = {}",
                k as i64 - n_max as i64
            )));
        }
        let mut field = Self {
            n_max,
            coeffs,
            real_valued: false,
        };
        if real_valued {
            let scale = field.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
            for n in 0..=n_max as i64 {
                let a = field.coeff(n);
                let b = field.coeff(-n).conj();
                if (a - b).norm() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidField(format!(
                        "real-valued field violates c(-n) = conj(c(n)) at n = {n}"
                    )));
                }
            }
            field = field.into_real();
        }
        Ok(field)
    }

    /// A single complex mode `c e^{inx}`.
    pub fn single_mode(n_max: usize, n: i64, c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(n_max, false);
        f.set(n, c)?;
        Ok(f)
    }

    /// Builds a field from a per-mode closure evaluated for `n = -N..=N`.
    pub fn from_fn(n_max: usize, real_valued: bool, mut f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        let coeffs = (-(n_max as i64)..=n_max as i64).map(&mut f).collect();
        Self::from_coeffs(n_max, coeffs, real_valued)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Coefficients in `n = -N..=N` order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Iterates `(n, c_n)` for `n = -N..=N`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n0 = self.n_max as i64;
        self.coeffs.iter().enumerate().map(move |(k, c)| (k as i64 - n0, *c))
    }

    /// `c_n`, zero outside the truncation.
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.n_max as i64) as usize]
    }

    fn set(&mut self, n: i64, c: Complex64) -> Result<()> {
        if n.unsigned_abs() as usize > self.n_max {
            return Err(Error::TruncationMismatch {
                field: n.unsigned_abs() as usize,
                limit: self.n_max,
            });
        }
        self.coeffs[(n + self.n_max as i64) as usize] = c;
        Ok(())
    }

    /// Projects onto real-valued fields: `c_n <- (c_n + conj c_{-n}) / 2`.
    pub fn into_real(mut self) -> Self {
        let n0 = self.n_max;
        let mid = self.coeffs[n0];
        self.coeffs[n0] = Complex64::new(mid.re, 0.0);
        for k in 1..=n0 {
            let a = self.coeffs[n0 + k];
            let b = self.coeffs[n0 - k];
            let avg = (a + b.conj()) * 0.5;
            self.coeffs[n0 + k] = avg;
            self.coeffs[n0 - k] = avg.conj();
        }
        self.real_valued = true;
        self
    }

    /// Drops the real-valued flag without touching coefficients.
    pub fn into_complex(mut self) -> Self {
        self.real_valued = false;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Inhomogeneous Sobolev norm `(sum <n>^{2s} |c_n|^2)^{1/2}`, `<n> = (1+n^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.modes()
            .map(|(n, c)| (1.0 + (n * n) as f64).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Homogeneous Sobolev norm `(sum_{n != 0} |n|^{2s} |c_n|^2)^{1/2}`.
    pub fn homogeneous_sobolev_norm(&self, s: f64) -> f64 {
        self.modes()
            .filter(|(n, _)| *n != 0)
            .map(|(n, c)| (n.unsigned_abs() as f64).powf(2.0 * s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Normalized mean `c_0 = (1/2pi) int u dx`.
    pub fn mean_value(&self) -> Complex64 {
        self.coeff(0)
    }

    /// `(1/2pi) int |u|^2 dx = sum |c_n|^2`.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `int |u|^2 dx = 2pi sum |c_n|^2`.
    pub fn mass(&self) -> f64 {
        2.0 * PI * self.mean_square()
    }

    /// `||u||_{L^2} = (int |u|^2 dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `(2pi/M) sum_j |u(x_j)|^p`, the equispaced quadrature of `int |u|^p dx`.
    pub fn lp_integral(&self, p: f64, grid: &GridConfig) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidSpec(format!("lp_integral needs p >= 1, got {p}")));
        }
        grid.require(min_points_for_power(self.n_max, p), &format!("|u|^{p} quadrature"))?;
        let values = self.to_physical(grid)?;
        let m = values.len() as f64;
        Ok(2.0 * PI / m * values.iter().map(|u| u.norm().powf(p)).sum::<f64>())
    }

    /// Coefficientwise multiplier `(in)^k`.
    pub fn derivative(&self, k: u32) -> Self {
        let ik = |n: i64| Complex64::new(0.0, n as f64).powu(k);
        let coeffs = self.modes().map(|(n, c)| ik(n) * c).collect();
        Self {
            n_max: self.n_max,
            coeffs,
            real_valued: self.real_valued,
        }
    }

    /// Drops modes with `|n| > n_new`; zero-pads when `n_new > N`.
    pub fn truncate(&self, n_new: usize) -> Self {
        let coeffs = (-(n_new as i64)..=n_new as i64).map(|n| self.coeff(n)).collect();
        Self {
            n_max: n_new,
            coeffs,
            real_valued: self.real_valued,
        }
    }

    /// Samples `u(x_j)` at `x_j = 2 pi j / M`.
    pub fn to_physical(&self, grid: &GridConfig) -> Result<Vec<Complex64>> {
        grid.require(2 * self.n_max + 2, "lossless transform")?;
        Ok(coeffs_to_grid(&self.coeffs, self.n_max, grid.m_points))
    }

    /// Inverse of [`TorusField::to_physical`], keeping modes `|n| <= n_max`.
    pub fn from_physical(samples: &[Complex64], n_max: usize) -> Result<Self> {
        let m = samples.len();
        if m < 2 * n_max + 2 || !m.is_power_of_two() {
            return Err(Error::SizeMismatch {
                expected: (2 * n_max + 2).next_power_of_two(),
                actual: m,
            });
        }
        let coeffs = grid_to_coeffs(samples.to_vec(), n_max);
        Self::from_coeffs(n_max, coeffs, false)
    }

    /// Exact product `u v` restricted to `|n| <= out_n`, computed on a padded grid.
    pub fn product(&self, other: &Self, out_n: usize) -> Self {
        let m = (self.n_max + other.n_max + out_n + 1)
            .max(2 * self.n_max.max(other.n_max).max(out_n) + 2)
            .next_power_of_two();
        let a = coeffs_to_grid(&self.coeffs, self.n_max, m);
        let b = coeffs_to_grid(&other.coeffs, other.n_max, m);
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self {
            n_max: out_n,
            coeffs: grid_to_coeffs(prod, out_n),
            real_valued: self.real_valued && other.real_valued,
        }
        .normalized_real()
    }

    fn normalized_real(self) -> Self {
        if self.real_valued {
            self.into_real()
        } else {
            self
        }
    }

    /// `self + other` at the larger truncation.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    /// `self - other` at the larger truncation.
    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let n = self.n_max.max(other.n_max);
        let coeffs = (-(n as i64)..=n as i64)
            .map(|k| self.coeff(k) + other.coeff(k) * sign)
            .collect();
        Self {
            n_max: n,
            coeffs,
            real_valued: self.real_valued && other.real_valued,
        }
    }

    /// Real scalar multiple; keeps the real-valued flag.
    pub fn scale(&self, a: f64) -> Self {
        Self {
            n_max: self.n_max,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            real_valued: self.real_valued,
        }
    }

    /// Applies a per-mode map `c_n -> f(n, c_n)`; the result is complex-valued.
    pub fn map_modes(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self.modes().map(|(n, c)| f(n, c)).collect();
        Self {
            n_max: self.n_max,
            coeffs,
            real_valued: false,
        }
    }

    /// Largest coefficientwise distance, relative to the larger field's sup.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.n_max.max(other.n_max) as i64;
        (-n..=n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_raw(n_max: usize, coeffs: Vec<Complex64>, real_valued: bool) -> Self {
        debug_assert_eq!(coeffs.len(), 2 * n_max + 1);
        Self {
            n_max,
            coeffs,
            real_valued,
        }
        .normalized_real()
    }
}

/// Places `c_n` at index `n mod M` and inverse-transforms.
pub(crate) fn coeffs_to_grid(coeffs: &[Complex64], n_max: usize, m: usize) -> Vec<Complex64> {
    debug_assert!(m >= 2 * n_max + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (k, c) in coeffs.iter().enumerate() {
        let n = k as i64 - n_max as i64;
        buf[n.rem_euclid(m as i64) as usize] = *c;
    }
    fft::inverse(&mut buf);
    buf
}

/// Forward transform, normalizes by `1/M`, and keeps modes `|n| <= n_max`.
pub(crate) fn grid_to_coeffs(mut buf: Vec<Complex64>, n_max: usize) -> Vec<Complex64> {
    let m = buf.len();
    debug_assert!(m >= 2 * n_max + 1);
    fft::forward(&mut buf);
    let scale = 1.0 / m as f64;
    (-(n_max as i64)..=n_max as i64)
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * scale)
        .collect()
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n_max: usize,
    real_valued: bool,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for TorusField {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr {
            n_max: self.n_max,
            real_valued: self.real_valued,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TorusField {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(deserializer)?;
        let coeffs = repr.coeffs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        TorusField::from_coeffs(repr.n_max, coeffs, repr.real_valued).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(n_max: usize, real: bool, seed: u64) -> TorusField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = TorusField::from_fn(n_max, false, |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .unwrap();
        if real {
            f.into_real()
        } else {
            f
        }
    }

    /// Dense midpoint quadrature of `int |u|^p`, evaluating the series directly.
    fn dense_lp(f: &TorusField, p: f64, points: usize) -> f64 {
        let h = 2.0 * PI / points as f64;
        (0..points)
            .map(|j| {
                let x = (j as f64 + 0.5) * h;
                let u: Complex64 = f.modes().map(|(n, cn)| cn * Complex64::from_polar(1.0, n as f64 * x)).sum();
                u.norm().powf(p) * h
            })
            .sum()
    }

    #[test]
    fn sobolev_norm_examples() {
        assert_eq!(TorusField::zeros(4, false).sobolev_norm(1.3), 0.0);
        let f = TorusField::single_mode(3, 1, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(f.sobolev_norm(0.0), 1.0);
        let g = TorusField::single_mode(3, 2, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(g.sobolev_norm(1.0), 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(g.homogeneous_sobolev_norm(1.0), 2.0);
    }

    #[test]
    fn lp_integral_examples() {
        let grid = GridConfig::new(64).unwrap();
        assert_eq!(TorusField::zeros(4, true).lp_integral(4.0, &grid).unwrap(), 0.0);

        let a = 1.7;
        let constant = TorusField::single_mode(4, 0, c(a, 0.0)).unwrap();
        assert_relative_eq!(constant.lp_integral(2.0, &grid).unwrap(), 2.0 * PI * a * a, max_relative = 1e-12);

        // |e^{ix}|^4 = 1, so the dense oracle and the grid rule both give 2 pi.
        let mode = TorusField::single_mode(4, 1, c(1.0, 0.0)).unwrap();
        let oracle = dense_lp(&mode, 4.0, 20_000);
        assert_relative_eq!(oracle, 2.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(mode.lp_integral(4.0, &grid).unwrap(), oracle, max_relative = 1e-12);

        // Real cosine: 16 cos^4 integrates to 12 pi.
        let cos2 = TorusField::from_fn(2, true, |n| if n.abs() == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        assert_relative_eq!(cos2.lp_integral(4.0, &grid).unwrap(), 12.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn lp_integral_matches_dense_quadrature_on_random_fields() {
        for seed in 0..5 {
            let f = random_field(5, seed % 2 == 0, seed);
            let grid = GridConfig::new(32).unwrap();
            for p in [2.0, 4.0, 6.0] {
                let exact = f.lp_integral(p, &grid).unwrap();
                assert_relative_eq!(exact, dense_lp(&f, p, 4096), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn lp_integral_refuses_coarse_grid() {
        let f = random_field(8, false, 3);
        let err = f.lp_integral(4.0, &GridConfig::new(32).unwrap()).unwrap_err();
        assert!(matches!(err, Error::GridTooSmall { required: 33, actual: 32, .. }));
    }

    #[test]
    fn mean_value_and_mean_square() {
        assert_eq!(TorusField::zeros(2, false).mean_value(), c(0.0, 0.0));
        let f = TorusField::single_mode(2, 0, c(3.0, 1.0)).unwrap();
        assert_eq!(f.mean_value(), c(3.0, 1.0));
        let g = TorusField::single_mode(2, 1, c(0.6, -0.8) * 2.0).unwrap();
        assert_relative_eq!(g.mean_square(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(g.mass(), 8.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let constant = TorusField::single_mode(3, 0, c(2.0, 0.0)).unwrap();
        assert!(constant.derivative(1).is_zero());
        let m1 = TorusField::single_mode(3, 1, c(1.0, 0.0)).unwrap().derivative(2);
        assert_relative_eq!(m1.coeff(1).re, -1.0);
        assert!(m1.coeff(1).im.abs() < 1e-15);
        let m2 = TorusField::single_mode(3, 2, c(1.0, 0.0)).unwrap().derivative(3);
        assert!((m2.coeff(2) - c(0.0, -8.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_preserves_real_symmetry() {
        let f = random_field(6, true, 9);
        for k in 1..4 {
            let d = f.derivative(k);
            assert!(d.is_real_valued());
            for n in 0..=6 {
                assert!((d.coeff(-n) - d.coeff(n).conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn truncate_examples() {
        let f = random_field(5, false, 1);
        assert_eq!(f.truncate(5), f);
        let m5 = TorusField::single_mode(6, 5, c(1.0, 1.0)).unwrap();
        assert!(m5.truncate(3).is_zero());
        assert_eq!(f.truncate(2).truncate(2), f.truncate(2));
        assert_eq!(f.truncate(8).truncate(5), f);
    }

    #[test]
    fn zero_field_round_trips() {
        let grid = GridConfig::new(16).unwrap();
        let z = TorusField::zeros(5, false);
        let back = TorusField::from_physical(&z.to_physical(&grid).unwrap(), 5).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn transform_size_mismatch() {
        let f = random_field(8, false, 2);
        assert!(f.to_physical(&GridConfig::new(16).unwrap()).is_err());
        assert!(TorusField::from_physical(&vec![c(0.0, 0.0); 16], 8).is_err());
    }

    #[test]
    fn product_matches_convolution_exhaustively_small() {
        // Brute-force O(N^2) convolution oracle over all truncations <= 8.
        for na in 0..=8usize {
            for nb in [0usize, 3, 8] {
                let a = random_field(na, false, 100 + na as u64);
                let b = random_field(nb, false, 200 + nb as u64);
                let out = na.max(nb);
                let prod = a.product(&b, out);
                for k in -(out as i64)..=out as i64 {
                    let mut exact = c(0.0, 0.0);
                    for (n, cn) in a.modes() {
                        exact += cn * b.coeff(k - n);
                    }
                    assert!((prod.coeff(k) - exact).norm() < 1e-13, "na={na} nb={nb} k={k}");
                }
            }
        }
    }

    #[test]
    fn rejects_asymmetric_real_field() {
        let coeffs = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        assert!(TorusField::from_coeffs(1, coeffs, true).is_err());
        let nan = vec![c(f64::NAN, 0.0)];
        assert!(TorusField::from_coeffs(0, nan, false).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = random_field(6, true, 42);
        let text = serde_json::to_string(&f).unwrap();
        let back: TorusField = serde_json::from_str(&text).unwrap();
        assert!(f.max_abs_diff(&back) <= 1e-15 * f.sobolev_norm(0.0));
        assert_eq!(back.is_real_valued(), true);
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(seed in any::<u64>(), n_max in 0usize..20, real in any::<bool>()) {
            let f = random_field(n_max, real, seed);
            let grid = GridConfig::for_truncation(n_max, 1.0);
            let back = TorusField::from_physical(&f.to_physical(&grid).unwrap(), n_max).unwrap();
            prop_assert!(f.max_abs_diff(&back) <= 1e-12 * f.sobolev_norm(0.0).max(1e-300));
            let l2 = f.lp_integral(2.0, &grid).unwrap();
            prop_assert!((l2 - f.mass()).abs() <= 1e-12 * f.mass());
        }

        #[test]
        fn sobolev_is_a_norm(seed in any::<u64>(), s in -2.0f64..2.0, a in -3.0f64..3.0) {
            let f = random_field(7, false, seed);
            let g = random_field(7, false, seed ^ 0xdead_beef);
            let tri = f.add(&g).sobolev_norm(s);
            prop_assert!(tri <= f.sobolev_norm(s) + g.sobolev_norm(s) + 1e-12);
            prop_assert!((f.scale(a).sobolev_norm(s) - a.abs() * f.sobolev_norm(s)).abs() <= 1e-12 * (1.0 + f.sobolev_norm(s)));
        }

        #[test]
        fn truncation_is_contractive_and_monotone_in_s(seed in any::<u64>(), n_new in 0usize..10, s in -1.0f64..1.5) {
            let f = random_field(10, seed % 3 == 0, seed);
            prop_assert!(f.truncate(n_new).sobolev_norm(s) <= f.sobolev_norm(s) + 1e-15);
            prop_assert!(f.sobolev_norm(s) <= f.sobolev_norm(s + 0.25) + 1e-15);
        }

        #[test]
        fn real_combinations_stay_symmetric(seed in any::<u64>(), a in -2.0f64..2.0) {
            let f = random_field(6, true, seed);
            let g = random_field(6, true, seed.wrapping_add(1));
            let h = f.scale(a).add(&g).truncate(4);
            prop_assert!(h.is_real_valued());
            for n in 0..=4 {
                prop_assert!((h.coeff(-n) - h.coeff(n).conj()).norm() < 1e-14);
            }
        }
    }
}
