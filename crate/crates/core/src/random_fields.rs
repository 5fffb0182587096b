//! Gaussian random Fourier series on the torus.
//!
//! Every family is a diagonal Gaussian in Fourier space, `c_n = sigma_n g_n`,
//! with `g_n` standard complex Gaussians (`E|g_n|^2 = 1`). Real-valued fields
//! draw `g_n` for `n >= 1`, set `g_{-n} = conj(g_n)`, and use a real `N(0, 1)`
//! for `g_0`.
//!
//! Draws are made in the order `0, 1, -1, 2, -2, ...`, so a sample at
//! truncation `N` is the truncation of the sample at any larger truncation
//! with the same seed.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{complex_normal, normal, par_map, RandomSeed};
use crate::spectral::TorusField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `sigma_n = |n|^{-alpha}`, mean zero.
    #[serde(rename = "fwa", alias = "FWa")]
    FWa,
    /// `sigma_n = (1 + |n|^{2 alpha})^{-1/2}`.
    #[serde(rename = "fwb", alias = "FWb")]
    FWb,
    /// `sigma_n = 1`, mean zero.
    #[serde(rename = "white", alias = "White")]
    White,
    /// `sigma_n = |u_n|` for a given coefficient sequence.
    #[serde(rename = "general", alias = "GeneralRandomization")]
    General,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// A diagonal Gaussian measure on truncated Fourier series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFieldSpec {
    pub family: Family,
    #[serde(default)]
    pub alpha: f64,
    pub n_max: usize,
    pub real_valued: bool,
    pub mean_zero: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_coeffs: Option<TorusField>,
    /// Multiplies every `sigma_n^2`.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub variance_scale: f64,
}

impl GaussianFieldSpec {
    pub fn fwa(alpha: f64, n_max: usize, real_valued: bool) -> Self {
        Self::plain(Family::FWa, alpha, n_max, real_valued, true)
    }

    pub fn fwb(alpha: f64, n_max: usize, real_valued: bool) -> Self {
        Self::plain(Family::FWb, alpha, n_max, real_valued, false)
    }

    pub fn white(n_max: usize, real_valued: bool) -> Self {
        Self::plain(Family::White, 0.0, n_max, real_valued, true)
    }

    /// Randomization `sum g_n u_n e^{inx}` of a fixed field `u`.
    pub fn general(base: TorusField, real_valued: bool) -> Self {
        let mut spec = Self::plain(Family::General, 0.0, base.n_max(), real_valued, false);
        spec.base_coeffs = Some(base);
        spec
    }

    fn plain(family: Family, alpha: f64, n_max: usize, real_valued: bool, mean_zero: bool) -> Self {
        Self {
            family,
            alpha,
            n_max,
            real_valued,
            mean_zero,
            base_coeffs: None,
            variance_scale: 1.0,
        }
    }

    pub fn with_mean_zero(mut self, mean_zero: bool) -> Self {
        self.mean_zero = mean_zero;
        self
    }

    pub fn with_variance_scale(mut self, scale: f64) -> Self {
        self.variance_scale = scale;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::FWa | Family::White if !self.mean_zero => {
                return Err(Error::InvalidSpec(format!(
                    "{:?} excludes mode 0; set mean_zero",
                    self.family
                )))
            }
            Family::General if self.base_coeffs.is_none() => {
                return Err(Error::InvalidSpec("general randomization needs base_coeffs".into()))
            }
            _ => {}
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidSpec(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(self.variance_scale > 0.0 && self.variance_scale.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "variance_scale must be positive, got {}",
                self.variance_scale
            )));
        }
        Ok(())
    }

    /// Per-mode standard deviation; zero for excluded modes.
    pub fn sigma(&self, n: i64) -> f64 {
        if n.unsigned_abs() as usize > self.n_max || (self.mean_zero && n == 0) {
            return 0.0;
        }
        let a = n.unsigned_abs() as f64;
        let base = match self.family {
            Family::FWa | Family::White if n == 0 => 0.0,
            Family::FWa => a.powf(-self.alpha),
            Family::FWb => (1.0 + a.powf(2.0 * self.alpha)).powf(-0.5),
            Family::White => 1.0,
            Family::General => {
                let m = if self.real_valued { n.abs() } else { n };
                self.base_coeffs.as_ref().map_or(0.0, |b| b.coeff(m).norm())
            }
        };
        base * self.variance_scale.sqrt()
    }

    pub fn variance(&self, n: i64) -> f64 {
        self.sigma(n).powi(2)
    }

    /// Density exponent `kappa`: the law is proportional to `exp(-kappa sum |c_n|^2 / sigma_n^2)`.
    pub fn kappa(&self) -> f64 {
        if self.real_valued {
            0.5
        } else {
            1.0
        }
    }

    /// `E ||phi||_{H^s}^2 = sum <n>^{2s} sigma_n^2`.
    pub fn expected_sobolev_sq(&self, s: f64) -> f64 {
        let n = self.n_max as i64;
        (-n..=n).map(|k| (1.0 + (k * k) as f64).powf(s) * self.variance(k)).sum()
    }
}

/// Draws one field from `spec`.
pub fn sample(spec: &GaussianFieldSpec, seed: RandomSeed) -> Result<TorusField> {
    spec.validate()?;
    let n = spec.n_max;
    let sigmas = sigma_table(spec);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    fill_sample(spec.real_valued, &sigmas, &mut seed.rng(), &mut coeffs);
    Ok(TorusField::from_raw(n, coeffs, spec.real_valued))
}

/// `sigma_n` for `n = -N..=N`.
pub(crate) fn sigma_table(spec: &GaussianFieldSpec) -> Vec<f64> {
    let n = spec.n_max as i64;
    (-n..=n).map(|k| spec.sigma(k)).collect()
}

/// Writes one draw into `out` (modes `-N..=N`), consuming `rng` in the
/// canonical order.
pub(crate) fn fill_sample<R: Rng + ?Sized>(real_valued: bool, sigmas: &[f64], rng: &mut R, out: &mut [Complex64]) {
    let n = sigmas.len() / 2;
    if real_valued {
        out[n] = Complex64::new(normal(rng) * sigmas[n], 0.0);
        for k in 1..=n {
            let c = complex_normal(rng) * sigmas[n + k];
            out[n + k] = c;
            out[n - k] = c.conj();
        }
    } else {
        out[n] = complex_normal(rng) * sigmas[n];
        for k in 1..=n {
            out[n + k] = complex_normal(rng) * sigmas[n + k];
            out[n - k] = complex_normal(rng) * sigmas[n - k];
        }
    }
}

/// `v0 + phi` with `phi = sample(spec, seed)`.
pub fn shifted_sample(v0: &TorusField, spec: &GaussianFieldSpec, seed: RandomSeed) -> Result<TorusField> {
    scaled_sample(v0, 1.0, spec, seed)
}

/// `v0 + eps phi` with `phi = sample(spec, seed)`.
pub fn scaled_sample(v0: &TorusField, epsilon: f64, spec: &GaussianFieldSpec, seed: RandomSeed) -> Result<TorusField> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidSpec(format!("epsilon must be positive, got {epsilon}")));
    }
    if v0.n_max() > spec.n_max {
        return Err(Error::TruncationMismatch {
            field: v0.n_max(),
            limit: spec.n_max,
        });
    }
    let phi = sample(spec, seed)?;
    Ok(v0.add(&phi.scale(epsilon)))
}

/// `m` independent samples, sample `i` drawn from `seed.child(i)`.
pub fn sample_ensemble(spec: &GaussianFieldSpec, m: usize, seed: RandomSeed) -> Result<Vec<TorusField>> {
    spec.validate()?;
    par_map(m, |i| sample(spec, seed.child(i as u64))).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Bounded,
    Diverging,
}

/// Growth of the truncated Sobolev norm of samples as `N` increases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub s: f64,
    pub n_grid: Vec<usize>,
    /// Median over samples of `||P_N phi||_{H^s}`.
    pub median_norms: Vec<f64>,
    /// `d log median(||P_N phi||^2) / d log N` over the largest decade.
    pub slope: f64,
    pub classification: Growth,
}

/// Slope at or above which the partial norms count as diverging.
pub const DIVERGENCE_SLOPE: f64 = 0.1;

/// Classifies `phi` in `H^s` as bounded or diverging from nested truncations.
///
/// Samples are drawn once at the largest `N` and truncated, so the partial
/// norms of each sample are monotone in `N`.
pub fn sobolev_threshold_probe(
    spec: &GaussianFieldSpec,
    s: f64,
    n_grid: &[usize],
    samples: usize,
    seed: RandomSeed,
) -> Result<ThresholdReport> {
    if n_grid.len() < 3 {
        return Err(Error::InvalidSpec(format!(
            "threshold probe needs at least 3 truncations, got {}",
            n_grid.len()
        )));
    }
    if spec.family == Family::General {
        return Err(Error::InvalidSpec("threshold probe supports fwa, fwb and white".into()));
    }
    if samples == 0 || n_grid.contains(&0) {
        return Err(Error::InvalidSpec("threshold probe needs samples > 0 and N > 0".into()));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let n_top = *grid.last().unwrap();
    let big = spec.clone().with_n_max(n_top);
    big.validate()?;

    let weights: Vec<f64> = (0..=n_top).map(|k| (1.0 + (k * k) as f64).powf(s)).collect();
    let per_sample: Vec<Vec<f64>> = par_map(samples, |i| {
        let f = sample(&big, seed.child(i as u64)).expect("validated spec");
        let mut out = Vec::with_capacity(grid.len());
        let mut acc = f.coeff(0).norm_sqr() * weights[0];
        let mut k = 0usize;
        for &n in &grid {
            while k < n {
                k += 1;
                acc += weights[k] * (f.coeff(k as i64).norm_sqr() + f.coeff(-(k as i64)).norm_sqr());
            }
            out.push(acc);
        }
        out
    });
    let medians_sq: Vec<f64> = (0..grid.len())
        .map(|j| crate::stats::median(per_sample.iter().map(|v| v[j]).collect()))
        .collect();

    let lo = grid
        .iter()
        .rposition(|&n| n * 10 <= n_top)
        .unwrap_or(0);
    let hi = grid.len() - 1;
    let slope = (medians_sq[hi] / medians_sq[lo]).ln() / (grid[hi] as f64 / grid[lo] as f64).ln();
    let classification = if slope >= DIVERGENCE_SLOPE {
        Growth::Diverging
    } else {
        Growth::Bounded
    };
    Ok(ThresholdReport {
        s,
        n_grid: grid,
        median_norms: medians_sq.iter().map(|v| v.sqrt()).collect(),
        slope,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(i: u64) -> RandomSeed {
        RandomSeed::new(i)
    }

    #[test]
    fn sigma_profiles() {
        let fwb = GaussianFieldSpec::fwb(1.0, 8, false);
        assert_eq!(fwb.sigma(0), 1.0);
        assert!((fwb.sigma(3) - 10f64.powf(-0.5)).abs() < 1e-15);
        let fwa = GaussianFieldSpec::fwa(0.75, 8, true);
        assert_eq!(fwa.sigma(0), 0.0);
        assert!((fwa.sigma(-4) - 4f64.powf(-0.75)).abs() < 1e-15);
        let w = GaussianFieldSpec::white(8, true);
        assert_eq!(w.sigma(0), 0.0);
        assert_eq!(w.sigma(8), 1.0);
        assert_eq!(w.sigma(9), 0.0);
        let scaled = GaussianFieldSpec::fwb(1.0, 4, false).with_variance_scale(4.0);
        assert_eq!(scaled.sigma(0), 2.0);
    }

    #[test]
    fn fwa_with_mode_zero_is_rejected() {
        let bad = GaussianFieldSpec::fwa(1.0, 4, false).with_mean_zero(false);
        assert!(matches!(sample(&bad, seed(0)), Err(Error::InvalidSpec(_))));
        let bad = GaussianFieldSpec::white(4, false).with_mean_zero(false);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn real_samples_are_conjugate_symmetric() {
        for fam in [GaussianFieldSpec::white(12, true), GaussianFieldSpec::fwb(0.5, 12, true)] {
            for i in 0..50 {
                let f = sample(&fam, seed(i)).unwrap();
                assert!(f.is_real_valued());
                assert_eq!(f.coeff(0).im, 0.0);
                for n in 1..=12 {
                    assert_eq!(f.coeff(-n), f.coeff(n).conj());
                }
            }
        }
    }

    #[test]
    fn samples_are_nested_in_truncation() {
        for real in [false, true] {
            let small = sample(&GaussianFieldSpec::fwb(1.0, 5, real), seed(3)).unwrap();
            let big = sample(&GaussianFieldSpec::fwb(1.0, 40, real), seed(3)).unwrap();
            assert_eq!(big.truncate(5), small);
        }
    }

    #[test]
    fn same_seed_same_field() {
        let spec = GaussianFieldSpec::fwb(1.0, 16, false);
        assert_eq!(sample(&spec, seed(5)).unwrap(), sample(&spec, seed(5)).unwrap());
        assert_ne!(sample(&spec, seed(5)).unwrap(), sample(&spec, seed(6)).unwrap());
    }

    #[test]
    fn shifted_and_scaled_samples() {
        let spec = GaussianFieldSpec::white(6, true);
        let zero = TorusField::zeros(6, true);
        assert_eq!(shifted_sample(&zero, &spec, seed(1)).unwrap(), sample(&spec, seed(1)).unwrap());

        let v0 = TorusField::from_fn(3, true, |n| Complex64::new(1.0 / (1.0 + n.abs() as f64), 0.0)).unwrap();
        let shifted = shifted_sample(&v0, &spec, seed(2)).unwrap();
        assert_eq!(shifted.coeff(0), v0.coeff(0));
        assert_eq!(scaled_sample(&v0, 1.0, &spec, seed(2)).unwrap(), shifted);

        let tiny = scaled_sample(&v0, 1e-300, &spec, seed(2)).unwrap();
        assert!(tiny.max_abs_diff(&v0) < 1e-290);
        assert!(scaled_sample(&v0, 0.0, &spec, seed(2)).is_err());
        assert!(scaled_sample(&v0, -1.0, &spec, seed(2)).is_err());

        let too_big = TorusField::zeros(7, true);
        assert!(matches!(
            shifted_sample(&too_big, &spec, seed(2)),
            Err(Error::TruncationMismatch { field: 7, limit: 6 })
        ));
    }

    #[test]
    fn scaled_sample_is_linear_in_epsilon() {
        let spec = GaussianFieldSpec::fwb(1.0, 8, false);
        let v0 = TorusField::single_mode(8, 2, Complex64::new(0.3, -0.1)).unwrap();
        let phi = sample(&spec, seed(9)).unwrap();
        for eps in [0.1, 0.5, 2.0] {
            let u = scaled_sample(&v0, eps, &spec, seed(9)).unwrap();
            assert!(u.sub(&v0).sub(&phi.scale(eps)).sobolev_norm(0.0) < 1e-14);
        }
    }
}
