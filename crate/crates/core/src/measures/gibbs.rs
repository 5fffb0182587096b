//! Gibbs measures as reweighted Gaussian fields.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_fields::{sample, GaussianFieldSpec};
use crate::rng::{par_map, RandomSeed};
use crate::sign::Sign;
use crate::spectral::{min_points_for_power, GridConfig, TorusField};

/// ESS below this fraction of the ensemble size flags weight degeneracy.
pub const ESS_FLOOR: f64 = 0.01;

fn yes() -> bool {
    true
}

/// `d mu = Z^{-1} 1_{||u||_{L^2} <= B} exp(-+ (beta/p) int |u|^p) d rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub p: u32,
    pub sign: Sign,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_b: Option<f64>,
    pub base: GaussianFieldSpec,
    /// With `false` the weight is identically one (the base measure itself).
    #[serde(default = "yes")]
    pub potential: bool,
}

impl GibbsSpec {
    pub fn new(p: u32, sign: Sign, beta: f64, base: GaussianFieldSpec) -> Self {
        Self {
            p,
            sign,
            beta,
            cutoff_b: None,
            base,
            potential: true,
        }
    }

    /// Gibbs measure whose Gaussian part is `exp(-beta (1/2) int (|u_x|^2 + |u|^2))`.
    ///
    /// That is FWb with `alpha = 1` and per-mode variance `kappa / (pi beta (1 + n^2))`,
    /// the base under which the truncated flows preserve the full Gibbs measure.
    pub fn matched(p: u32, sign: Sign, beta: f64, n_max: usize, real_valued: bool) -> Self {
        let base = GaussianFieldSpec::fwb(1.0, n_max, real_valued);
        let scale = base.kappa() / (PI * beta);
        Self::new(p, sign, beta, base.with_variance_scale(scale))
    }

    pub fn with_cutoff(mut self, b: f64) -> Self {
        self.cutoff_b = Some(b);
        self
    }

    pub fn without_potential(mut self) -> Self {
        self.potential = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.p < 3 {
            return Err(Error::InvalidSpec(format!("Gibbs power p must be >= 3, got {}", self.p)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidSpec(format!("beta must be positive, got {}", self.beta)));
        }
        if let Some(b) = self.cutoff_b {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidSpec(format!("cutoff radius must be positive, got {b}")));
            }
        }
        if self.sign == Sign::Minus && self.potential {
            if self.p > 6 {
                return Err(Error::InvalidSpec(format!(
                    "focusing Gibbs measure is not normalizable for p = {} > 6",
                    self.p
                )));
            }
            if self.cutoff_b.is_none() {
                return Err(Error::InvalidSpec("focusing Gibbs measure needs an L2 cutoff".into()));
            }
        }
        Ok(())
    }

    /// Smallest power-of-two grid resolving `|u|^p` at the base truncation.
    pub fn grid(&self) -> GridConfig {
        let m = min_points_for_power(self.base.n_max, self.p as f64).next_power_of_two();
        GridConfig {
            m_points: m,
            padding_factor: m as f64 / (2 * self.base.n_max + 1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsWeight {
    pub log_weight: f64,
    pub within_cutoff: bool,
}

impl GibbsWeight {
    /// Log of the unnormalized density including the cutoff indicator.
    pub fn effective(&self) -> f64 {
        if self.within_cutoff {
            self.log_weight
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `-+ (beta/p) int |u|^p` and the indicator `||u||_{L^2} <= B`.
pub fn gibbs_log_weight(f: &TorusField, spec: &GibbsSpec, grid: &GridConfig) -> Result<GibbsWeight> {
    spec.validate()?;
    let within_cutoff = spec.cutoff_b.is_none_or(|b| f.l2_norm() <= b);
    if !spec.potential {
        return Ok(GibbsWeight {
            log_weight: 0.0,
            within_cutoff,
        });
    }
    let integral = f.lp_integral(spec.p as f64, grid)?;
    Ok(GibbsWeight {
        log_weight: -spec.sign.value() * spec.beta / spec.p as f64 * integral,
        within_cutoff,
    })
}

/// Base samples with self-normalized importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsemble {
    pub fields: Vec<TorusField>,
    pub log_weights: Vec<f64>,
    /// Normalized weights summing to one.
    pub weights: Vec<f64>,
    /// `1 / sum w_i^2`.
    pub ess: f64,
    /// `ess < ESS_FLOOR * len`.
    pub degenerate: bool,
    /// All unnormalized weights are at most one (defocusing, no cutoff loss).
    pub bounded_density: bool,
}

impl WeightedEnsemble {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `sum_i w_i F(u_i)`.
    pub fn expectation(&self, f: impl Fn(&TorusField) -> f64) -> f64 {
        self.fields.iter().zip(&self.weights).map(|(u, w)| w * f(u)).sum()
    }

    /// Multinomial resampling to `m_out` unweighted draws.
    pub fn resample(&self, m_out: usize, seed: RandomSeed) -> Vec<TorusField> {
        let mut cdf = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w;
            cdf.push(acc);
        }
        let mut rng = seed.rng();
        (0..m_out)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let k = cdf.partition_point(|&c| c < u).min(self.fields.len() - 1);
                self.fields[k].clone()
            })
            .collect()
    }

    /// Exact rejection thinning: keeps sample `i` with probability `exp(log w_i)`.
    ///
    /// Only valid when the density is bounded by one; returns `None` otherwise.
    pub fn thin(&self, seed: RandomSeed) -> Option<Vec<TorusField>> {
        if !self.bounded_density {
            return None;
        }
        let mut rng = seed.rng();
        Some(
            self.fields
                .iter()
                .zip(&self.log_weights)
                .filter(|(_, lw)| rng.random::<f64>() < lw.exp())
                .map(|(u, _)| u.clone())
                .collect(),
        )
    }
}

/// Normalizes log-weights; returns weights and ESS.
pub fn normalize_log_weights(log_weights: &[f64]) -> Result<(Vec<f64>, f64)> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical("every sample has zero Gibbs weight".into()));
    }
    let raw: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    Ok((weights, ess))
}

/// Draws `m` base samples (sample `i` from `seed.child(i)`) and weights them.
pub fn gibbs_ensemble(spec: &GibbsSpec, m: usize, seed: RandomSeed) -> Result<WeightedEnsemble> {
    spec.validate()?;
    if m < 100 {
        return Err(Error::InvalidSpec(format!("Gibbs ensemble needs at least 100 samples, got {m}")));
    }
    let grid = spec.grid();
    let drawn: Vec<Result<(TorusField, f64)>> = par_map(m, |i| {
        let u = sample(&spec.base, seed.child(i as u64))?;
        let w = gibbs_log_weight(&u, spec, &grid)?;
        Ok((u, w.effective()))
    });
    let (fields, log_weights): (Vec<_>, Vec<_>) = drawn.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let (weights, ess) = normalize_log_weights(&log_weights)?;
    let bounded_density = log_weights.iter().all(|lw| *lw <= 0.0);
    Ok(WeightedEnsemble {
        degenerate: ess < ESS_FLOOR * m as f64,
        fields,
        log_weights,
        weights,
        ess,
        bounded_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;
    use num_complex::Complex64;

    fn grid16() -> GridConfig {
        GridConfig::new(64).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        let spec = GibbsSpec::new(4, Sign::Plus, 1.0, GaussianFieldSpec::fwb(1.0, 4, false));
        let zero = gibbs_log_weight(&TorusField::zeros(4, false), &spec, &grid16()).unwrap();
        assert_eq!(zero.log_weight, 0.0);
        assert!(zero.within_cutoff);

        // int |e^{ix}|^4 = 2 pi.
        let mode = TorusField::single_mode(4, 1, Complex64::new(1.0, 0.0)).unwrap();
        let w = gibbs_log_weight(&mode, &spec, &grid16()).unwrap();
        assert!((w.log_weight + 0.25 * 2.0 * PI).abs() < 1e-13);

        let focusing = GibbsSpec::new(4, Sign::Minus, 1.0, GaussianFieldSpec::fwb(1.0, 4, false));
        let b = mode.l2_norm() - 0.1;
        let w = gibbs_log_weight(&mode, &focusing.with_cutoff(b), &grid16()).unwrap();
        assert!(!w.within_cutoff);
        assert!(w.log_weight > 0.0);
        assert_eq!(w.effective(), f64::NEG_INFINITY);
    }

    #[test]
    fn spec_validation() {
        let base = GaussianFieldSpec::fwb(1.0, 4, false);
        assert!(GibbsSpec::new(8, Sign::Minus, 1.0, base.clone()).with_cutoff(1.0).validate().is_err());
        assert!(GibbsSpec::new(6, Sign::Minus, 1.0, base.clone()).validate().is_err());
        assert!(GibbsSpec::new(4, Sign::Minus, 1.0, base.clone()).validate().is_err());
        assert!(GibbsSpec::new(6, Sign::Minus, 1.0, base.clone()).with_cutoff(0.5).validate().is_ok());
        assert!(GibbsSpec::new(2, Sign::Plus, 1.0, base.clone()).validate().is_err());
        assert!(GibbsSpec::new(4, Sign::Plus, 0.0, base.clone()).validate().is_err());
        assert!(GibbsSpec::new(8, Sign::Plus, 1.0, base).validate().is_ok());
    }

    #[test]
    fn defocusing_weight_is_nonpositive() {
        let spec = GibbsSpec::matched(4, Sign::Plus, 1.0, 8, false);
        let ens = gibbs_ensemble(&spec, 300, RandomSeed::new(2)).unwrap();
        assert!(ens.log_weights.iter().all(|lw| *lw <= 0.0));
        assert!(ens.bounded_density);
        assert!((ens.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disabled_potential_gives_uniform_weights() {
        let spec = GibbsSpec::matched(4, Sign::Plus, 1.0, 8, false).without_potential();
        let ens = gibbs_ensemble(&spec, 200, RandomSeed::new(3)).unwrap();
        assert!(ens.weights.iter().all(|w| (w - 1.0 / 200.0).abs() < 1e-15));
        assert!((ens.ess - 200.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples_rejected() {
        let spec = GibbsSpec::matched(4, Sign::Plus, 1.0, 8, false);
        assert!(gibbs_ensemble(&spec, 99, RandomSeed::new(0)).is_err());
    }

    #[test]
    fn reweighting_lowers_the_quartic_moment() {
        let spec = GibbsSpec::new(4, Sign::Plus, 1.0, GaussianFieldSpec::fwb(1.0, 16, false));
        let ens = gibbs_ensemble(&spec, 2000, RandomSeed::new(5)).unwrap();
        let grid = spec.grid();
        let l4 = |u: &TorusField| u.lp_integral(4.0, &grid).unwrap();
        let weighted = ens.expectation(l4);
        let plain = ens.fields.iter().map(l4).sum::<f64>() / ens.len() as f64;
        assert!(weighted < plain);
    }

    #[test]
    fn weighted_mean_matches_rejection_oracle() {
        // Independent oracle: accept base draws with probability exp(log w) <= 1.
        let spec = GibbsSpec::new(4, Sign::Plus, 1.0, GaussianFieldSpec::fwb(1.0, 4, true));
        let grid = spec.grid();
        let functional = |u: &TorusField| u.coeff(0).re + u.coeff(1).norm_sqr();
        let ens = gibbs_ensemble(&spec, 20_000, RandomSeed::new(7)).unwrap();
        let snis = ens.expectation(functional);
        let centered: Vec<f64> = ens
            .fields
            .iter()
            .zip(&ens.weights)
            .map(|(u, w)| w * ens.len() as f64 * (functional(u) - snis))
            .collect();
        let snis_se = mean_se(&centered).1;

        let mut rng = RandomSeed::new(8).rng();
        let mut accepted = Vec::new();
        for i in 0..60_000u64 {
            let u = sample(&spec.base, RandomSeed::new(8).child(i)).unwrap();
            let lw = gibbs_log_weight(&u, &spec, &grid).unwrap().log_weight;
            if rng.random::<f64>() < lw.exp() {
                accepted.push(functional(&u));
            }
        }
        let (oracle, oracle_se) = mean_se(&accepted);
        let se = (snis_se.powi(2) + oracle_se.powi(2)).sqrt();
        assert!((snis - oracle).abs() < 4.0 * se, "{snis} vs {oracle} (se {se})");
    }
}
