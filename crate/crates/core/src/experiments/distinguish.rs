//! Telling `u` from `v + u` with a threshold on the log-likelihood ratio.
//!
//! With `u_n = |n|^{-a_u} g_n` and `v_n = scale |n|^{-a_v}`, the statistic
//! `T(x) = sum 2 kappa Re(conj(v_n) x_n) / sigma_n^2` is `N(0, h)` under `u`
//! and `N(h, h)` under `v + u`, with `h = ||v||_H^2`, so the best achievable
//! accuracy is `Phi(sqrt(h) / 2)`. It tends to one as `N` grows exactly when
//! the two measures are singular.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{kakutani_power_law, PowerLawPair, Verdict};
use crate::random_fields::{fill_sample, sigma_table, GaussianFieldSpec};
use crate::rng::{par_map, RandomSeed};
use crate::stats::normal_cdf;

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinguishConfig {
    pub u_decay: f64,
    pub v_decay: f64,
    #[serde(default = "unit")]
    pub v_scale: f64,
    pub n_max: usize,
    /// Samples per class; half train the threshold, half test it.
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub real_valued: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguishReport {
    pub n_max: usize,
    pub test_size: usize,
    pub threshold: f64,
    pub accuracy: f64,
    pub accuracy_se: f64,
    /// `Phi(||v||_H / 2)` at this truncation.
    pub bayes_accuracy: f64,
    pub cm_norm_sq: f64,
    pub verdict: Verdict,
}

/// Accuracy of the rule "shifted iff `T > threshold`".
fn accuracy(plain: &[f64], shifted: &[f64], threshold: f64) -> f64 {
    let correct = plain.iter().filter(|&&t| t <= threshold).count() + shifted.iter().filter(|&&t| t > threshold).count();
    correct as f64 / (plain.len() + shifted.len()) as f64
}

/// Threshold maximizing training accuracy; ties go to the smallest candidate.
fn train(plain: &[f64], shifted: &[f64]) -> f64 {
    let mut all: Vec<f64> = plain.iter().chain(shifted).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let mut best = (accuracy(plain, shifted, f64::NEG_INFINITY), f64::NEG_INFINITY);
    for &t in &all {
        let a = accuracy(plain, shifted, t);
        if a > best.0 {
            best = (a, t);
        }
    }
    best.1
}

pub fn distinguishability_demo(cfg: &DistinguishConfig) -> Result<DistinguishReport> {
    if cfg.samples < 4 {
        return Err(Error::InvalidConfig(format!("need at least 4 samples per class, got {}", cfg.samples)));
    }
    if cfg.n_max == 0 {
        return Err(Error::InvalidConfig("n_max must be positive".into()));
    }
    let base = GaussianFieldSpec::fwa(cfg.u_decay, cfg.n_max, cfg.real_valued);
    base.validate()?;
    let n = cfg.n_max as i64;
    let v: Vec<f64> = (-n..=n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                cfg.v_scale * (k.unsigned_abs() as f64).powf(-cfg.v_decay)
            }
        })
        .collect();
    let sigmas = sigma_table(&base);
    let two_kappa = 2.0 * base.kappa();
    // T(x) = sum a_n Re(x_n), a_n = 2 kappa v_n / sigma_n^2 (v_n real).
    let a: Vec<f64> = v
        .iter()
        .zip(&sigmas)
        .map(|(v, s)| if *s > 0.0 { two_kappa * v / (s * s) } else { 0.0 })
        .collect();
    let cm_norm_sq: f64 = a.iter().zip(&v).map(|(a, v)| a * v).sum();

    let seed = RandomSeed::new(cfg.seed);
    let stat = |shift: bool, i: usize| {
        let mut rng = seed.derive(u64::from(shift)).child(i as u64).rng();
        let mut x = vec![Complex64::new(0.0, 0.0); sigmas.len()];
        fill_sample(cfg.real_valued, &sigmas, &mut rng, &mut x);
        let t: f64 = a.iter().zip(&x).map(|(a, x)| a * x.re).sum();
        if shift {
            t + cm_norm_sq
        } else {
            t
        }
    };
    let plain = par_map(cfg.samples, |i| stat(false, i));
    let shifted = par_map(cfg.samples, |i| stat(true, i));
    let half = cfg.samples / 2;
    let threshold = train(&plain[..half], &shifted[..half]);
    let acc = accuracy(&plain[half..], &shifted[half..], threshold);
    let test_size = 2 * (cfg.samples - half);

    let verdict = kakutani_power_law(
        PowerLawPair {
            u_decay: cfg.u_decay,
            v_decay: cfg.v_decay,
            v_scale: cfg.v_scale,
            dim: 1,
        },
        cfg.n_max,
    )?
    .verdict;
    Ok(DistinguishReport {
        n_max: cfg.n_max,
        test_size,
        threshold,
        accuracy: acc,
        accuracy_se: (acc * (1.0 - acc) / test_size as f64).sqrt(),
        bayes_accuracy: normal_cdf(cm_norm_sq.sqrt() / 2.0),
        cm_norm_sq,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v_decay: f64, v_scale: f64, n_max: usize) -> DistinguishConfig {
        DistinguishConfig {
            u_decay: 1.0,
            v_decay,
            v_scale,
            n_max,
            samples: 2000,
            seed: 4,
            real_valued: false,
        }
    }

    #[test]
    fn zero_shift_is_chance() {
        let r = distinguishability_demo(&cfg(1.0, 0.0, 64)).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.bayes_accuracy, 0.5);
        assert_eq!(r.verdict, Verdict::Equivalent);
    }

    #[test]
    fn accuracy_tracks_the_bayes_rate() {
        let r = distinguishability_demo(&cfg(1.0, 0.05, 256)).unwrap();
        // cm_norm_sq = 2 * 2 * 0.05^2 * 256.
        assert!((r.cm_norm_sq - 2.56).abs() < 1e-12);
        assert!((r.accuracy - r.bayes_accuracy).abs() < 4.0 * r.accuracy_se + 0.02, "{r:?}");
        assert_eq!(r.verdict, Verdict::Singular);
    }

    #[test]
    fn deterministic() {
        let c = cfg(2.0, 0.5, 32);
        assert_eq!(distinguishability_demo(&c).unwrap(), distinguishability_demo(&c).unwrap());
    }

    #[test]
    fn training_picks_a_separating_threshold() {
        let t = train(&[0.0, 1.0, 2.0], &[3.0, 4.0, 5.0]);
        assert_eq!(t, 2.0);
        assert_eq!(accuracy(&[0.0, 1.0, 2.0], &[3.0, 4.0, 5.0], t), 1.0);
    }
}
