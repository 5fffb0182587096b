//! Named parameter sets for the standard runs.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{CmConfig, InvarianceConfig, MeasureSpec, Reduction};
use crate::measures::GibbsSpec;
use crate::pde::EquationSpec;
use crate::random_fields::GaussianFieldSpec;
use crate::{Sign, TorusField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Real mean-zero white noise under Galerkin KdV (`p = 3`).
    KdvWhiteNoise,
    /// Defocusing quartic Gibbs measure (`beta = 1`) under Galerkin Wick NLS.
    WickNlsGibbs,
    /// Cubic defocusing NLS from `v0 + FWb(alpha = 1)`.
    #[serde(rename = "theorem-1")]
    Theorem1,
    /// KdV from `v0 + white noise`, real and mean zero.
    #[serde(rename = "theorem-2")]
    Theorem2,
    /// Wick NLS from `v0 + FWb(alpha = 0.45)`.
    #[serde(rename = "theorem-3")]
    Theorem3,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::KdvWhiteNoise,
        Preset::WickNlsGibbs,
        Preset::Theorem1,
        Preset::Theorem2,
        Preset::Theorem3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::KdvWhiteNoise => "kdv-white-noise",
            Preset::WickNlsGibbs => "wick-nls-gibbs",
            Preset::Theorem1 => "theorem-1",
            Preset::Theorem2 => "theorem-2",
            Preset::Theorem3 => "theorem-3",
        }
    }

    pub fn is_invariance(self) -> bool {
        matches!(self, Preset::KdvWhiteNoise | Preset::WickNlsGibbs)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset {s:?}")))
    }
}

/// Exponent of the Theorem 3 base; any value in `(5/12, 1/2]` fits.
pub const THEOREM3_ALPHA: f64 = 0.45;

/// `dt = 1e-4` at `N = 32`, scaled like the `N^{-3}` step guard.
pub fn kdv_dt(n_max: usize) -> f64 {
    1e-4 * (32.0 / n_max.max(1) as f64).powi(3)
}

/// `dt = 1e-3` at `N = 16`, scaled like the `N^{-2}` step guard.
pub fn nls_dt(n_max: usize) -> f64 {
    1e-3 * (16.0 / n_max.max(1) as f64).powi(2)
}

/// `0.5 exp(-n^2 / 8)`, optionally without its mean.
pub fn smooth_bump(n_max: usize, real_valued: bool, mean_zero: bool) -> TorusField {
    TorusField::from_fn(n_max, real_valued, |n| {
        if mean_zero && n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.5 * (-((n * n) as f64) / 8.0).exp(), 0.0)
        }
    })
    .expect("real symmetric coefficients")
}

pub fn invariance_preset(preset: Preset, n_max: usize, samples: usize, t_final: f64, seed: u64) -> Result<InvarianceConfig> {
    let (measure, equation, dt) = match preset {
        Preset::KdvWhiteNoise => (
            MeasureSpec::Gaussian(GaussianFieldSpec::white(n_max, true)),
            EquationSpec::gkdv(3, Sign::Plus),
            kdv_dt(n_max),
        ),
        Preset::WickNlsGibbs => (
            MeasureSpec::Gibbs(GibbsSpec::matched(4, Sign::Plus, 1.0, n_max, false)),
            EquationSpec::wick_nls(Sign::Plus),
            nls_dt(n_max),
        ),
        other => {
            return Err(Error::InvalidConfig(format!(
                "{} is a Cameron-Martin preset, not an invariance preset",
                other.name()
            )))
        }
    };
    Ok(InvarianceConfig {
        measure,
        equation,
        t_final,
        dt,
        samples,
        seed,
        level: 0.01,
        reduction: Reduction::Auto,
    })
}

pub fn cm_preset(preset: Preset, n_max: usize, samples: usize, t_final: f64, seed: u64) -> Result<CmConfig> {
    let (v0, base, equation, dt) = match preset {
        Preset::Theorem1 => (
            smooth_bump(n_max, false, false),
            GaussianFieldSpec::fwb(1.0, n_max, false),
            EquationSpec::nls(4, Sign::Plus),
            nls_dt(n_max),
        ),
        Preset::Theorem2 => (
            smooth_bump(n_max, true, true),
            GaussianFieldSpec::white(n_max, true),
            EquationSpec::gkdv(3, Sign::Plus),
            kdv_dt(n_max),
        ),
        Preset::Theorem3 => (
            smooth_bump(n_max, false, false),
            GaussianFieldSpec::fwb(THEOREM3_ALPHA, n_max, false),
            EquationSpec::wick_nls(Sign::Plus),
            nls_dt(n_max),
        ),
        other => {
            return Err(Error::InvalidConfig(format!(
                "{} is an invariance preset, not a Cameron-Martin preset",
                other.name()
            )))
        }
    };
    Ok(CmConfig {
        v0,
        base,
        samples,
        seed,
        equation: Some(equation),
        t_final,
        dt,
        evolve_samples: 200.min(samples),
        snapshots: 10,
        v0_decay: None,
    })
}
