//! Shifted Gaussian ensembles: the importance-sampling identity and the
//! long-time behaviour of the shifted data under a flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{cameron_martin_log_density, cameron_martin_norm_sq};
use crate::pde::{evolve, linear_propagate, EquationSpec, SolverConfig};
use crate::random_fields::{sample, shifted_sample, Family, GaussianFieldSpec};
use crate::rng::{par_map, RandomSeed};
use crate::stats::mean_se;
use crate::TorusField;

/// Standard errors allowed between two estimates of the same mean.
pub const SE_TOLERANCE: f64 = 4.0;

/// `sup_t mass(t) / mass(0)` above this counts against the global-existence proxy.
pub const MASS_RATIO_LIMIT: f64 = 10.0;

fn default_evolve_samples() -> usize {
    200
}

fn default_record() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmConfig {
    pub v0: TorusField,
    pub base: GaussianFieldSpec,
    pub samples: usize,
    pub seed: u64,
    /// Flow applied to `v0 + phi`; `None` skips the evolution stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<EquationSpec>,
    #[serde(default)]
    pub t_final: f64,
    #[serde(default)]
    pub dt: f64,
    #[serde(default = "default_evolve_samples")]
    pub evolve_samples: usize,
    /// Snapshots per trajectory for the mass proxy.
    #[serde(default = "default_record")]
    pub snapshots: usize,
    /// When `|v0_n| ~ |n|^{-decay}`, also decide membership of the untruncated
    /// shift in the Cameron-Martin space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalCheck {
    pub functional: String,
    /// Plain average over `v0 + phi`.
    pub shifted_mean: f64,
    pub shifted_se: f64,
    /// Average of `F(phi) exp(logdens(phi))` over `phi`.
    pub weighted_mean: f64,
    pub weighted_se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub equation: EquationSpec,
    pub t_final: f64,
    pub dt: f64,
    pub samples: usize,
    pub blowups: usize,
    pub blowup_rate: f64,
    /// Largest `mass(t) / mass(0)` over samples and snapshots.
    pub max_mass_ratio: f64,
    /// Largest relative Hamiltonian drift over samples.
    pub max_hamiltonian_drift: f64,
    /// `||u(T) - S(T) u(0)||_{L^2}` (NLS family only): mean and maximum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlinear_part_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlinear_part_max: Option<f64>,
    /// No blowup and mass ratio within the limit. A proxy, not a proof.
    pub global_existence_proxy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmReport {
    pub n_max: usize,
    pub samples: usize,
    pub seed: RandomSeed,
    pub cm_norm_sq: f64,
    /// `E exp(logdens)`, exactly one.
    pub weight_mean: f64,
    pub weight_se: f64,
    pub weight_mean_pass: bool,
    /// `E exp(2 logdens)` against `exp(||v0||_H^2)`.
    pub weight_second_moment: f64,
    pub weight_second_moment_se: f64,
    pub weight_second_moment_expected: f64,
    pub functionals: Vec<FunctionalCheck>,
    /// Untruncated Cameron-Martin membership, when `v0_decay` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0_in_cm_space: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSummary>,
    pub flagged: bool,
}

type Functional = (&'static str, fn(&TorusField) -> f64);

const PANEL: [Functional; 6] = [
    ("re_c0", |f| f.coeff(0).re),
    ("re_c1", |f| f.coeff(1).re),
    ("im_c1", |f| f.coeff(1).im),
    ("abs2_c1", |f| f.coeff(1).norm_sqr()),
    ("l2_norm_sq", |f| f.mean_square()),
    ("h-1_norm", |f| f.sobolev_norm(-1.0)),
];

/// `sum_n |n|^{2 a}` converges with `a = alpha - decay` iff `2 (decay - alpha) > 1`,
/// where the base decays like `|n|^{-alpha}`.
fn cm_membership(base: &GaussianFieldSpec, decay: f64) -> Option<bool> {
    let alpha = match base.family {
        Family::FWa | Family::FWb => base.alpha,
        Family::White => 0.0,
        Family::General => return None,
    };
    Some(2.0 * (decay - alpha) > 1.0)
}

fn check(cfg: &CmConfig) -> Result<()> {
    cfg.base.validate()?;
    if cfg.samples < 100 {
        return Err(Error::InvalidConfig(format!("need at least 100 samples, got {}", cfg.samples)));
    }
    if let Some(eq) = &cfg.equation {
        eq.validate()?;
        if !(cfg.t_final > 0.0 && cfg.dt > 0.0) {
            return Err(Error::InvalidConfig("evolution needs positive t_final and dt".into()));
        }
        if !eq.is_schrodinger() && !(cfg.base.real_valued && cfg.v0.is_real_valued()) {
            return Err(Error::InvalidConfig("gKdV needs a real-valued base and shift".into()));
        }
        if cfg.evolve_samples == 0 {
            return Err(Error::InvalidConfig("evolve_samples must be positive".into()));
        }
    }
    Ok(())
}

fn evolution(cfg: &CmConfig, eq: &EquationSpec, seed: RandomSeed) -> Result<EvolutionSummary> {
    let n_max = cfg.base.n_max;
    let mut solver = SolverConfig::for_equation(eq, n_max, cfg.dt, cfg.t_final);
    let (steps, _) = solver.steps();
    solver.record_every = (steps / cfg.snapshots.max(1)).max(1);
    let m = cfg.evolve_samples;
    let runs = par_map(m, |i| -> Result<_> {
        let u0 = shifted_sample(&cfg.v0, &cfg.base, seed.child(i as u64))?;
        let traj = evolve(&u0, eq, &solver)?;
        let m0 = traj.mass_series[0];
        let ratio = traj
            .mass_series
            .iter()
            .map(|m| if m0 > 0.0 { m / m0 } else { 1.0 })
            .fold(0.0f64, f64::max);
        let h = &traj.hamiltonian_series;
        let drift = h
            .iter()
            .map(|x| (x - h[0]).abs() / h[0].abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        let nonlinear = (eq.is_schrodinger() && !traj.blowup_flag).then(|| {
            let t = *traj.times.last().expect("at least one snapshot");
            traj.final_field().sub(&linear_propagate(&u0, t, eq.family)).l2_norm()
        });
        Ok((traj.blowup_flag, ratio, drift, nonlinear))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let blowups = runs.iter().filter(|r| r.0).count();
    let max_mass_ratio = runs.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let max_hamiltonian_drift = runs.iter().filter(|r| !r.0).map(|r| r.2).fold(0.0f64, f64::max);
    let parts: Vec<f64> = runs.iter().filter_map(|r| r.3).collect();
    let (nonlinear_part_mean, nonlinear_part_max) = if parts.is_empty() {
        (None, None)
    } else {
        (
            Some(parts.iter().sum::<f64>() / parts.len() as f64),
            Some(parts.iter().copied().fold(0.0f64, f64::max)),
        )
    };
    Ok(EvolutionSummary {
        equation: *eq,
        t_final: cfg.t_final,
        dt: cfg.dt,
        samples: m,
        blowups,
        blowup_rate: blowups as f64 / m as f64,
        max_mass_ratio,
        max_hamiltonian_drift,
        nonlinear_part_mean,
        nonlinear_part_max,
        global_existence_proxy: blowups == 0 && max_mass_ratio <= MASS_RATIO_LIMIT,
    })
}

/// Checks `E_{rho_{v0}} F = E_rho[F exp(logdens)]` on a functional panel and,
/// when an equation is given, evolves shifted samples.
pub fn cameron_martin_experiment(cfg: &CmConfig) -> Result<CmReport> {
    check(cfg)?;
    let seed = RandomSeed::new(cfg.seed);
    let cm_norm_sq = cameron_martin_norm_sq(&cfg.v0, &cfg.base)?;
    let m = cfg.samples;

    let base_seed = seed.derive(1);
    let plain: Vec<(TorusField, f64)> = par_map(m, |i| -> Result<_> {
        let phi = sample(&cfg.base, base_seed.child(i as u64))?;
        let ld = cameron_martin_log_density(&cfg.v0, &phi, &cfg.base)?;
        Ok((phi, ld.exp()))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let shift_seed = seed.derive(2);
    let shifted: Vec<TorusField> = par_map(m, |i| shifted_sample(&cfg.v0, &cfg.base, shift_seed.child(i as u64)))
        .into_iter()
        .collect::<Result<_>>()?;

    let w: Vec<f64> = plain.iter().map(|(_, w)| *w).collect();
    let (weight_mean, weight_se) = mean_se(&w);
    let w2: Vec<f64> = w.iter().map(|w| w * w).collect();
    let (weight_second_moment, weight_second_moment_se) = mean_se(&w2);
    let weight_mean_pass = (weight_mean - 1.0).abs() <= SE_TOLERANCE * weight_se;

    let functionals: Vec<FunctionalCheck> = PANEL
        .iter()
        .map(|(name, f)| {
            let a: Vec<f64> = shifted.iter().map(f).collect();
            let b: Vec<f64> = plain.iter().map(|(phi, w)| f(phi) * w).collect();
            let (shifted_mean, shifted_se) = mean_se(&a);
            let (weighted_mean, weighted_se) = mean_se(&b);
            let se = shifted_se.hypot(weighted_se);
            let diff = shifted_mean - weighted_mean;
            let z = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            FunctionalCheck {
                functional: name.to_string(),
                shifted_mean,
                shifted_se,
                weighted_mean,
                weighted_se,
                z,
                pass: z.abs() <= SE_TOLERANCE,
            }
        })
        .collect();

    let evolution = cfg
        .equation
        .as_ref()
        .map(|eq| evolution(cfg, eq, seed.derive(3)))
        .transpose()?;
    let flagged = !weight_mean_pass
        || functionals.iter().any(|f| !f.pass)
        || evolution.as_ref().is_some_and(|e| !e.global_existence_proxy);
    Ok(CmReport {
        n_max: cfg.base.n_max,
        samples: m,
        seed,
        cm_norm_sq,
        weight_mean,
        weight_se,
        weight_mean_pass,
        weight_second_moment,
        weight_second_moment_se,
        weight_second_moment_expected: cm_norm_sq.exp(),
        functionals,
        v0_in_cm_space: cfg.v0_decay.and_then(|d| cm_membership(&cfg.base, d)),
        evolution,
        flagged,
    })
}
