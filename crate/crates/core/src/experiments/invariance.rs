//! Two-sample tests of measure invariance under truncated flows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{gibbs_ensemble, GibbsSpec};
use crate::pde::{evolve, EquationFamily, EquationSpec, SolverConfig};
use crate::random_fields::{sample_ensemble, GaussianFieldSpec};
use crate::rng::{par_map, RandomSeed};
use crate::stats::{holm_adjust, ks_two_sample, ks_two_sample_randomized, ks_uniform};
use crate::TorusField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Gaussian(GaussianFieldSpec),
    Gibbs(GibbsSpec),
}

impl MeasureSpec {
    pub fn n_max(&self) -> usize {
        match self {
            MeasureSpec::Gaussian(g) => g.n_max,
            MeasureSpec::Gibbs(g) => g.base.n_max,
        }
    }

    fn base(&self) -> &GaussianFieldSpec {
        match self {
            MeasureSpec::Gaussian(g) => g,
            MeasureSpec::Gibbs(g) => &g.base,
        }
    }
}

/// How a weighted Gibbs ensemble becomes an unweighted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// `Thin` when every weight is at most one, otherwise `Resample`.
    #[default]
    Auto,
    /// Keep sample `i` with probability `w_i`; exact and free of duplicates.
    Thin,
    /// Multinomial resampling down to `round(ESS)` draws.
    Resample,
}

fn default_level() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceConfig {
    pub measure: MeasureSpec,
    pub equation: EquationSpec,
    pub t_final: f64,
    pub dt: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub reduction: Reduction,
}

/// A scalar functional of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Re(i64),
    Im(i64),
    Abs2(i64),
    SobolevNorm(f64),
}

impl Observable {
    pub fn eval(&self, f: &TorusField) -> f64 {
        match *self {
            Observable::Re(n) => f.coeff(n).re,
            Observable::Im(n) => f.coeff(n).im,
            Observable::Abs2(n) => f.coeff(n).norm_sqr(),
            Observable::SobolevNorm(s) => f.sobolev_norm(s),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Observable::Re(n) => format!("re_c{n}"),
            Observable::Im(n) => format!("im_c{n}"),
            Observable::Abs2(n) => format!("abs2_c{n}"),
            Observable::SobolevNorm(s) => format!("h{s}_norm"),
        }
    }
}

/// Modes `0, ±1, ±2, ±5, ±floor(N/2)` (nonnegative only for real fields,
/// skipping modes the measure does not charge), then the `L^2` and `H^{-1}` norms.
pub fn observable_panel(base: &GaussianFieldSpec) -> Vec<Observable> {
    let (n_max, real_valued) = (base.n_max, base.real_valued);
    let mut modes: Vec<i64> = [0, 1, 2, 5, (n_max / 2) as i64]
        .into_iter()
        .filter(|&n| n as usize <= n_max && base.sigma(n) > 0.0)
        .collect();
    modes.sort_unstable();
    modes.dedup();
    let mut signed = Vec::new();
    for &n in &modes {
        signed.push(n);
        if n > 0 && !real_valued {
            signed.push(-n);
        }
    }
    let mut panel = Vec::new();
    for &n in &signed {
        panel.push(Observable::Re(n));
        if !(real_valued && n == 0) {
            panel.push(Observable::Im(n));
        }
        panel.push(Observable::Abs2(n));
    }
    panel.push(Observable::SobolevNorm(0.0));
    panel.push(Observable::SobolevNorm(-1.0));
    panel
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTest {
    pub observable: String,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub p_holm: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub drawn: usize,
    /// Samples entering the test after weight reduction and blowup removal.
    pub retained: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ess: Option<f64>,
    pub ess_fraction: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub n_max: usize,
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub level: f64,
    pub seed: RandomSeed,
    pub reduction: Reduction,
    pub fresh: EnsembleSummary,
    pub evolved: EnsembleSummary,
    pub blowups: usize,
    pub observables: Vec<ObservableTest>,
    pub rejections: usize,
    /// Set on any rejection, ESS degeneracy, or blowup.
    pub flagged: bool,
}

fn check(cfg: &InvarianceConfig) -> Result<()> {
    let eq = &cfg.equation;
    eq.validate()?;
    if !eq.galerkin_projected {
        return Err(Error::InvalidConfig("invariance runs use the Galerkin-projected flow".into()));
    }
    if cfg.samples < 100 {
        return Err(Error::InvalidConfig(format!("need at least 100 samples, got {}", cfg.samples)));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {}", cfg.level)));
    }
    let base = cfg.measure.base();
    base.validate()?;
    if eq.family == EquationFamily::Gkdv {
        if !base.real_valued || !base.mean_zero {
            return Err(Error::InvalidConfig("gKdV invariance needs a real-valued mean-zero measure".into()));
        }
    } else if base.real_valued {
        return Err(Error::InvalidConfig("NLS flows need a complex-valued measure".into()));
    }
    if let MeasureSpec::Gibbs(g) = &cfg.measure {
        g.validate()?;
        if eq.family == EquationFamily::Gkdv {
            return Err(Error::InvalidConfig("Gibbs weights are implemented for the NLS family".into()));
        }
        if g.potential && (g.p != eq.power() || g.sign != eq.sign) {
            return Err(Error::InvalidConfig(format!(
                "Gibbs weight (p = {}, {:?}) does not match the flow (p = {}, {:?})",
                g.p,
                g.sign,
                eq.power(),
                eq.sign
            )));
        }
    }
    Ok(())
}

/// Draws an unweighted ensemble from the measure.
fn draw(cfg: &InvarianceConfig, seed: RandomSeed) -> Result<(Vec<TorusField>, EnsembleSummary, Reduction)> {
    let m = cfg.samples;
    match &cfg.measure {
        MeasureSpec::Gaussian(g) => {
            let fields = sample_ensemble(g, m, seed)?;
            let summary = EnsembleSummary {
                drawn: m,
                retained: m,
                ess: None,
                ess_fraction: 1.0,
                degenerate: false,
            };
            Ok((fields, summary, cfg.reduction))
        }
        MeasureSpec::Gibbs(g) => {
            let ens = gibbs_ensemble(g, m, seed)?;
            let reduction = match cfg.reduction {
                Reduction::Auto if ens.bounded_density => Reduction::Thin,
                Reduction::Auto => Reduction::Resample,
                r => r,
            };
            let pick = seed.derive(0x7411);
            let fields = match reduction {
                Reduction::Thin => ens.thin(pick).ok_or_else(|| {
                    Error::InvalidConfig("thinning needs log-weights <= 0 (defocusing, no cutoff shift)".into())
                })?,
                _ => ens.resample((ens.ess.round() as usize).max(1), pick),
            };
            let summary = EnsembleSummary {
                drawn: m,
                retained: fields.len(),
                ess: Some(ens.ess),
                ess_fraction: ens.ess / m as f64,
                degenerate: ens.degenerate,
            };
            Ok((fields, summary, reduction))
        }
    }
}

/// `randomized` replaces each p-value by its randomized version, which is
/// exactly uniform under the null.
fn run(cfg: &InvarianceConfig, seed: RandomSeed, randomized: bool) -> Result<InvarianceReport> {
    check(cfg)?;
    let n_max = cfg.measure.n_max();
    let solver = SolverConfig::for_equation(&cfg.equation, n_max, cfg.dt, cfg.t_final);
    let (steps, _) = solver.steps();
    let (fresh, fresh_summary, reduction) = draw(cfg, seed.derive(1))?;
    let (initial, mut evolved_summary, _) = draw(cfg, seed.derive(2))?;

    let mut blowups = 0;
    let evolved: Vec<TorusField> = if cfg.t_final == 0.0 {
        initial
    } else {
        let runs = par_map(initial.len(), |i| evolve(&initial[i], &cfg.equation, &solver));
        let mut kept = Vec::with_capacity(runs.len());
        for r in runs {
            let r = r?;
            if r.blowup_flag {
                blowups += 1;
            } else {
                kept.push(r.fields.last().cloned().expect("trajectory has a final snapshot"));
            }
        }
        kept
    };
    evolved_summary.retained = evolved.len();
    if fresh.is_empty() || evolved.is_empty() {
        return Err(Error::Numerical("an ensemble is empty after weight reduction".into()));
    }

    let panel = observable_panel(cfg.measure.base());
    let raw: Vec<_> = panel
        .iter()
        .enumerate()
        .map(|(k, obs)| {
            let a: Vec<f64> = fresh.iter().map(|f| obs.eval(f)).collect();
            let b: Vec<f64> = evolved.iter().map(|f| obs.eval(f)).collect();
            if randomized {
                let u = seed.derive(3).child(k as u64).rng().random::<f64>();
                ks_two_sample_randomized(&a, &b, u)
            } else {
                ks_two_sample(&a, &b)
            }
        })
        .collect();
    let p: Vec<f64> = raw.iter().map(|r| r.p_value).collect();
    let adjusted = holm_adjust(&p);
    let observables: Vec<ObservableTest> = panel
        .iter()
        .zip(raw.iter().zip(&adjusted))
        .map(|(obs, (r, &p_holm))| ObservableTest {
            observable: obs.name(),
            ks_statistic: r.statistic,
            p_value: r.p_value,
            p_holm,
            rejected: p_holm < cfg.level,
        })
        .collect();
    let rejections = observables.iter().filter(|o| o.rejected).count();
    let degenerate = fresh_summary.degenerate || evolved_summary.degenerate;
    Ok(InvarianceReport {
        n_max,
        t_final: cfg.t_final,
        dt: cfg.dt,
        steps,
        level: cfg.level,
        seed,
        reduction,
        fresh: fresh_summary,
        evolved: evolved_summary,
        blowups,
        observables,
        rejections,
        flagged: rejections > 0 || degenerate || blowups > 0,
    })
}

/// Compares a fresh ensemble with an independently drawn ensemble evolved to `t_final`.
pub fn invariance_experiment(cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    run(cfg, RandomSeed::new(cfg.seed), false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityTest {
    pub observable: String,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub p_holm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub repetitions: usize,
    pub samples: usize,
    pub level: f64,
    /// Per observable: KS test of its randomized `T = 0` p-values against `U(0, 1)`.
    pub uniformity: Vec<UniformityTest>,
    /// Fraction of repetitions with any Holm rejection.
    pub false_alarm_rate: f64,
    pub passed: bool,
}

/// Runs the `T = 0` null experiment `repetitions` times and tests the
/// p-values of each observable for uniformity. The p-values are randomized
/// over the atoms of the discrete KS statistic; the plain ones are
/// super-uniform and would trip the uniformity test on their own.
pub fn invariance_calibration(cfg: &InvarianceConfig, repetitions: usize) -> Result<CalibrationReport> {
    if repetitions < 10 {
        return Err(Error::InvalidConfig(format!(
            "calibration needs at least 10 repetitions, got {repetitions}"
        )));
    }
    let null = InvarianceConfig {
        t_final: 0.0,
        ..cfg.clone()
    };
    let root = RandomSeed::new(cfg.seed).derive(0xca1b);
    let reports = (0..repetitions)
        .map(|r| run(&null, root.child(r as u64), true))
        .collect::<Result<Vec<_>>>()?;
    let k = reports[0].observables.len();
    let tests: Vec<_> = (0..k)
        .map(|j| {
            let p: Vec<f64> = reports.iter().map(|r| r.observables[j].p_value).collect();
            (reports[0].observables[j].observable.clone(), ks_uniform(&p))
        })
        .collect();
    let adjusted = holm_adjust(&tests.iter().map(|(_, t)| t.p_value).collect::<Vec<_>>());
    let uniformity: Vec<UniformityTest> = tests
        .into_iter()
        .zip(adjusted)
        .map(|((observable, t), p_holm)| UniformityTest {
            observable,
            ks_statistic: t.statistic,
            p_value: t.p_value,
            p_holm,
        })
        .collect();
    let alarms = reports.iter().filter(|r| r.rejections > 0).count();
    Ok(CalibrationReport {
        repetitions,
        samples: cfg.samples,
        level: cfg.level,
        passed: uniformity.iter().all(|u| u.p_holm >= cfg.level),
        uniformity,
        false_alarm_rate: alarms as f64 / repetitions as f64,
    })
}
