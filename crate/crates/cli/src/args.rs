use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbsflow_core::experiments::presets::{cm_preset, invariance_preset, kdv_dt, nls_dt, smooth_bump, Preset};
use gibbsflow_core::experiments::{CmConfig, DistinguishConfig, InvarianceConfig, LdpConfig, LdpSet, MeasureSpec, Reduction};
use gibbsflow_core::measures::entropy::DEFAULT_LAMBDAS;
use gibbsflow_core::measures::{GibbsSpec, HamiltonianPreset, PowerLawPair};
use gibbsflow_core::pde::{EquationFamily, EquationSpec, SolverConfig};
use gibbsflow_core::random_fields::sample;
use gibbsflow_core::{GaussianFieldSpec, RandomSeed, Sign, TorusField};
use num_complex::Complex64;

use crate::job::{DichotomyJob, EntropyJob, EvolveJob, InvarianceJob, Job, SampleJob};

/// Gaussian and Gibbs measures on the torus under truncated Hamiltonian flows.
///
/// Every run writes a JSON report (stdout unless --out) carrying
/// `schema_version` and the fully resolved configuration. With --out, the
/// configuration is also written to `<out stem>.config.json`; pass that file
/// to --config to reproduce the run. Exit status: 0 success, 2 the run
/// completed but flagged a statistical failure, 1 usage or configuration error.
#[derive(Debug, Parser)]
#[command(name = "gibbsflow", version, propagate_version = true)]
pub struct Cli {
    /// Rerun a resolved configuration (`*.config.json` or a report) instead of a subcommand.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// JSON report path [default: stdout].
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Plot-ready CSV path; columns depend on the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "GIBBSFLOW_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw fields from a Fourier-Wiener measure.
    Sample(SampleArgs),
    /// Integrate one trajectory of NLS, Wick NLS or gKdV.
    Evolve(EvolveArgs),
    /// Test invariance of a measure under a truncated flow.
    Invariance(InvarianceArgs),
    /// Check the Cameron-Martin density of a shifted measure.
    Cm(CmArgs),
    /// Equivalence-or-singularity verdicts and the distinguishability demo.
    Dichotomy(DichotomyArgs),
    /// Large-deviation probabilities of a Sobolev ball.
    Ldp(LdpArgs),
    /// Entropy maximization by the Boltzmann density on a grid.
    EntropyCheck(EntropyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// sigma_n = |n|^-alpha, mean zero.
    Fwa,
    /// sigma_n = (1 + |n|^{2 alpha})^{-1/2}.
    Fwb,
    /// sigma_n = 1, mean zero.
    White,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EqArg {
    Nls,
    WickNls,
    Gkdv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    /// Defocusing.
    Plus,
    /// Focusing.
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

/// A Gaussian base measure.
#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Fwb)]
    pub family: FamilyArg,
    /// Decay exponent (ignored for white noise).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Real-valued fields (conjugate-symmetric coefficients).
    #[arg(long)]
    pub real: bool,
    /// Drop the zero mode.
    #[arg(long)]
    pub mean_zero: bool,
    /// Multiplies every variance.
    #[arg(long, default_value_t = 1.0)]
    pub variance_scale: f64,
}

impl FieldArgs {
    fn spec(&self, n_max: usize, real: bool) -> GaussianFieldSpec {
        let real = real || self.real;
        let spec = match self.family {
            FamilyArg::Fwa => GaussianFieldSpec::fwa(self.alpha, n_max, real),
            FamilyArg::Fwb => GaussianFieldSpec::fwb(self.alpha, n_max, real),
            FamilyArg::White => GaussianFieldSpec::white(n_max, real),
        };
        let spec = if self.mean_zero { spec.with_mean_zero(true) } else { spec };
        spec.with_variance_scale(self.variance_scale)
    }
}

#[derive(Debug, Args)]
pub struct EquationArgs {
    #[arg(long = "eq", value_enum, default_value_t = EqArg::Nls)]
    pub equation: EqArg,
    /// Nonlinearity power [default: 4 for nls, 3 for gkdv; wick-nls is always 4].
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Pseudospectral products without Galerkin projection.
    #[arg(long)]
    pub collocation: bool,
}

impl EquationArgs {
    fn spec(&self) -> EquationSpec {
        let sign = self.sign.into();
        let eq = match self.equation {
            EqArg::Nls => EquationSpec::nls(self.p.unwrap_or(4), sign),
            EqArg::WickNls => EquationSpec::wick_nls(sign),
            EqArg::Gkdv => EquationSpec::gkdv(self.p.unwrap_or(3), sign),
        };
        eq.with_galerkin(!self.collocation)
    }

    fn is_kdv(&self) -> bool {
        self.equation == EqArg::Gkdv
    }
}

fn default_dt(eq: &EquationSpec, n_max: usize) -> f64 {
    if eq.family == EquationFamily::Gkdv {
        kdv_dt(n_max)
    } else {
        nls_dt(n_max)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 64)]
    pub nmax: usize,
    /// Number of independent draws.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub equation: EquationArgs,
    #[arg(long, default_value_t = 32)]
    pub nmax: usize,
    /// Time step [default: 1e-3 (16/N)^2 for nls and wick-nls, 1e-4 (32/N)^3 for gkdv].
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t", default_value_t = 1.0)]
    pub t_final: f64,
    /// Snapshots after the initial one.
    #[arg(long, default_value_t = 10)]
    pub snapshots: usize,
    /// Initial data as a field JSON `{n_max, real_valued, coeffs}` [default: a draw from the measure flags].
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
    /// Measure of the default initial data; real for gkdv.
    #[command(flatten)]
    pub field: FieldArgs,
    /// Seed of the default initial data.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InvariancePreset {
    /// Real white noise under Galerkin KdV.
    KdvWhiteNoise,
    /// Defocusing quartic Gibbs measure under Galerkin Wick NLS.
    WickNlsGibbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    /// The base measure itself.
    Gaussian,
    /// exp(-(beta/p) int |u|^p) times an FWb(1) base matched to beta; the field flags are ignored.
    Gibbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    /// Thin when the density is bounded, otherwise resample.
    Auto,
    Thin,
    Resample,
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    /// Pins measure and equation; the model flags below are then ignored
    /// (--dt, --level and --reduction still apply).
    #[arg(long, value_enum)]
    pub preset: Option<InvariancePreset>,
    #[arg(long, value_enum, default_value_t = MeasureArg::Gaussian)]
    pub measure: MeasureArg,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Inverse temperature of the Gibbs measure.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[command(flatten)]
    pub equation: EquationArgs,
    #[arg(long, default_value_t = 32)]
    pub nmax: usize,
    /// Ensemble size before reweighting.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long = "t", default_value_t = 1.0)]
    pub t_final: f64,
    /// Time step [default: 1e-3 (16/N)^2 for nls and wick-nls, 1e-4 (32/N)^3 for gkdv].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Family-wise level of the Holm-corrected KS tests.
    #[arg(long, default_value_t = 0.01)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = ReductionArg::Auto)]
    pub reduction: ReductionArg,
    /// Repetitions of the T = 0 calibration run; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub calibrate: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CmPreset {
    /// Cubic NLS from v0 + FWb(1).
    #[value(name = "theorem-1")]
    Theorem1,
    /// KdV from v0 + real white noise.
    #[value(name = "theorem-2")]
    Theorem2,
    /// Wick NLS from v0 + FWb(0.45).
    #[value(name = "theorem-3")]
    Theorem3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShiftArg {
    /// v0_n = A exp(-n^2 / 8).
    Bump,
    /// v0_n = A |n|^-decay, v0_0 = 0.
    Power,
}

#[derive(Debug, Args)]
pub struct CmArgs {
    /// Pins base, shift and equation; evolution is always on
    /// (--dt, --evolve-samples and --snapshots still apply).
    #[arg(long, value_enum)]
    pub preset: Option<CmPreset>,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum, default_value_t = ShiftArg::Bump)]
    pub shift: ShiftArg,
    /// Shift amplitude A.
    #[arg(long, default_value_t = 0.2)]
    pub shift_amplitude: f64,
    /// Shift decay exponent (power shifts only).
    #[arg(long, default_value_t = 2.0)]
    pub shift_decay: f64,
    #[arg(long, default_value_t = 16)]
    pub nmax: usize,
    #[arg(long, default_value_t = 20000)]
    pub samples: usize,
    /// Also evolve shifted samples under the equation flags.
    #[arg(long)]
    pub evolve: bool,
    #[command(flatten)]
    pub equation: EquationArgs,
    #[arg(long = "t", default_value_t = 1.0)]
    pub t_final: f64,
    /// Time step [default: 1e-3 (16/N)^2 for nls and wick-nls, 1e-4 (32/N)^3 for gkdv].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Trajectories in the evolution summary [default: min(200, samples)].
    #[arg(long)]
    pub evolve_samples: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub snapshots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DichotomyMode {
    /// u_n = |n|^-u_decay against v + u with v_n = v_scale |n|^-v_decay.
    Kakutani,
    /// Covariances beta^-1 |n|^{2s-2} against gamma^-1 |n|^{2s-2}.
    FeldmanHajek,
    /// Threshold classifier separating u from v + u.
    Distinguish,
}

#[derive(Debug, Args)]
pub struct DichotomyArgs {
    #[arg(long, value_enum)]
    pub mode: DichotomyMode,
    #[arg(long, default_value_t = 1.0)]
    pub u_decay: f64,
    #[arg(long, default_value_t = 1.4)]
    pub v_decay: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v_scale: f64,
    /// Lattice dimension (kakutani).
    #[arg(long, default_value_t = 1)]
    pub dim: u32,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Truncation [default: 100000 for kakutani and feldman-hajek, 256 for distinguish].
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Samples per class (distinguish).
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Real-valued fields (distinguish).
    #[arg(long)]
    pub real: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct LdpArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0)]
    pub nmax: usize,
    /// Ball center c with c_m = c_{-m} = A, other modes zero.
    #[arg(long, default_value_t = 1.5)]
    pub center_amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub center_mode: i64,
    /// Ball center as a field JSON; overrides the two flags above.
    #[arg(long, value_name = "FILE")]
    pub center: Option<PathBuf>,
    /// Mean v0 as a field JSON [default: zero].
    #[arg(long, value_name = "FILE")]
    pub v0: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Sobolev index of the ball norm.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Strictly decreasing noise levels.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.4,0.3,0.25")]
    pub epsilons: Vec<f64>,
    /// Monte Carlo draws per epsilon.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Normal quantile of the Wilson intervals.
    #[arg(long, default_value_t = 3.29)]
    pub z: f64,
    /// Allowed relative gap to the rate at the smallest usable epsilon.
    #[arg(long, default_value_t = 0.25)]
    pub gap_tolerance: f64,
    /// Fewer hits mark an epsilon as too rare.
    #[arg(long, default_value_t = 25)]
    pub min_hits: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HamiltonianArg {
    /// sum x_i^2 / 2.
    Harmonic,
    /// sum x_i^4.
    Quartic,
    /// p^2 / 2 + q^4 (dimension 2).
    Anharmonic,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long, value_enum, default_value_t = HamiltonianArg::Quartic)]
    pub hamiltonian: HamiltonianArg,
    /// Grid dimension [default: 1; 2 for anharmonic].
    #[arg(long)]
    pub dim: Option<usize>,
    /// The grid covers [-w, w]^dim.
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 2000)]
    pub cells: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Random perturbation directions.
    #[arg(long, default_value_t = 20)]
    pub directions: usize,
    /// Perturbation sizes relative to 1 / max|k| [default: -0.9,-0.5,-0.1,0.1,0.5,0.9].
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn read_field(path: &PathBuf) -> Result<TorusField> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing field JSON {}", path.display()))
}

impl Command {
    /// Turns flags into a fully resolved job.
    pub fn resolve(self) -> Result<Job> {
        Ok(match self {
            Command::Sample(a) => Job::Sample(SampleJob {
                spec: a.field.spec(a.nmax, false),
                count: a.count,
                seed: a.seed,
            }),
            Command::Evolve(a) => {
                let equation = a.equation.spec();
                let initial = match &a.init {
                    Some(path) => read_field(path)?,
                    None => sample(&a.field.spec(a.nmax, a.equation.is_kdv()), RandomSeed::new(a.seed))?,
                };
                let n = initial.n_max();
                let dt = a.dt.unwrap_or_else(|| default_dt(&equation, n));
                let mut solver = SolverConfig::for_equation(&equation, n, dt, a.t_final);
                let (steps, _) = solver.steps();
                solver.record_every = if a.snapshots == 0 { 0 } else { (steps / a.snapshots).max(1) };
                Job::Evolve(EvolveJob {
                    equation,
                    solver,
                    initial,
                })
            }
            Command::Invariance(a) => {
                let mut cfg = match a.preset {
                    Some(p) => {
                        let preset = match p {
                            InvariancePreset::KdvWhiteNoise => Preset::KdvWhiteNoise,
                            InvariancePreset::WickNlsGibbs => Preset::WickNlsGibbs,
                        };
                        invariance_preset(preset, a.nmax, a.samples, a.t_final, a.seed)?
                    }
                    None => {
                        let equation = a.equation.spec();
                        let real = a.equation.is_kdv();
                        let measure = match a.measure {
                            MeasureArg::Gaussian => MeasureSpec::Gaussian(a.field.spec(a.nmax, real)),
                            MeasureArg::Gibbs => MeasureSpec::Gibbs(GibbsSpec::matched(
                                equation.power(),
                                equation.sign,
                                a.beta,
                                a.nmax,
                                real || a.field.real,
                            )),
                        };
                        InvarianceConfig {
                            measure,
                            equation,
                            t_final: a.t_final,
                            dt: default_dt(&equation, a.nmax),
                            samples: a.samples,
                            seed: a.seed,
                            level: a.level,
                            reduction: Reduction::Auto,
                        }
                    }
                };
                if let Some(dt) = a.dt {
                    cfg.dt = dt;
                }
                cfg.level = a.level;
                cfg.reduction = match a.reduction {
                    ReductionArg::Auto => Reduction::Auto,
                    ReductionArg::Thin => Reduction::Thin,
                    ReductionArg::Resample => Reduction::Resample,
                };
                Job::Invariance(InvarianceJob {
                    experiment: cfg,
                    calibration: a.calibrate,
                })
            }
            Command::Cm(a) => {
                let mut cfg = match a.preset {
                    Some(p) => {
                        let preset = match p {
                            CmPreset::Theorem1 => Preset::Theorem1,
                            CmPreset::Theorem2 => Preset::Theorem2,
                            CmPreset::Theorem3 => Preset::Theorem3,
                        };
                        cm_preset(preset, a.nmax, a.samples, a.t_final, a.seed)?
                    }
                    None => {
                        let equation = a.equation.spec();
                        let real = a.equation.is_kdv() && a.evolve;
                        let base = a.field.spec(a.nmax, real);
                        let frozen_mean = base.sigma(0) == 0.0;
                        let (v0, v0_decay) = match a.shift {
                            ShiftArg::Bump => (
                                smooth_bump(a.nmax, base.real_valued, frozen_mean).scale(2.0 * a.shift_amplitude),
                                None,
                            ),
                            ShiftArg::Power => (
                                TorusField::from_fn(a.nmax, base.real_valued, |n| {
                                    let v = if n == 0 {
                                        0.0
                                    } else {
                                        a.shift_amplitude * (n.unsigned_abs() as f64).powf(-a.shift_decay)
                                    };
                                    Complex64::new(v, 0.0)
                                })?,
                                Some(a.shift_decay),
                            ),
                        };
                        CmConfig {
                            v0,
                            base,
                            samples: a.samples,
                            seed: a.seed,
                            equation: a.evolve.then_some(equation),
                            t_final: a.t_final,
                            dt: default_dt(&equation, a.nmax),
                            evolve_samples: 200.min(a.samples),
                            snapshots: a.snapshots,
                            v0_decay,
                        }
                    }
                };
                if let Some(dt) = a.dt {
                    cfg.dt = dt;
                }
                if let Some(m) = a.evolve_samples {
                    cfg.evolve_samples = m;
                }
                cfg.snapshots = a.snapshots;
                Job::Cm(cfg)
            }
            Command::Dichotomy(a) => Job::Dichotomy(match a.mode {
                DichotomyMode::Kakutani => DichotomyJob::Kakutani {
                    pair: PowerLawPair {
                        u_decay: a.u_decay,
                        v_decay: a.v_decay,
                        v_scale: a.v_scale,
                        dim: a.dim,
                    },
                    n_max: a.nmax.unwrap_or(100_000),
                },
                DichotomyMode::FeldmanHajek => DichotomyJob::FeldmanHajek {
                    beta: a.beta,
                    gamma: a.gamma,
                    s: a.s,
                    n_max: a.nmax.unwrap_or(100_000),
                },
                DichotomyMode::Distinguish => DichotomyJob::Distinguish(DistinguishConfig {
                    u_decay: a.u_decay,
                    v_decay: a.v_decay,
                    v_scale: a.v_scale,
                    n_max: a.nmax.unwrap_or(256),
                    samples: a.samples,
                    seed: a.seed,
                    real_valued: a.real,
                }),
            }),
            Command::Ldp(a) => {
                let base = a.field.spec(a.nmax, false);
                let real = base.real_valued;
                let center = match &a.center {
                    Some(path) => read_field(path)?,
                    None => {
                        if a.center_mode.unsigned_abs() as usize > a.nmax {
                            bail!("--center-mode {} is outside --nmax {}", a.center_mode, a.nmax);
                        }
                        let m = a.center_mode.abs();
                        TorusField::from_fn(a.nmax, real, |n| {
                            Complex64::new(if n.abs() == m { a.center_amplitude } else { 0.0 }, 0.0)
                        })?
                    }
                };
                let v0 = match &a.v0 {
                    Some(path) => read_field(path)?,
                    None => TorusField::zeros(a.nmax, real),
                };
                Job::Ldp(LdpConfig {
                    v0,
                    base,
                    set: LdpSet {
                        center,
                        radius: a.radius,
                        s: a.s,
                    },
                    epsilons: a.epsilons,
                    samples: a.samples,
                    seed: a.seed,
                    z: a.z,
                    gap_tolerance: a.gap_tolerance,
                    min_hits: a.min_hits,
                })
            }
            Command::EntropyCheck(a) => {
                let hamiltonian = match a.hamiltonian {
                    HamiltonianArg::Harmonic => HamiltonianPreset::Harmonic,
                    HamiltonianArg::Quartic => HamiltonianPreset::Quartic,
                    HamiltonianArg::Anharmonic => HamiltonianPreset::Anharmonic,
                };
                Job::EntropyCheck(EntropyJob {
                    hamiltonian,
                    dim: a.dim.or(hamiltonian.fixed_dim()).unwrap_or(1),
                    half_width: a.half_width,
                    cells_per_dim: a.cells,
                    beta: a.beta,
                    directions: a.directions,
                    lambdas: if a.lambdas.is_empty() {
                        DEFAULT_LAMBDAS.to_vec()
                    } else {
                        a.lambdas
                    },
                    seed: a.seed,
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn entropy_defaults_follow_the_hamiltonian() {
        let cli = Cli::try_parse_from(["gibbsflow", "entropy-check", "--hamiltonian", "anharmonic"]).unwrap();
        let Job::EntropyCheck(j) = cli.command.unwrap().resolve().unwrap() else {
            panic!("wrong job");
        };
        assert_eq!(j.dim, 2);
        assert_eq!(j.lambdas, DEFAULT_LAMBDAS.to_vec());
    }

    #[test]
    fn kdv_evolution_draws_real_data_with_the_kdv_step() {
        let cli = Cli::try_parse_from(["gibbsflow", "evolve", "--eq", "gkdv", "--family", "white", "--nmax", "16"]).unwrap();
        let Job::Evolve(j) = cli.command.unwrap().resolve().unwrap() else {
            panic!("wrong job");
        };
        assert!(j.initial.is_real_valued());
        assert_eq!(j.equation.p, 3);
        assert_eq!(j.solver.dt, kdv_dt(16));
    }

    #[test]
    fn presets_keep_level_and_step_overrides() {
        let cli = Cli::try_parse_from([
            "gibbsflow",
            "invariance",
            "--preset",
            "kdv-white-noise",
            "--nmax",
            "8",
            "--level",
            "0.05",
            "--dt",
            "1e-3",
        ])
        .unwrap();
        let Job::Invariance(j) = cli.command.unwrap().resolve().unwrap() else {
            panic!("wrong job");
        };
        assert_eq!(j.experiment.level, 0.05);
        assert_eq!(j.experiment.dt, 1e-3);
        assert!(matches!(j.experiment.measure, MeasureSpec::Gaussian(ref g) if g.real_valued));
    }

    #[test]
    fn ldp_center_must_fit_the_truncation() {
        let cli = Cli::try_parse_from(["gibbsflow", "ldp", "--center-mode", "3", "--nmax", "2"]).unwrap();
        assert!(cli.command.unwrap().resolve().is_err());
    }
}
