//! Pseudospectral integrators for NLS, Wick-ordered cubic NLS and gKdV.
//!
//! Conventions (`s = +1` for [`Sign::Plus`], `-1` for [`Sign::Minus`]):
//!
//! - NLS: `i u_t - u_xx + s |u|^{p-2} u = 0`, i.e. `c_n' = i n^2 c_n + i s (|u|^{p-2} u)_n`.
//! - Wick NLS: the cubic case with `|u|^2` replaced by `|u|^2 - 2 mean(|u|^2)`.
//! - gKdV: `u_t + u_xxx - s u^{p-2} u_x = 0`, i.e. `c_n' = i n^3 c_n + s (in)/(p-1) (u^{p-1})_n`.
//!
//! With `galerkin_projected` the state lives at the truncation `N` of the
//! initial data and every nonlinear term is computed exactly (alias-free on the
//! configured grid) and projected back to `|n| <= N`. The result is the
//! finite-dimensional Hamiltonian system whose truncated measures are
//! invariant. Without it the state lives on the collocation grid and products
//! are taken pointwise.

mod conserved;
mod gauge;
mod kdv;
mod nls;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::Sign;
use crate::spectral::{coeffs_to_grid, GridConfig, TorusField};

pub use conserved::{hamiltonian, mass, mean, momentum, power_integral};
pub use gauge::{gauge_check, GaugeReport};

/// Sup-norm beyond which a run counts as blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// The gKdV step guard is `dt <= KDV_STABILITY_C / N^3`.
pub const KDV_STABILITY_C: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquationFamily {
    #[serde(rename = "nls")]
    Nls,
    #[serde(rename = "wick-nls")]
    WickNls,
    #[serde(rename = "gkdv", alias = "kdv")]
    Gkdv,
}

impl std::str::FromStr for EquationFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nls" => Ok(Self::Nls),
            "wick-nls" | "wick" => Ok(Self::WickNls),
            "gkdv" | "kdv" => Ok(Self::Gkdv),
            other => Err(format!("unknown equation '{other}' (nls, wick-nls, gkdv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub family: EquationFamily,
    /// Nonlinearity power; Wick NLS is cubic (`p = 4`) whatever is stored here.
    pub p: u32,
    pub sign: Sign,
    pub galerkin_projected: bool,
}

impl EquationSpec {
    pub fn nls(p: u32, sign: Sign) -> Self {
        Self {
            family: EquationFamily::Nls,
            p,
            sign,
            galerkin_projected: true,
        }
    }

    pub fn wick_nls(sign: Sign) -> Self {
        Self {
            family: EquationFamily::WickNls,
            p: 4,
            sign,
            galerkin_projected: true,
        }
    }

    pub fn gkdv(p: u32, sign: Sign) -> Self {
        Self {
            family: EquationFamily::Gkdv,
            p,
            sign,
            galerkin_projected: true,
        }
    }

    pub fn with_galerkin(mut self, galerkin: bool) -> Self {
        self.galerkin_projected = galerkin;
        self
    }

    /// Effective power: 4 for Wick NLS.
    pub fn power(&self) -> u32 {
        match self.family {
            EquationFamily::WickNls => 4,
            _ => self.p,
        }
    }

    pub fn is_schrodinger(&self) -> bool {
        self.family != EquationFamily::Gkdv
    }

    /// Minimum grid for exact Galerkin products at truncation `n_max`.
    pub fn galerkin_points(&self, n_max: usize) -> usize {
        (self.power() as usize * n_max + 1).max(2 * n_max + 2)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.power();
        match self.family {
            EquationFamily::Nls if p < 3 => Err(Error::InvalidSpec(format!("NLS power must be >= 3, got {p}"))),
            EquationFamily::Nls if self.galerkin_projected && p % 2 == 1 => Err(Error::InvalidSpec(format!(
                "Galerkin NLS needs an even power (polynomial nonlinearity), got {p}"
            ))),
            EquationFamily::Gkdv if p < 3 => Err(Error::InvalidSpec(format!("gKdV power must be >= 3, got {p}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Strang splitting for the NLS family.
    StrangSplit,
    /// Integrating-factor (Lawson) RK4 for gKdV.
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub grid: GridConfig,
    pub scheme: Scheme,
    /// Steps between snapshots; `0` records only the initial and final states.
    pub record_every: usize,
}

impl SolverConfig {
    /// A configuration with the smallest adequate grid for `eq` at truncation `n_max`.
    pub fn for_equation(eq: &EquationSpec, n_max: usize, dt: f64, t_final: f64) -> Self {
        let m = if eq.galerkin_projected {
            eq.galerkin_points(n_max)
        } else {
            2 * n_max + 2
        }
        .next_power_of_two();
        Self {
            dt,
            t_final,
            grid: GridConfig {
                m_points: m,
                padding_factor: m as f64 / (2 * n_max + 1) as f64,
            },
            scheme: if eq.is_schrodinger() {
                Scheme::StrangSplit
            } else {
                Scheme::IfRk4
            },
            record_every: 0,
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    /// Number of steps and the step actually taken (`t_final / steps`).
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

/// Snapshots of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub fields: Vec<TorusField>,
    /// `int |u|^2` at each snapshot.
    pub mass_series: Vec<f64>,
    pub hamiltonian_series: Vec<f64>,
    pub blowup_flag: bool,
    /// Time of the last finite, sub-threshold state.
    pub last_valid_time: f64,
}

impl TrajectoryRecord {
    pub fn final_field(&self) -> &TorusField {
        self.fields.last().expect("trajectory has at least the initial snapshot")
    }
}

/// `c_n -> e^{i n^2 t} c_n` (NLS family) or `c_n -> e^{i n^3 t} c_n` (gKdV).
pub fn linear_propagate(f: &TorusField, t: f64, family: EquationFamily) -> TorusField {
    let k = if family == EquationFamily::Gkdv { 3 } else { 2 };
    let out = f.map_modes(|n, c| c * Complex64::from_polar(1.0, dispersion(n, k) * t));
    if f.is_real_valued() {
        out.into_real()
    } else {
        out
    }
}

pub(crate) fn dispersion(n: i64, k: i32) -> f64 {
    (n as f64).powi(k)
}

/// One step of a time integrator on coefficients at a fixed truncation.
pub(crate) trait Stepper {
    /// Advances by `h`; returns `false` when the nonlinear solve failed.
    fn step(&mut self, h: f64) -> bool;
    /// Current state as a field (Nyquist mode dropped on collocation grids).
    fn field(&self) -> TorusField;
    fn sup_norm_bound(&self) -> f64;
}

fn check_config(f0: &TorusField, eq: &EquationSpec, cfg: &SolverConfig) -> Result<usize> {
    eq.validate()?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_final must be nonnegative, got {}", cfg.t_final)));
    }
    GridConfig::new(cfg.grid.m_points)?;
    let expected = if eq.is_schrodinger() {
        Scheme::StrangSplit
    } else {
        Scheme::IfRk4
    };
    if cfg.scheme != expected {
        return Err(Error::InvalidConfig(format!(
            "{:?} is integrated with {:?}, not {:?}",
            eq.family, expected, cfg.scheme
        )));
    }
    if eq.family == EquationFamily::Gkdv && !f0.is_real_valued() {
        return Err(Error::InvalidField("gKdV needs real-valued data".into()));
    }
    let m = cfg.grid.m_points;
    let n_state = if eq.galerkin_projected {
        cfg.grid
            .require(eq.galerkin_points(f0.n_max()), "exact Galerkin nonlinearity")?;
        f0.n_max()
    } else {
        let k = m / 2 - 1;
        if f0.n_max() > k {
            return Err(Error::TruncationMismatch {
                field: f0.n_max(),
                limit: k,
            });
        }
        k
    };
    let nf = n_state as f64;
    if n_state > 0 {
        let (bound, what) = if eq.is_schrodinger() {
            (1.0 / (nf * nf), "1/N^2")
        } else {
            (KDV_STABILITY_C / (nf * nf * nf), "10/N^3")
        };
        if cfg.dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} exceeds the step guard {what} = {bound:.3e} at N = {n_state}",
                cfg.dt
            )));
        }
    }
    Ok(n_state)
}

/// Integrates `f0` to `cfg.t_final` and records snapshots.
pub fn evolve(f0: &TorusField, eq: &EquationSpec, cfg: &SolverConfig) -> Result<TrajectoryRecord> {
    let n_state = check_config(f0, eq, cfg)?;
    let (n_steps, h) = cfg.steps();
    let mut stepper: Box<dyn Stepper> = match (eq.is_schrodinger(), eq.galerkin_projected) {
        (true, true) => Box::new(nls::GalerkinNls::new(f0, eq, cfg.grid.m_points)),
        (true, false) => Box::new(nls::CollocationNls::new(f0, eq, cfg.grid.m_points)),
        (false, true) => Box::new(kdv::KdvStepper::galerkin(f0, eq, cfg.grid.m_points)),
        (false, false) => Box::new(kdv::KdvStepper::collocation(f0, eq, cfg.grid.m_points)),
    };
    let quad = GridConfig::new(
        crate::spectral::min_points_for_power(n_state, eq.power() as f64).next_power_of_two(),
    )?;
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        fields: Vec::new(),
        mass_series: Vec::new(),
        hamiltonian_series: Vec::new(),
        blowup_flag: false,
        last_valid_time: 0.0,
    };
    let push = |rec: &mut TrajectoryRecord, t: f64, f: TorusField| -> Result<()> {
        rec.mass_series.push(f.mass());
        rec.hamiltonian_series.push(hamiltonian(&f, eq, &quad)?);
        rec.times.push(t);
        rec.fields.push(f);
        Ok(())
    };
    push(&mut rec, 0.0, stepper.field())?;
    for k in 1..=n_steps {
        let ok = stepper.step(h);
        let t = k as f64 * h;
        if !ok || blown_up(stepper.as_ref(), cfg.grid.m_points) {
            rec.blowup_flag = true;
            break;
        }
        rec.last_valid_time = if k == n_steps { cfg.t_final } else { t };
        let record = k == n_steps || (cfg.record_every > 0 && k % cfg.record_every == 0);
        if record {
            let t_rec = if k == n_steps { cfg.t_final } else { t };
            push(&mut rec, t_rec, stepper.field())?;
        }
    }
    Ok(rec)
}

fn blown_up(stepper: &dyn Stepper, m: usize) -> bool {
    let bound = stepper.sup_norm_bound();
    if !bound.is_finite() {
        return true;
    }
    if bound <= BLOWUP_THRESHOLD {
        return false;
    }
    let f = stepper.field();
    let values = coeffs_to_grid(f.coeffs(), f.n_max(), m.max(2 * f.n_max() + 2).next_power_of_two());
    values.iter().any(|u| !(u.norm() <= BLOWUP_THRESHOLD))
}
