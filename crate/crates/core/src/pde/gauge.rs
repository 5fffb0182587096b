//! The gauge link between cubic NLS and its Wick-ordered version.
//!
//! If `u` solves cubic NLS then `e^{i gamma t} u`, `gamma = -2 s mean(|u|^2)`,
//! solves Wick NLS. Mass conservation makes `gamma` constant, and the same
//! identity holds for the truncated flows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pde::{evolve, EquationSpec, SolverConfig};
use crate::sign::Sign;
use crate::spectral::{GridConfig, TorusField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub gamma: f64,
    pub times: Vec<f64>,
    /// `sup_t || |u_NLS(t)| - |u_Wick(t)| ||_inf`.
    pub modulus_discrepancy: f64,
    /// `sup_t max_n |w_n(t) - e^{i gamma t} u_n(t)|`.
    pub phase_residual: f64,
    pub blowup: bool,
}

/// Runs cubic NLS and Wick NLS from the same data and measures the gauge defect.
pub fn gauge_check(u0: &TorusField, sign: Sign, galerkin: bool, cfg: &SolverConfig) -> Result<GaugeReport> {
    let nls = EquationSpec::nls(4, sign).with_galerkin(galerkin);
    let wick = EquationSpec::wick_nls(sign).with_galerkin(galerkin);
    let a = evolve(u0, &nls, cfg)?;
    let b = evolve(u0, &wick, cfg)?;
    let gamma = -2.0 * sign.value() * u0.mean_square();
    let mut modulus = 0.0f64;
    let mut phase = 0.0f64;
    for ((t, u), w) in a.times.iter().zip(&a.fields).zip(&b.fields) {
        let grid = GridConfig::for_truncation(u.n_max(), 2.0);
        let pu = u.to_physical(&grid)?;
        let pw = w.to_physical(&grid)?;
        for (x, y) in pu.iter().zip(&pw) {
            modulus = modulus.max((x.norm() - y.norm()).abs());
        }
        let rot = Complex64::from_polar(1.0, gamma * t);
        for ((_, un), (_, wn)) in u.modes().zip(w.modes()) {
            phase = phase.max((wn - rot * un).norm());
        }
    }
    Ok(GaugeReport {
        gamma,
        times: a.times.clone(),
        modulus_discrepancy: modulus,
        phase_residual: phase,
        blowup: a.blowup_flag || b.blowup_flag || a.times.len() != b.times.len(),
    })
}
