use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pde::{EquationFamily, EquationSpec};
use crate::spectral::{min_points_for_power, GridConfig, TorusField};

/// `int |u|^2 dx`.
pub fn mass(f: &TorusField) -> f64 {
    f.mass()
}

/// Normalized mean `c_0`.
pub fn mean(f: &TorusField) -> Complex64 {
    f.mean_value()
}

/// `2 pi sum n |c_n|^2`.
pub fn momentum(f: &TorusField) -> f64 {
    2.0 * PI * f.modes().map(|(n, c)| n as f64 * c.norm_sqr()).sum::<f64>()
}

/// Signed `int u^p dx` for a real-valued field.
pub fn power_integral(f: &TorusField, p: u32, grid: &GridConfig) -> Result<f64> {
    if !f.is_real_valued() {
        return Err(Error::InvalidField("signed power integral needs a real-valued field".into()));
    }
    grid.require(min_points_for_power(f.n_max(), p as f64), &format!("u^{p} quadrature"))?;
    let values = f.to_physical(grid)?;
    let m = values.len() as f64;
    Ok(2.0 * PI / m * values.iter().map(|u| u.re.powi(p as i32)).sum::<f64>())
}

/// Conserved energy of `eq`:
///
/// - NLS: `(1/2) int |u_x|^2 + (s/p) int |u|^p`
/// - Wick NLS: `(1/2) int |u_x|^2 + (s/4) int |u|^4 - (s/4pi) (int |u|^2)^2`
/// - gKdV: `(1/2) int u_x^2 + s/(p(p-1)) int u^p`
pub fn hamiltonian(f: &TorusField, eq: &EquationSpec, grid: &GridConfig) -> Result<f64> {
    let s = eq.sign.value();
    let kinetic = 0.5 * 2.0 * PI * f.modes().map(|(n, c)| (n * n) as f64 * c.norm_sqr()).sum::<f64>();
    let p = eq.power();
    Ok(match eq.family {
        EquationFamily::Nls => kinetic + s / p as f64 * f.lp_integral(p as f64, grid)?,
        EquationFamily::WickNls => {
            let m = f.mass();
            kinetic + s / 4.0 * f.lp_integral(4.0, grid)? - s / (4.0 * PI) * m * m
        }
        EquationFamily::Gkdv => kinetic + s / (p * (p - 1)) as f64 * power_integral(f, p, grid)?,
    })
}
