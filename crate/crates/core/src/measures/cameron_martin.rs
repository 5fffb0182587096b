//! Radon-Nikodym densities of shifted Gaussian fields.
//!
//! The base law is `exp(-kappa sum |c_n|^2 / sigma_n^2)` with `kappa = 1` for
//! complex fields and `kappa = 1/2` for real-valued ones (the sum then runs over
//! both `n` and `-n`). Shifting by `h` gives
//!
//! `log (d rho_h / d rho)(x) = sum_n [2 kappa Re(conj(h_n) x_n) - kappa |h_n|^2] / sigma_n^2`,
//!
//! and `||h||_H^2 = 2 kappa sum |h_n|^2 / sigma_n^2`.

use crate::error::{Error, Result};
use crate::random_fields::GaussianFieldSpec;
use crate::spectral::TorusField;

fn check(h: &TorusField, base: &GaussianFieldSpec) -> Result<()> {
    base.validate()?;
    if h.n_max() > base.n_max {
        return Err(Error::TruncationMismatch {
            field: h.n_max(),
            limit: base.n_max,
        });
    }
    if base.real_valued && !h.is_real_valued() {
        return Err(Error::InvalidField("shift of a real-valued measure must be real-valued".into()));
    }
    for (n, c) in h.modes() {
        if base.sigma(n) == 0.0 && c.norm_sqr() != 0.0 {
            return Err(Error::SingularShift { mode: n });
        }
    }
    Ok(())
}

/// Cameron-Martin norm squared `||h||_H^2`.
pub fn cameron_martin_norm_sq(h: &TorusField, base: &GaussianFieldSpec) -> Result<f64> {
    check(h, base)?;
    let two_kappa = 2.0 * base.kappa();
    Ok(h
        .modes()
        .filter(|(_, c)| c.norm_sqr() != 0.0)
        .map(|(n, c)| two_kappa * c.norm_sqr() / base.variance(n))
        .sum())
}

/// `log (d rho_h / d rho)(x)` for the base `rho` and its translate by `h`.
pub fn cameron_martin_log_density(h: &TorusField, x: &TorusField, base: &GaussianFieldSpec) -> Result<f64> {
    check(h, base)?;
    if x.n_max() > base.n_max {
        return Err(Error::TruncationMismatch {
            field: x.n_max(),
            limit: base.n_max,
        });
    }
    let kappa = base.kappa();
    Ok(h
        .modes()
        .filter(|(_, c)| c.norm_sqr() != 0.0)
        .map(|(n, hn)| {
            let xn = x.coeff(n);
            kappa * (2.0 * (hn.conj() * xn).re - hn.norm_sqr()) / base.variance(n)
        })
        .sum())
}
