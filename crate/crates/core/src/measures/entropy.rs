//! Finite-dimensional check that `e^{-beta H} / Z` maximizes entropy at fixed
//! mean energy.
//!
//! Densities live on a midpoint grid over a box in `R^d`. Perturbations
//! `f*(1 + lambda k)` use directions `k = h - a - b H`, where `(a, b)` is the
//! `f*`-weighted least-squares fit of a random smooth `h`; this keeps both the
//! total mass and the mean energy fixed.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSeed;

/// Grids larger than this are refused.
pub const MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianPreset {
    /// `sum x_i^2 / 2`.
    Harmonic,
    /// `sum x_i^4`.
    Quartic,
    /// `p^2 / 2 + q^4` on `R^2`.
    Anharmonic,
}

impl std::str::FromStr for HamiltonianPreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "harmonic" | "gaussian" => Ok(Self::Harmonic),
            "quartic" => Ok(Self::Quartic),
            "anharmonic" => Ok(Self::Anharmonic),
            other => Err(format!("unknown hamiltonian '{other}' (harmonic, quartic, anharmonic)")),
        }
    }
}

impl HamiltonianPreset {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Self::Harmonic => x.iter().map(|v| 0.5 * v * v).sum(),
            Self::Quartic => x.iter().map(|v| v.powi(4)).sum(),
            Self::Anharmonic => 0.5 * x[0] * x[0] + x[1].powi(4),
        }
    }

    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            Self::Anharmonic => Some(2),
            _ => None,
        }
    }
}

/// `H` sampled at the cell midpoints of `[-half_width, half_width]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedHamiltonian {
    pub dim: usize,
    pub half_width: f64,
    pub cells_per_dim: usize,
    /// Row-major, last coordinate fastest.
    pub values: Vec<f64>,
}

impl TabulatedHamiltonian {
    pub fn tabulate(dim: usize, half_width: f64, cells_per_dim: usize, h: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if dim == 0 || cells_per_dim == 0 || !(half_width > 0.0) {
            return Err(Error::InvalidSpec("entropy grid needs dim, cells and half_width positive".into()));
        }
        let total = (cells_per_dim as f64).powi(dim as i32);
        if total > MAX_CELLS as f64 {
            return Err(Error::InvalidSpec(format!(
                "entropy grid has {total} cells, more than {MAX_CELLS}"
            )));
        }
        let total = total as usize;
        let dx = 2.0 * half_width / cells_per_dim as f64;
        let mut x = vec![0.0; dim];
        let values = (0..total)
            .map(|mut idx| {
                for k in (0..dim).rev() {
                    x[k] = -half_width + (idx % cells_per_dim) as f64 * dx + 0.5 * dx;
                    idx /= cells_per_dim;
                }
                h(&x)
            })
            .collect::<Vec<f64>>();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("tabulated Hamiltonian must be finite".into()));
        }
        Ok(Self {
            dim,
            half_width,
            cells_per_dim,
            values,
        })
    }

    pub fn preset(preset: HamiltonianPreset, dim: usize, half_width: f64, cells_per_dim: usize) -> Result<Self> {
        if let Some(d) = preset.fixed_dim() {
            if d != dim {
                return Err(Error::InvalidSpec(format!("{preset:?} is defined in dimension {d}")));
            }
        }
        Self::tabulate(dim, half_width, cells_per_dim, |x| preset.eval(x))
    }

    pub fn cell_volume(&self) -> f64 {
        (2.0 * self.half_width / self.cells_per_dim as f64).powi(self.dim as i32)
    }

    fn midpoint(&self, mut idx: usize, out: &mut [f64]) {
        let dx = 2.0 * self.half_width / self.cells_per_dim as f64;
        for k in (0..self.dim).rev() {
            out[k] = -self.half_width + (idx % self.cells_per_dim) as f64 * dx + 0.5 * dx;
            idx /= self.cells_per_dim;
        }
    }
}

/// `-sum f log f dV` with `0 log 0 = 0`.
pub fn grid_entropy(f: &[f64], cell_volume: f64) -> f64 {
    -f.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum::<f64>() * cell_volume
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub direction: usize,
    pub lambda: f64,
    pub entropy: Option<f64>,
    /// `S(f_lambda) - S(f*)`.
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub dim: usize,
    pub beta: f64,
    pub cell_volume: f64,
    pub entropy: f64,
    pub mean_energy: f64,
    pub perturbations: Vec<Perturbation>,
    /// Every tested, nonzero, admissible perturbation strictly lowered the entropy.
    pub maximizer_confirmed: bool,
}

/// Default perturbation sizes, relative to `1 / max |k|`.
pub const DEFAULT_LAMBDAS: [f64; 6] = [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9];

/// Compares `S(f*)` against energy-matched perturbations along `n_directions`
/// random smooth directions. `lambdas` are relative to `1 / max |k|`, so
/// values in `(-1, 1)` keep the density positive.
pub fn entropy_check(
    h: &TabulatedHamiltonian,
    beta: f64,
    n_directions: usize,
    lambdas: &[f64],
    seed: RandomSeed,
) -> Result<EntropyReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidSpec(format!("beta must be positive, got {beta}")));
    }
    let dv = h.cell_volume();
    let h_min = h.values.iter().copied().fold(f64::INFINITY, f64::min);
    let boltz: Vec<f64> = h.values.iter().map(|e| (-beta * (e - h_min)).exp()).collect();
    let z: f64 = boltz.iter().sum::<f64>() * dv;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Numerical("partition function is not finite and positive".into()));
    }
    let f_star: Vec<f64> = boltz.iter().map(|b| b / z).collect();
    let s_star = grid_entropy(&f_star, dv);
    let mean_energy = f_star.iter().zip(&h.values).map(|(f, e)| f * e).sum::<f64>() * dv;

    let mut rng = seed.rng();
    let mut perturbations = Vec::new();
    let mut confirmed = true;
    let mut x = vec![0.0; h.dim];
    for direction in 0..n_directions {
        // h(x) = sum_j a_j cos(w_j . x + phi_j) with wavelengths comparable to the box.
        let terms: Vec<(f64, Vec<f64>, f64)> = (0..4)
            .map(|_| {
                let a = rng.random_range(-1.0..1.0);
                let w = (0..h.dim)
                    .map(|_| rng.random_range(-2.0..2.0) * PI / h.half_width)
                    .collect();
                (a, w, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let g: Vec<f64> = (0..h.values.len())
            .map(|idx| {
                h.midpoint(idx, &mut x);
                terms
                    .iter()
                    .map(|(a, w, ph)| a * (w.iter().zip(&x).map(|(wi, xi)| wi * xi).sum::<f64>() + ph).cos())
                    .sum()
            })
            .collect();
        let k = energy_matched_direction(&g, &h.values, &f_star);
        let k_max = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for &rel in lambdas {
            let lambda = if k_max > 0.0 { rel / k_max } else { 0.0 };
            let f: Vec<f64> = f_star.iter().zip(&k).map(|(fs, kk)| fs * (1.0 + lambda * kk)).collect();
            if f.iter().any(|v| *v < 0.0) {
                perturbations.push(Perturbation {
                    direction,
                    lambda,
                    entropy: None,
                    delta: None,
                    note: Some("perturbed density leaves positivity; skipped".into()),
                });
                continue;
            }
            let s = grid_entropy(&f, dv);
            let delta = s - s_star;
            if lambda != 0.0 && k_max > 0.0 && delta >= 0.0 {
                confirmed = false;
            }
            perturbations.push(Perturbation {
                direction,
                lambda,
                entropy: Some(s),
                delta: Some(delta),
                note: None,
            });
        }
    }
    Ok(EntropyReport {
        dim: h.dim,
        beta,
        cell_volume: dv,
        entropy: s_star,
        mean_energy,
        perturbations,
        maximizer_confirmed: confirmed,
    })
}

/// `k = g - a - b H` with `E_f[k] = E_f[k H] = 0`.
fn energy_matched_direction(g: &[f64], h: &[f64], f: &[f64]) -> Vec<f64> {
    let total: f64 = f.iter().sum();
    let mean = |v: &dyn Fn(usize) -> f64| (0..f.len()).map(|i| f[i] * v(i)).sum::<f64>() / total;
    let eh = mean(&|i| h[i]);
    let eg = mean(&|i| g[i]);
    let var_h = mean(&|i| (h[i] - eh).powi(2));
    let cov = mean(&|i| (h[i] - eh) * (g[i] - eg));
    let b = if var_h > 0.0 { cov / var_h } else { 0.0 };
    let a = eg - b * eh;
    g.iter().zip(h).map(|(gi, hi)| gi - a - b * hi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_entropy_matches_closed_form() {
        let h = TabulatedHamiltonian::preset(HamiltonianPreset::Harmonic, 1, 12.0, 20_000).unwrap();
        let r = entropy_check(&h, 1.0, 0, &[], RandomSeed::new(0)).unwrap();
        let exact = 0.5 * (2.0 * PI * std::f64::consts::E).ln();
        assert!((r.entropy - exact).abs() < 1e-3, "{} vs {exact}", r.entropy);
        assert!((r.mean_energy - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_perturbation_is_neutral() {
        let h = TabulatedHamiltonian::preset(HamiltonianPreset::Quartic, 1, 4.0, 2000).unwrap();
        let r = entropy_check(&h, 1.0, 3, &[0.0], RandomSeed::new(1)).unwrap();
        assert!(r.perturbations.iter().all(|p| p.delta == Some(0.0)));
        assert!(r.maximizer_confirmed);
    }

    #[test]
    fn quartic_perturbations_lower_entropy() {
        let h = TabulatedHamiltonian::preset(HamiltonianPreset::Quartic, 1, 4.0, 4000).unwrap();
        let r = entropy_check(&h, 1.0, 20, &DEFAULT_LAMBDAS, RandomSeed::new(2)).unwrap();
        assert!(r.maximizer_confirmed);
        assert_eq!(r.perturbations.len(), 20 * DEFAULT_LAMBDAS.len());
        assert!(r.perturbations.iter().all(|p| p.delta.unwrap() < 0.0));
    }

    #[test]
    fn perturbations_preserve_mass_and_energy() {
        let h = TabulatedHamiltonian::preset(HamiltonianPreset::Anharmonic, 2, 4.0, 200).unwrap();
        let dv = h.cell_volume();
        let f: Vec<f64> = h.values.iter().map(|e| (-e).exp()).collect();
        let z: f64 = f.iter().sum::<f64>() * dv;
        let f: Vec<f64> = f.iter().map(|v| v / z).collect();
        let g: Vec<f64> = (0..f.len()).map(|i| ((i % 37) as f64).sin()).collect();
        let k = energy_matched_direction(&g, &h.values, &f);
        let mass: f64 = f.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>() * dv;
        let energy: f64 = f.iter().zip(&k).zip(&h.values).map(|((a, b), e)| a * b * e).sum::<f64>() * dv;
        assert!(mass.abs() < 1e-12 && energy.abs() < 1e-12);
    }

    #[test]
    fn leaving_positivity_is_skipped() {
        let h = TabulatedHamiltonian::preset(HamiltonianPreset::Harmonic, 1, 6.0, 1000).unwrap();
        let r = entropy_check(&h, 1.0, 2, &[1.5], RandomSeed::new(3)).unwrap();
        assert!(r.perturbations.iter().all(|p| p.note.is_some() && p.delta.is_none()));
    }

    #[test]
    fn oversized_grid_refused() {
        assert!(TabulatedHamiltonian::preset(HamiltonianPreset::Harmonic, 3, 1.0, 101).is_err());
        assert!(TabulatedHamiltonian::preset(HamiltonianPreset::Anharmonic, 1, 1.0, 10).is_err());
    }
}
