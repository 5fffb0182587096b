//! Strang splitting for the NLS family.
//!
//! A step is `L(h/2) N(h) L(h/2)` with `L` the exact Schrodinger phase. On the
//! collocation grid `N` is the exact pointwise rotation
//! `u -> u exp(i s |u|^{p-2} h)`. In Galerkin mode the projected nonlinear
//! flow no longer preserves `|u|` pointwise, so `N` is the implicit midpoint
//! rule, which is symplectic and conserves the mass exactly. The Wick
//! correction is the constant phase `exp(-2 i s m h)`, `m = sum |c_n|^2`, which
//! both substeps conserve.

use num_complex::Complex64;

use crate::fft;
use crate::pde::{dispersion, EquationFamily, EquationSpec, Stepper};
use crate::spectral::{coeffs_to_grid, grid_to_coeffs, TorusField};

const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_MAX_ITER: usize = 40;
const MAX_HALVINGS: u32 = 8;

struct PhaseCache {
    h: f64,
    phases: Vec<Complex64>,
}

impl PhaseCache {
    fn new() -> Self {
        Self {
            h: f64::NAN,
            phases: Vec::new(),
        }
    }

    fn get(&mut self, h: f64, wavenumbers: impl Iterator<Item = i64>) -> &[Complex64] {
        if self.h != h {
            self.phases = wavenumbers
                .map(|k| Complex64::from_polar(1.0, dispersion(k, 2) * h))
                .collect();
            self.h = h;
        }
        &self.phases
    }
}

fn wick_phase(eq: &EquationSpec, mean_square: f64, h: f64) -> Option<Complex64> {
    (eq.family == EquationFamily::WickNls)
        .then(|| Complex64::from_polar(1.0, -2.0 * eq.sign.value() * mean_square * h))
}

/// Pointwise split-step on the full `M`-point grid.
pub(crate) struct CollocationNls {
    eq: EquationSpec,
    m: usize,
    /// Normalized coefficients in FFT order: index `j` holds wavenumber `j` or `j - M`.
    hat: Vec<Complex64>,
    buf: Vec<Complex64>,
    half: PhaseCache,
}

impl CollocationNls {
    pub(crate) fn new(f0: &TorusField, eq: &EquationSpec, m: usize) -> Self {
        let mut hat = vec![Complex64::new(0.0, 0.0); m];
        for (n, c) in f0.modes() {
            hat[n.rem_euclid(m as i64) as usize] = c;
        }
        Self {
            eq: *eq,
            m,
            hat,
            buf: vec![Complex64::new(0.0, 0.0); m],
            half: PhaseCache::new(),
        }
    }

    fn wavenumbers(m: usize) -> impl Iterator<Item = i64> {
        (0..m).map(move |j| if j < m / 2 { j as i64 } else { j as i64 - m as i64 })
    }

    fn linear_half(&mut self, h: f64) {
        let phases = self.half.get(h / 2.0, Self::wavenumbers(self.m));
        for (c, ph) in self.hat.iter_mut().zip(phases) {
            *c *= ph;
        }
    }
}

impl Stepper for CollocationNls {
    fn step(&mut self, h: f64) -> bool {
        self.linear_half(h);
        self.buf.copy_from_slice(&self.hat);
        fft::inverse(&mut self.buf);
        let s = self.eq.sign.value();
        let q = self.eq.power() as i32 - 2;
        let wick = if self.eq.family == EquationFamily::WickNls {
            2.0 * self.buf.iter().map(|u| u.norm_sqr()).sum::<f64>() / self.m as f64
        } else {
            0.0
        };
        for u in self.buf.iter_mut() {
            let amp = u.norm().powi(q);
            *u *= Complex64::from_polar(1.0, s * (amp - wick) * h);
        }
        fft::forward(&mut self.buf);
        let scale = 1.0 / self.m as f64;
        for (c, v) in self.hat.iter_mut().zip(&self.buf) {
            *c = v * scale;
        }
        self.linear_half(h);
        true
    }

    fn field(&self) -> TorusField {
        let k = (self.m / 2 - 1) as i64;
        let coeffs = (-k..=k).map(|n| self.hat[n.rem_euclid(self.m as i64) as usize]).collect();
        TorusField::from_raw(k as usize, coeffs, false)
    }

    fn sup_norm_bound(&self) -> f64 {
        self.hat.iter().map(|c| c.norm()).sum()
    }
}

/// Exact finite-dimensional NLS flow on `|n| <= N`.
pub(crate) struct GalerkinNls {
    eq: EquationSpec,
    n: usize,
    m: usize,
    coeffs: Vec<Complex64>,
    half: PhaseCache,
}

impl GalerkinNls {
    pub(crate) fn new(f0: &TorusField, eq: &EquationSpec, m: usize) -> Self {
        Self {
            eq: *eq,
            n: f0.n_max(),
            m,
            coeffs: f0.coeffs().to_vec(),
            half: PhaseCache::new(),
        }
    }

    fn linear_half(&mut self, h: f64) {
        let n = self.n as i64;
        let phases = self.half.get(h / 2.0, -n..=n);
        for (c, ph) in self.coeffs.iter_mut().zip(phases) {
            *c *= ph;
        }
    }

    /// `i s P_N(|u|^{p-2} u)`, exact for even `p` on this grid.
    fn vector_field(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut u = coeffs_to_grid(c, self.n, self.m);
        let half_q = (self.eq.power() as i32 - 2) / 2;
        let is = Complex64::new(0.0, self.eq.sign.value());
        for v in u.iter_mut() {
            *v *= is * v.norm_sqr().powi(half_q);
        }
        grid_to_coeffs(u, self.n)
    }

    fn midpoint(&self, c0: &[Complex64], h: f64) -> Option<Vec<Complex64>> {
        let scale = c0.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let tol = MIDPOINT_TOL * scale.max(f64::MIN_POSITIVE);
        let f0 = self.vector_field(c0);
        let mut c1: Vec<Complex64> = c0.iter().zip(&f0).map(|(a, f)| a + f * h).collect();
        for _ in 0..MIDPOINT_MAX_ITER {
            let mid: Vec<Complex64> = c0.iter().zip(&c1).map(|(a, b)| (a + b) * 0.5).collect();
            let f = self.vector_field(&mid);
            let mut diff = 0.0f64;
            for ((next, a), fk) in c1.iter_mut().zip(c0).zip(&f) {
                let v = a + fk * h;
                diff = diff.max((v - *next).norm());
                *next = v;
            }
            if !diff.is_finite() {
                return None;
            }
            if diff <= tol {
                return Some(c1);
            }
        }
        None
    }

    fn nonlinear(&self, c0: &[Complex64], h: f64, depth: u32) -> Option<Vec<Complex64>> {
        if let Some(c1) = self.midpoint(c0, h) {
            return Some(c1);
        }
        if depth >= MAX_HALVINGS {
            return None;
        }
        let half = self.nonlinear(c0, h / 2.0, depth + 1)?;
        self.nonlinear(&half, h / 2.0, depth + 1)
    }
}

impl Stepper for GalerkinNls {
    fn step(&mut self, h: f64) -> bool {
        self.linear_half(h);
        let Some(mut next) = self.nonlinear(&self.coeffs, h, 0) else {
            return false;
        };
        let mean_square: f64 = next.iter().map(|c| c.norm_sqr()).sum();
        if let Some(ph) = wick_phase(&self.eq, mean_square, h) {
            next.iter_mut().for_each(|c| *c *= ph);
        }
        self.coeffs = next;
        self.linear_half(h);
        true
    }

    fn field(&self) -> TorusField {
        TorusField::from_raw(self.n, self.coeffs.clone(), false)
    }

    fn sup_norm_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}
