//! Lawson (integrating-factor) RK4 for gKdV.
//!
//! In the variable `w = e^{-t A} c`, with `A` the Airy multiplier `i n^3`, the
//! system is non-stiff and classical RK4 applies. The nonlinearity is taken in
//! conservation form `s (in)/(p-1) (u^{p-1})_n`, so the mean is untouched.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::pde::{dispersion, EquationSpec, Stepper};
use crate::spectral::TorusField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Evaluates the projected nonlinearity with real transforms, without allocating.
struct Nonlinearity {
    n: usize,
    m: usize,
    exponent: i32,
    /// `s (in)/(p-1)` for `n = 0..=N`.
    multiplier: Vec<Complex64>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    spectrum: Vec<Complex64>,
    values: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Nonlinearity {
    fn new(n: usize, m: usize, eq: &EquationSpec) -> Self {
        let p = eq.power();
        let scale = eq.sign.value() / (p - 1) as f64;
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let scratch_len = forward.get_scratch_len().max(inverse.get_scratch_len());
        Self {
            n,
            m,
            exponent: p as i32 - 1,
            multiplier: (0..=n).map(|k| Complex64::new(0.0, k as f64 * scale)).collect(),
            spectrum: forward.make_output_vec(),
            values: forward.make_input_vec(),
            forward,
            inverse,
            scratch: vec![ZERO; scratch_len],
        }
    }

    /// `c` and `out` hold modes `0..=N` of real fields.
    fn eval(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        self.spectrum.fill(ZERO);
        self.spectrum[..=n].copy_from_slice(c);
        self.spectrum[0].im = 0.0;
        self.inverse
            .process_with_scratch(&mut self.spectrum, &mut self.values, &mut self.scratch)
            .expect("buffer sizes fixed at construction");
        for v in self.values.iter_mut() {
            *v = v.powi(self.exponent);
        }
        self.forward
            .process_with_scratch(&mut self.values, &mut self.spectrum, &mut self.scratch)
            .expect("buffer sizes fixed at construction");
        let inv_m = 1.0 / self.m as f64;
        for ((o, v), mult) in out.iter_mut().zip(&self.spectrum).zip(&self.multiplier) {
            *o = v * mult * inv_m;
        }
    }
}

/// State is stored as modes `0..=N`; the rest follows from `c_{-n} = conj(c_n)`.
pub(crate) struct KdvStepper {
    n: usize,
    coeffs: Vec<Complex64>,
    rhs: Nonlinearity,
    cached_h: f64,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl KdvStepper {
    /// State at the data truncation; exact products need `M > p N`.
    pub(crate) fn galerkin(f0: &TorusField, eq: &EquationSpec, m: usize) -> Self {
        Self::at(f0, f0.n_max(), eq, m)
    }

    /// State at `M/2 - 1` with pointwise (aliased) products.
    pub(crate) fn collocation(f0: &TorusField, eq: &EquationSpec, m: usize) -> Self {
        Self::at(f0, m / 2 - 1, eq, m)
    }

    fn at(f0: &TorusField, n: usize, eq: &EquationSpec, m: usize) -> Self {
        let len = n + 1;
        Self {
            n,
            coeffs: (0..=n as i64).map(|k| f0.coeff(k)).collect(),
            rhs: Nonlinearity::new(n, m, eq),
            cached_h: f64::NAN,
            full: Vec::new(),
            half: Vec::new(),
            k: std::array::from_fn(|_| vec![ZERO; len]),
            tmp: vec![ZERO; len],
        }
    }

    fn phases(&mut self, h: f64) {
        if self.cached_h == h {
            return;
        }
        let n = self.n as i64;
        self.full = (0..=n).map(|k| Complex64::from_polar(1.0, dispersion(k, 3) * h)).collect();
        self.half = (0..=n).map(|k| Complex64::from_polar(1.0, dispersion(k, 3) * h / 2.0)).collect();
        self.cached_h = h;
    }
}

impl Stepper for KdvStepper {
    fn step(&mut self, h: f64) -> bool {
        self.phases(h);
        let [k1, k2, k3, k4] = &mut self.k;
        let (c, e, e2, tmp) = (&self.coeffs, &self.full, &self.half, &mut self.tmp);

        self.rhs.eval(c, k1);
        for i in 0..c.len() {
            tmp[i] = e2[i] * (c[i] + k1[i] * (h / 2.0));
        }
        self.rhs.eval(tmp, k2);
        for i in 0..c.len() {
            tmp[i] = e2[i] * c[i] + k2[i] * (h / 2.0);
        }
        self.rhs.eval(tmp, k3);
        for i in 0..c.len() {
            tmp[i] = e[i] * c[i] + e2[i] * k3[i] * h;
        }
        self.rhs.eval(tmp, k4);
        for i in 0..self.coeffs.len() {
            let ci = self.coeffs[i];
            self.coeffs[i] = e[i] * ci + (e[i] * k1[i] + e2[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        true
    }

    fn field(&self) -> TorusField {
        let n = self.n as i64;
        let coeffs = (-n..=n)
            .map(|k| {
                let c = self.coeffs[k.unsigned_abs() as usize];
                if k < 0 {
                    c.conj()
                } else {
                    c
                }
            })
            .collect();
        TorusField::from_raw(self.n, coeffs, true)
    }

    fn sup_norm_bound(&self) -> f64 {
        2.0 * self.coeffs.iter().map(|c| c.norm()).sum::<f64>() - self.coeffs[0].norm()
    }
}
