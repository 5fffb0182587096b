//! Small-noise asymptotics of `v0 + eps phi` hitting a Sobolev ball.
//!
//! The rate function is `I(f) = (1/2) ||f - v0||_H^2`, the Cameron-Martin norm
//! of the base, i.e. `(1/2) sum w_n |f_n - v0_n|^2` with `w_n = 2 kappa / sigma_n^2`.
//! Modes with `sigma_n = 0` cannot move, so `f_n = v0_n` there.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_fields::{fill_sample, sigma_table, GaussianFieldSpec};
use crate::rng::{par_map, RandomSeed};
use crate::stats::{normal_cdf, spearman, wilson_interval};
use crate::TorusField;

/// The closed ball `{f : ||f - center||_{H^s} <= radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpSet {
    pub center: TorusField,
    pub radius: f64,
    #[serde(default)]
    pub s: f64,
}

impl LdpSet {
    pub fn contains(&self, f: &TorusField) -> bool {
        f.sub(&self.center).sobolev_norm(self.s) <= self.radius
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius >= 0.0 && self.radius.is_finite() && self.s.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "ball needs a finite nonnegative radius and finite s, got r = {}, s = {}",
                self.radius, self.s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateInfimum {
    /// `inf_F I`; infinite when no admissible `f` reaches the ball.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<TorusField>,
    /// Lagrange multiplier of the ball constraint.
    pub multiplier: f64,
    pub inside: bool,
}

/// Per-mode data `(w, q, d)`: rate weight (`None` when frozen), ball weight
/// `<n>^{2s}`, and `v0_n - center_n`.
fn mode_data(set: &LdpSet, v0: &TorusField, base: &GaussianFieldSpec) -> Result<Vec<(Option<f64>, f64, Complex64)>> {
    base.validate()?;
    set.validate()?;
    for f in [v0, &set.center] {
        if f.n_max() > base.n_max {
            return Err(Error::TruncationMismatch {
                field: f.n_max(),
                limit: base.n_max,
            });
        }
        if base.real_valued && !f.is_real_valued() {
            return Err(Error::InvalidField("fields must be real-valued for a real base".into()));
        }
    }
    let n = base.n_max as i64;
    let two_kappa = 2.0 * base.kappa();
    Ok((-n..=n)
        .map(|k| {
            let var = base.variance(k);
            let w = (var > 0.0).then(|| two_kappa / var);
            let q = (1.0 + (k * k) as f64).powf(set.s);
            (w, q, v0.coeff(k) - set.center.coeff(k))
        })
        .collect())
}

/// `sum q |f - c|^2` at multiplier `lambda` (`f = v0` on frozen modes).
fn constraint(data: &[(Option<f64>, f64, Complex64)], lambda: f64) -> f64 {
    data.iter()
        .map(|&(w, q, d)| match w {
            Some(_) if lambda.is_infinite() => 0.0,
            Some(w) => q * d.norm_sqr() * (w / (w + lambda * q)).powi(2),
            None => q * d.norm_sqr(),
        })
        .sum()
}

/// Minimizes `I` over the ball by a scalar root find for the multiplier of the
/// per-mode closed form `f_n = c_n + d_n w_n / (w_n + lambda q_n)`.
pub fn ldp_rate_infimum(set: &LdpSet, v0: &TorusField, base: &GaussianFieldSpec) -> Result<RateInfimum> {
    let data = mode_data(set, v0, base)?;
    let r2 = set.radius * set.radius;
    let n = base.n_max;
    let build = |lambda: f64| -> Result<(f64, TorusField)> {
        let mut value = 0.0;
        let mut coeffs = Vec::with_capacity(data.len());
        for (i, &(w, q, d)) in data.iter().enumerate() {
            let c = set.center.coeff(i as i64 - n as i64);
            let f = match w {
                Some(w) => {
                    let shrink = if lambda.is_infinite() { 0.0 } else { w / (w + lambda * q) };
                    value += 0.5 * w * (d * (1.0 - shrink)).norm_sqr();
                    c + d * shrink
                }
                None => c + d,
            };
            coeffs.push(f);
        }
        Ok((value, TorusField::from_coeffs(n, coeffs, base.real_valued)?))
    };

    if constraint(&data, 0.0) <= r2 {
        let f = build(0.0)?.1;
        return Ok(RateInfimum {
            value: 0.0,
            argmin: Some(f),
            multiplier: 0.0,
            inside: true,
        });
    }
    let floor = constraint(&data, f64::INFINITY);
    if floor > r2 {
        return Ok(RateInfimum {
            value: f64::INFINITY,
            argmin: None,
            multiplier: f64::INFINITY,
            inside: false,
        });
    }
    let mut hi = 1.0;
    while constraint(&data, hi) > r2 {
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    let mut lo = if hi.is_finite() { 0.0 } else { f64::MAX };
    if hi.is_finite() {
        loop {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if constraint(&data, mid) > r2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let (value, f) = build(hi)?;
    Ok(RateInfimum {
        value,
        argmin: Some(f),
        multiplier: hi,
        inside: false,
    })
}

/// `P(v0 + eps phi in F)` in closed form for a real base at `N = 0`.
pub fn exact_ball_probability(set: &LdpSet, v0: &TorusField, base: &GaussianFieldSpec, epsilon: f64) -> Option<f64> {
    if base.n_max != 0 || !base.real_valued {
        return None;
    }
    let sigma = base.sigma(0);
    let (v, c, r) = (v0.coeff(0).re, set.center.coeff(0).re, set.radius);
    if sigma == 0.0 {
        return Some(if (v - c).abs() <= r { 1.0 } else { 0.0 });
    }
    let scale = epsilon * sigma;
    let (a, b) = ((c - r - v) / scale, (c + r - v) / scale);
    // Difference of upper tails keeps relative accuracy far out on the right.
    Some(if a > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    })
}

fn default_z() -> f64 {
    3.29
}

fn default_gap() -> f64 {
    0.25
}

fn default_min_hits() -> u64 {
    25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpConfig {
    pub v0: TorusField,
    pub base: GaussianFieldSpec,
    pub set: LdpSet,
    /// Strictly decreasing noise levels.
    pub epsilons: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    /// Normal quantile of the Wilson intervals.
    #[serde(default = "default_z")]
    pub z: f64,
    /// Allowed relative gap to the oracle at the smallest usable epsilon.
    #[serde(default = "default_gap")]
    pub gap_tolerance: f64,
    /// Fewer hits than this marks an epsilon as too rare.
    #[serde(default = "default_min_hits")]
    pub min_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpPoint {
    pub epsilon: f64,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `eps^2 log p_hat` and its interval; absent at zero hits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2_log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2_log_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2_log_hi: Option<f64>,
    pub too_rare: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_in_ci: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpReport {
    /// `-inf_F I`.
    pub oracle: f64,
    pub infimum: RateInfimum,
    pub points: Vec<LdpPoint>,
    /// Spearman correlation of epsilon with `|eps^2 log p_hat - oracle|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trend_spearman: Option<f64>,
    pub trend_ok: bool,
    /// Relative gap (absolute when the oracle is 0) at the smallest usable epsilon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_gap: Option<f64>,
    pub gap_ok: bool,
    pub flagged: bool,
}

const CHUNK: u64 = 1 << 16;

fn count_hits(cfg: &LdpConfig, epsilon: f64, seed: RandomSeed) -> u64 {
    let base = &cfg.base;
    let n = base.n_max as i64;
    let sigmas = sigma_table(base);
    let q: Vec<f64> = (-n..=n).map(|k| (1.0 + (k * k) as f64).powf(cfg.set.s)).collect();
    let d: Vec<Complex64> = (-n..=n).map(|k| cfg.v0.coeff(k) - cfg.set.center.coeff(k)).collect();
    let r2 = cfg.set.radius * cfg.set.radius;
    let chunks = cfg.samples.div_ceil(CHUNK);
    par_map(chunks as usize, |k| {
        let mut rng = seed.child(k as u64).rng();
        let count = CHUNK.min(cfg.samples - k as u64 * CHUNK);
        let mut phi = vec![Complex64::new(0.0, 0.0); sigmas.len()];
        let mut hits = 0u64;
        for _ in 0..count {
            fill_sample(base.real_valued, &sigmas, &mut rng, &mut phi);
            let dist: f64 = phi
                .iter()
                .zip(&d)
                .zip(&q)
                .map(|((p, d), q)| q * (d + p * epsilon).norm_sqr())
                .sum();
            hits += u64::from(dist <= r2);
        }
        hits
    })
    .into_iter()
    .sum()
}

/// Monte Carlo estimates of `P(v0 + eps phi in F)` along a decreasing epsilon grid.
pub fn ldp_mc(cfg: &LdpConfig) -> Result<LdpReport> {
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidConfig("epsilons must be positive and finite".into()));
    }
    if cfg.epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("epsilons must be strictly decreasing".into()));
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidConfig("samples must be positive".into()));
    }
    let infimum = ldp_rate_infimum(&cfg.set, &cfg.v0, &cfg.base)?;
    let oracle = -infimum.value;
    let root = RandomSeed::new(cfg.seed);

    let points: Vec<LdpPoint> = cfg
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let hits = count_hits(cfg, eps, root.derive(i as u64));
            let m = cfg.samples;
            let p_hat = hits as f64 / m as f64;
            let (ci_lo, ci_hi) = wilson_interval(hits, m, cfg.z);
            let e2 = eps * eps;
            let log_or_none = |p: f64| (p > 0.0).then(|| e2 * p.ln());
            let exact = exact_ball_probability(&cfg.set, &cfg.v0, &cfg.base, eps);
            LdpPoint {
                epsilon: eps,
                samples: m,
                hits,
                p_hat,
                ci_lo,
                ci_hi,
                eps2_log: log_or_none(p_hat),
                eps2_log_lo: log_or_none(ci_lo),
                eps2_log_hi: log_or_none(ci_hi),
                too_rare: hits < cfg.min_hits,
                exact,
                exact_in_ci: exact.map(|p| ci_lo <= p && p <= ci_hi),
            }
        })
        .collect();

    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.too_rare)
        .filter_map(|p| p.eps2_log.map(|e| (p.epsilon, (e - oracle).abs())))
        .collect();
    let (trend_spearman, trend_ok) = if usable.len() < 2 || !oracle.is_finite() {
        (None, false)
    } else if usable.iter().all(|(_, g)| *g <= 1e-12) {
        (None, true)
    } else {
        let (x, y): (Vec<f64>, Vec<f64>) = usable.iter().copied().unzip();
        let rho = spearman(&x, &y);
        (Some(rho), rho > 0.0)
    };
    let final_gap = usable.last().filter(|_| oracle.is_finite()).map(|&(_, g)| {
        if oracle != 0.0 {
            g / oracle.abs()
        } else {
            g
        }
    });
    let gap_ok = final_gap.is_some_and(|g| g < cfg.gap_tolerance);
    let flagged = !trend_ok
        || !gap_ok
        || points.iter().any(|p| p.too_rare || p.exact_in_ci == Some(false));
    Ok(LdpReport {
        oracle,
        infimum,
        points,
        trend_spearman,
        trend_ok,
        final_gap,
        gap_ok,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real0(x: f64) -> TorusField {
        TorusField::from_coeffs(0, vec![Complex64::new(x, 0.0)], true).unwrap()
    }

    fn one_mode(a: f64, r: f64) -> (LdpSet, TorusField, GaussianFieldSpec) {
        let set = LdpSet {
            center: real0(a),
            radius: r,
            s: 0.0,
        };
        (set, real0(0.0), GaussianFieldSpec::fwb(1.0, 0, true))
    }

    /// Projected gradient (FISTA with restart) in the variables
    /// `g_n = sqrt(q_n)(f_n - c_n)`, where the ball is Euclidean.
    fn brute_force(set: &LdpSet, v0: &TorusField, base: &GaussianFieldSpec) -> f64 {
        let n = base.n_max as i64;
        let two_kappa = 2.0 * base.kappa();
        let mut fixed_norm = 0.0;
        let mut free = Vec::new();
        for k in -n..=n {
            let q = (1.0 + (k * k) as f64).powf(set.s);
            let d = v0.coeff(k) - set.center.coeff(k);
            let var = base.variance(k);
            if var == 0.0 {
                fixed_norm += q * d.norm_sqr();
            } else {
                free.push((two_kappa / var / q, d * q.sqrt()));
            }
        }
        let r2 = set.radius.powi(2) - fixed_norm;
        assert!(r2 >= 0.0);
        let rad = r2.sqrt();
        let project = |g: &mut Vec<Complex64>| {
            let norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > rad {
                g.iter_mut().for_each(|z| *z *= rad / norm);
            }
        };
        let obj = |g: &[Complex64]| -> f64 {
            g.iter().zip(&free).map(|(z, (a, t))| 0.5 * a * (z - t).norm_sqr()).sum()
        };
        let lip = free.iter().map(|f| f.0).fold(0.0, f64::max);
        let mut x: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); free.len()];
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut best = obj(&x);
        for _ in 0..200_000 {
            let mut next: Vec<Complex64> = y.iter().zip(&free).map(|(z, (a, tg))| z - (z - tg) * (a / lip)).collect();
            project(&mut next);
            let val = obj(&next);
            if val > best {
                // Restart momentum.
                t = 1.0;
                y = x.clone();
                continue;
            }
            best = val;
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            y = next.iter().zip(&x).map(|(a, b)| a + (a - b) * ((t - 1.0) / t_next)).collect();
            x = next;
            t = t_next;
        }
        best
    }

    #[test]
    fn inside_gives_zero() {
        let (set, v0, base) = one_mode(0.1, 0.5);
        let r = ldp_rate_infimum(&set, &v0, &base).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.inside);
        assert_eq!(r.argmin.unwrap(), v0);
    }

    #[test]
    fn single_mode_closed_form() {
        for (a, r) in [(1.5, 0.5), (-2.0, 0.25), (3.0, 1.0)] {
            let (set, v0, base) = one_mode(a, r);
            let got = ldp_rate_infimum(&set, &v0, &base).unwrap();
            let expect = (a.abs() - r).max(0.0).powi(2) / 2.0;
            assert!((got.value - expect).abs() < 1e-12, "{} vs {expect}", got.value);
            let f = got.argmin.unwrap();
            assert!((f.coeff(0).re - a.signum() * (a.abs() - r)).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_projected_gradient_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20 {
            let n = rng.random_range(0..=3usize);
            let real = rng.random::<bool>();
            let base = GaussianFieldSpec::fwb(rng.random_range(0.0..1.0), n, real);
            let mut draw = |scale: f64| {
                let f = TorusField::from_fn(n, false, |_| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
                })
                .unwrap();
                if real {
                    f.into_real()
                } else {
                    f
                }
            };
            let v0 = draw(1.0);
            let center = draw(2.0);
            let set = LdpSet {
                center,
                radius: 0.5,
                s: 0.5 * (trial % 3) as f64 - 0.5,
            };
            let got = ldp_rate_infimum(&set, &v0, &base).unwrap();
            let oracle = brute_force(&set, &v0, &base);
            assert!((got.value - oracle).abs() < 1e-8, "trial {trial}: {} vs {oracle}", got.value);
            let f = got.argmin.unwrap();
            let excess = f.sub(&set.center).sobolev_norm(set.s) - set.radius;
            assert!(excess < 1e-10, "argmin outside the ball by {excess}");
        }
    }

    #[test]
    fn frozen_mode_far_from_ball_is_unreachable() {
        let base = GaussianFieldSpec::white(1, true);
        let set = LdpSet {
            center: TorusField::from_coeffs(0, vec![Complex64::new(2.0, 0.0)], true).unwrap(),
            radius: 1.0,
            s: 0.0,
        };
        let r = ldp_rate_infimum(&set, &TorusField::zeros(1, true), &base).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        assert!(r.argmin.is_none());
    }

    #[test]
    fn exact_probability_tails() {
        let (set, v0, base) = one_mode(1.5, 0.5);
        let p = exact_ball_probability(&set, &v0, &base, 1.0).unwrap();
        let direct = normal_cdf(2.0) - normal_cdf(1.0);
        assert!((p - direct).abs() < 1e-12);
        let tiny = exact_ball_probability(&set, &v0, &base, 0.05).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-80);
    }

    #[test]
    fn mc_matches_closed_form() {
        let (set, v0, base) = one_mode(1.5, 0.5);
        let cfg = LdpConfig {
            v0,
            base,
            set,
            epsilons: vec![1.0, 0.7, 0.5],
            samples: 200_000,
            seed: 9,
            z: 3.29,
            gap_tolerance: 0.25,
            min_hits: 25,
        };
        let r = ldp_mc(&cfg).unwrap();
        assert_eq!(r.oracle, -0.5);
        for p in &r.points {
            assert_eq!(p.exact_in_ci, Some(true), "{p:?}");
            assert!(!p.too_rare);
        }
        assert!(r.trend_ok);
        assert_eq!(ldp_mc(&cfg).unwrap(), r);
    }

    #[test]
    fn ball_around_v0_has_full_probability() {
        let (mut set, v0, base) = one_mode(0.0, 1.0);
        set.center = v0.clone();
        let cfg = LdpConfig {
            v0,
            base,
            set,
            epsilons: vec![0.1, 0.05],
            samples: 10_000,
            seed: 1,
            z: 3.29,
            gap_tolerance: 0.25,
            min_hits: 25,
        };
        let r = ldp_mc(&cfg).unwrap();
        assert_eq!(r.oracle, 0.0);
        assert!(r.points.iter().all(|p| p.hits == 10_000));
        assert!(r.trend_ok && r.gap_ok && !r.flagged);
    }

    #[test]
    fn bad_epsilon_grid() {
        let (set, v0, base) = one_mode(1.5, 0.5);
        let mut cfg = LdpConfig {
            v0,
            base,
            set,
            epsilons: vec![0.5, 0.6],
            samples: 10,
            seed: 1,
            z: 3.29,
            gap_tolerance: 0.25,
            min_hits: 25,
        };
        assert!(ldp_mc(&cfg).is_err());
        cfg.epsilons = vec![0.5, -0.1];
        assert!(ldp_mc(&cfg).is_err());
    }
}
