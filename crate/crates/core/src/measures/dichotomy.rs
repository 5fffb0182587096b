//! Equivalence-or-singularity criteria for pairs of Gaussian measures.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stats::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Singular,
    Undecided,
}

/// Outcome of a dichotomy test with partial sums `(N, S_N)` for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyVerdict {
    pub verdict: Verdict,
    /// Limiting statistic; `+inf` (serialized as `"inf"`) when divergent.
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub statistic: f64,
    pub partial_sums: Vec<(usize, f64)>,
}

fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() && *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Str(String),
    }
    match Ext::deserialize(d)? {
        Ext::Num(x) => Ok(x),
        Ext::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Ext::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
    }
}

/// `lambda_n(beta) = beta^{-1} |n|^{2s-2}` for each requested `n != 0`.
pub fn covariance_eigenvalues(beta: f64, s: f64, modes: &[i64]) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::InvalidSpec(format!("beta must be positive, got {beta}")));
    }
    modes
        .iter()
        .map(|&n| {
            if n == 0 {
                Err(Error::InvalidSpec("covariance eigenvalue undefined at n = 0".into()))
            } else {
                Ok((n.unsigned_abs() as f64).powf(2.0 * s - 2.0) / beta)
            }
        })
        .collect()
}

/// Checkpoints `1, 2, 4, ...` and `n_max`.
fn checkpoints(n_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k < n_max)
        .collect();
    if n_max > 0 {
        out.push(n_max);
    }
    out
}

/// `S_N = sum_{0 < |n| <= N} ((lambda_n(beta) - lambda_n(gamma)) / (lambda_n(beta) + lambda_n(gamma)))^2`.
///
/// The summand is `((gamma - beta)/(gamma + beta))^2` for every `n`, so the
/// series diverges exactly when `beta != gamma`.
pub fn feldman_hajek_statistic(beta: f64, gamma: f64, s: f64, n_max: usize) -> Result<DichotomyVerdict> {
    if !(beta > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "inverse temperatures must be positive, got {beta} and {gamma}"
        )));
    }
    let mut acc = NeumaierSum::default();
    let mut partial_sums = Vec::new();
    let marks = checkpoints(n_max);
    let mut next = marks.iter().peekable();
    for n in 1..=n_max {
        let lb = (n as f64).powf(2.0 * s - 2.0) / beta;
        let lg = (n as f64).powf(2.0 * s - 2.0) / gamma;
        let term = ((lb - lg) / (lb + lg)).powi(2);
        acc.add(term);
        acc.add(term);
        if next.peek() == Some(&&n) {
            partial_sums.push((n, acc.value()));
            next.next();
        }
    }
    let (verdict, statistic) = if beta == gamma {
        (Verdict::Equivalent, 0.0)
    } else {
        (Verdict::Singular, f64::INFINITY)
    };
    Ok(DichotomyVerdict {
        verdict,
        statistic,
        partial_sums,
    })
}

/// `log H(mu_n, nu_n) = -|v_n|^2 / (8 |u_n|^2)` for `mu_n = N(0, |u_n|^2)`, `nu_n = N(v_n, |u_n|^2)`.
pub fn log_hellinger_mode(u_hat: Complex64, v_hat: Complex64) -> f64 {
    let v2 = v_hat.norm_sqr();
    if v2 == 0.0 {
        return 0.0;
    }
    let u2 = u_hat.norm_sqr();
    if u2 == 0.0 {
        return f64::NEG_INFINITY;
    }
    -v2 / (8.0 * u2)
}

/// Per-mode Hellinger integral `exp(-|v_n|^2 / (8 |u_n|^2))`.
pub fn hellinger_mode(u_hat: Complex64, v_hat: Complex64) -> f64 {
    log_hellinger_mode(u_hat, v_hat).exp()
}

/// Kakutani test for the randomization `u^omega` versus `v + u^omega`.
///
/// The sequences are read as ordered by increasing frequency. The statistic is
/// `sum |v_n|^2 / |u_n|^2`; its growth is judged by comparing the partial sum
/// over the whole sequence with the one over the first half: a ratio above
/// `1 + 10/L` counts as divergent. For power laws prefer
/// [`kakutani_power_law`], which decides from the exponents.
pub fn kakutani_test(u_hat: &[Complex64], v_hat: &[Complex64]) -> Result<DichotomyVerdict> {
    if u_hat.len() != v_hat.len() {
        return Err(Error::SizeMismatch {
            expected: u_hat.len(),
            actual: v_hat.len(),
        });
    }
    let len = u_hat.len();
    let mut acc = NeumaierSum::default();
    let mut partial_sums = Vec::new();
    let marks = checkpoints(len);
    let mut next = marks.iter().peekable();
    let mut half_sum = 0.0;
    for (k, (u, v)) in u_hat.iter().zip(v_hat).enumerate() {
        let lh = log_hellinger_mode(*u, *v);
        if lh == f64::NEG_INFINITY {
            partial_sums.push((k + 1, f64::INFINITY));
            return Ok(DichotomyVerdict {
                verdict: Verdict::Singular,
                statistic: f64::INFINITY,
                partial_sums,
            });
        }
        acc.add(v.norm_sqr() / u.norm_sqr().max(f64::MIN_POSITIVE));
        if k + 1 == len / 2 {
            half_sum = acc.value();
        }
        if next.peek() == Some(&&(k + 1)) {
            partial_sums.push((k + 1, acc.value()));
            next.next();
        }
    }
    let total = acc.value();
    if total == 0.0 {
        return Ok(DichotomyVerdict {
            verdict: Verdict::Equivalent,
            statistic: 0.0,
            partial_sums,
        });
    }
    if len < 4 {
        return Ok(DichotomyVerdict {
            verdict: Verdict::Undecided,
            statistic: total,
            partial_sums,
        });
    }
    let diverging = half_sum == 0.0 || total / half_sum > 1.0 + 10.0 / len as f64;
    Ok(if diverging {
        DichotomyVerdict {
            verdict: Verdict::Singular,
            statistic: f64::INFINITY,
            partial_sums,
        }
    } else {
        DichotomyVerdict {
            verdict: Verdict::Equivalent,
            statistic: total,
            partial_sums,
        }
    })
}

/// `|u_n| = |n|^{-u_decay}`, `|v_n| = v_scale |n|^{-v_decay}` on `Z^d \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawPair {
    pub u_decay: f64,
    pub v_decay: f64,
    #[serde(default = "unit")]
    pub v_scale: f64,
    #[serde(default = "one_dim")]
    pub dim: u32,
}

fn unit() -> f64 {
    1.0
}

fn one_dim() -> u32 {
    1
}

/// Partial sums stop once the lattice cube holds this many points.
const LATTICE_BUDGET: f64 = 2.0e7;

/// Kakutani verdict for power-law sequences.
///
/// The summand is `v_scale^2 |n|^{-2(v_decay - u_decay)}`, summable over
/// `Z^d` iff `2 (v_decay - u_decay) > d`. Partial sums over `|n|_inf <= N`
/// are enumerated for `d <= 3` as diagnostics.
pub fn kakutani_power_law(pair: PowerLawPair, n_max: usize) -> Result<DichotomyVerdict> {
    if pair.dim == 0 || pair.dim > 3 {
        return Err(Error::InvalidSpec(format!("dimension must be 1, 2 or 3, got {}", pair.dim)));
    }
    if !(pair.u_decay.is_finite() && pair.v_decay.is_finite() && pair.v_scale.is_finite()) {
        return Err(Error::InvalidSpec("power-law exponents must be finite".into()));
    }
    let d = pair.dim as i32;
    let cap = (LATTICE_BUDGET.powf(1.0 / d as f64) / 2.0) as usize;
    let n_top = n_max.min(cap.max(1));
    let exponent = -2.0 * (pair.v_decay - pair.u_decay);
    let scale2 = pair.v_scale * pair.v_scale;

    // Shell-by-shell sum over the sup-norm sphere |n|_inf = k.
    let mut acc = NeumaierSum::default();
    let mut partial_sums = Vec::new();
    let marks = checkpoints(n_top);
    let mut next = marks.iter().peekable();
    for k in 1..=n_top as i64 {
        match d {
            1 => {
                let t = scale2 * (k as f64).powf(exponent);
                acc.add(t);
                acc.add(t);
            }
            _ => {
                let mut visit = |n2: i64| acc.add(scale2 * (n2 as f64).powf(exponent / 2.0));
                for_each_shell_point(d, k, &mut visit);
            }
        }
        if next.peek() == Some(&&(k as usize)) {
            partial_sums.push((k as usize, acc.value()));
            next.next();
        }
    }
    let converges = scale2 == 0.0 || 2.0 * (pair.v_decay - pair.u_decay) > d as f64;
    Ok(if converges {
        DichotomyVerdict {
            verdict: Verdict::Equivalent,
            statistic: acc.value(),
            partial_sums,
        }
    } else {
        DichotomyVerdict {
            verdict: Verdict::Singular,
            statistic: f64::INFINITY,
            partial_sums,
        }
    })
}

/// Calls `visit(|n|^2)` for every lattice point with `|n|_inf = k` in `Z^d`, `d in {2, 3}`.
fn for_each_shell_point(d: i32, k: i64, visit: &mut impl FnMut(i64)) {
    let r = -k..=k;
    if d == 2 {
        for a in r.clone() {
            for b in r.clone() {
                if a.abs().max(b.abs()) == k {
                    visit(a * a + b * b);
                }
            }
        }
    } else {
        for a in r.clone() {
            for b in r.clone() {
                let m = a.abs().max(b.abs());
                if m == k {
                    for c in r.clone() {
                        visit(a * a + b * b + c * c);
                    }
                } else {
                    visit(a * a + b * b + k * k);
                    visit(a * a + b * b + k * k);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(covariance_eigenvalues(1.0, 0.0, &[1]).unwrap(), vec![1.0]);
        assert_eq!(covariance_eigenvalues(2.0, 0.0, &[2]).unwrap(), vec![0.125]);
        assert!(covariance_eigenvalues(1.0, 0.0, &[0]).is_err());
        let a = covariance_eigenvalues(1.5, 0.7, &[1, -3, 17]).unwrap();
        let b = covariance_eigenvalues(3.0, 0.7, &[1, -3, 17]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x / 2.0 - y).abs() <= 1e-16 * x);
        }
    }

    #[test]
    fn feldman_hajek_examples() {
        let same = feldman_hajek_statistic(1.0, 1.0, 0.0, 100).unwrap();
        assert_eq!(same.verdict, Verdict::Equivalent);
        assert!(same.partial_sums.iter().all(|(_, s)| *s == 0.0));

        let v = feldman_hajek_statistic(1.0, 2.0, 0.0, 1000).unwrap();
        assert_eq!(v.verdict, Verdict::Singular);
        assert!(v.statistic.is_infinite());
        for (n, s) in &v.partial_sums {
            let expected = 2.0 * *n as f64 / 9.0;
            assert!((s - expected).abs() <= 1e-12 * expected, "N={n}");
        }
        assert_eq!(v.partial_sums.last().unwrap().0, 1000);
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(hellinger_mode(c(2.0), c(0.0)), 1.0);
        let z = Complex64::new(0.6, 0.8);
        assert_eq!(hellinger_mode(z, Complex64::new(0.0, 1.0)), (-0.125f64).exp());
        assert_eq!(hellinger_mode(c(0.0), c(1.0)), 0.0);
        assert_eq!(hellinger_mode(c(0.0), c(0.0)), 1.0);
    }

    #[test]
    fn kakutani_generic() {
        let u: Vec<Complex64> = (1..=100).map(|n| c(1.0 / n as f64)).collect();
        let zero = vec![c(0.0); 100];
        let v = kakutani_test(&u, &zero).unwrap();
        assert_eq!(v.verdict, Verdict::Equivalent);
        assert_eq!(v.statistic, 0.0);

        let mut with_hole = u.clone();
        with_hole[10] = c(0.0);
        let ones = vec![c(1.0); 100];
        assert_eq!(kakutani_test(&with_hole, &ones).unwrap().verdict, Verdict::Singular);

        // Same profile for u and v: summand is 1, clearly divergent.
        assert_eq!(kakutani_test(&u, &u).unwrap().verdict, Verdict::Singular);
        // Geometric decay: converges within a few terms.
        let fast: Vec<Complex64> = (1..=100).map(|n| c(0.5f64.powi(n) / n as f64)).collect();
        assert_eq!(kakutani_test(&u, &fast).unwrap().verdict, Verdict::Equivalent);
    }

    #[test]
    fn kakutani_power_law_thresholds() {
        for (a, expected) in [(1.0, Verdict::Singular), (1.4, Verdict::Singular), (1.8, Verdict::Equivalent), (2.5, Verdict::Equivalent)] {
            let pair = PowerLawPair {
                u_decay: 1.0,
                v_decay: a,
                v_scale: 1.0,
                dim: 1,
            };
            let v = kakutani_power_law(pair, 100_000).unwrap();
            assert_eq!(v.verdict, expected, "a = {a}");
        }
    }

    #[test]
    fn power_law_partial_sums_match_direct_sum() {
        let pair = PowerLawPair {
            u_decay: 1.0,
            v_decay: 2.0,
            v_scale: 0.5,
            dim: 1,
        };
        let v = kakutani_power_law(pair, 64).unwrap();
        let direct: f64 = (1..=64).map(|n| 2.0 * 0.25 / (n as f64).powi(2)).sum();
        assert!((v.partial_sums.last().unwrap().1 - direct).abs() < 1e-14);
        assert!((v.statistic - direct).abs() < 1e-14);
    }

    #[test]
    fn shell_enumeration_counts_lattice_points() {
        for d in [2, 3] {
            for k in 1..5i64 {
                let mut count = 0i64;
                for_each_shell_point(d, k, &mut |_| count += 1);
                let side = |m: i64| (2 * m + 1).pow(d as u32);
                assert_eq!(count, side(k) - side(k - 1));
            }
        }
    }

    proptest! {
        #[test]
        fn product_sum_consistency(parts in proptest::collection::vec((0.01f64..10.0, -5.0f64..5.0, -5.0f64..5.0, 0.0f64..6.28), 1..50)) {
            let u: Vec<Complex64> = parts.iter().map(|(m, _, _, ph)| Complex64::from_polar(*m, *ph)).collect();
            let v: Vec<Complex64> = parts.iter().map(|(_, a, b, _)| Complex64::new(*a, *b)).collect();
            let stat: f64 = u.iter().zip(&v).map(|(a, b)| b.norm_sqr() / a.norm_sqr()).sum();
            let via_h: f64 = -8.0 * u.iter().zip(&v).map(|(a, b)| log_hellinger_mode(*a, *b)).sum::<f64>();
            prop_assert!((stat - via_h).abs() <= 1e-13 * stat.max(1.0));
        }

        #[test]
        fn hellinger_in_unit_interval(m in 1e-3f64..1e3, a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let h = hellinger_mode(Complex64::new(m, 0.0), Complex64::new(a, b));
            prop_assert!(h > 0.0 || a * a + b * b > 1e3 * m * m);
            prop_assert!(h <= 1.0);
            prop_assert_eq!(h == 1.0, a == 0.0 && b == 0.0 || (a * a + b * b) / (8.0 * m * m) < 1e-17);
        }

        #[test]
        fn feldman_hajek_depends_only_on_equality(b in 0.1f64..10.0, g in 0.1f64..10.0, s in -2.0f64..2.0, n in 1usize..200) {
            let v = feldman_hajek_statistic(b, g, s, n).unwrap();
            prop_assert_eq!(v.verdict == Verdict::Singular, b != g);
            let same = feldman_hajek_statistic(b, b, s, n).unwrap();
            prop_assert_eq!(same.verdict, Verdict::Equivalent);
        }
    }
}
