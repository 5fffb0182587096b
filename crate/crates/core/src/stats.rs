//! Small statistics toolkit: KS tests, Holm correction, Wilson intervals, ranks.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Standard normal CDF, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty(), "median of empty sample");
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Largest `n m` for which two-sample tail probabilities are computed exactly.
pub const KS_EXACT_LIMIT: usize = 16_000_000;

/// `D n m` for the two samples.
fn ks_distance(a: &[f64], b: &[f64]) -> u64 {
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0, "KS test needs nonempty samples");
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);

    // D n m = max |i m - j n| over the merged step functions.
    let (mut i, mut j) = (0usize, 0usize);
    let mut d_int: u64 = 0;
    while i < n && j < m {
        let x = if xa[i] <= xb[j] { xa[i] } else { xb[j] };
        while i < n && xa[i] == x {
            i += 1;
        }
        while j < m && xb[j] == x {
            j += 1;
        }
        d_int = d_int.max((i as i64 * m as i64 - j as i64 * n as i64).unsigned_abs());
    }
    d_int
}

/// `P(D n m >= d_int)` under the null.
fn ks_tail(n: usize, m: usize, d_int: u64) -> f64 {
    let p = if n * m <= KS_EXACT_LIMIT {
        ks_exact_p(n, m, d_int)
    } else {
        let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
        kolmogorov_q((en + 0.12 + 0.11 / en) * d_int as f64 / (n as f64 * m as f64))
    };
    p.clamp(0.0, 1.0)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let d_int = ks_distance(a, b);
    let (n, m) = (a.len(), b.len());
    KsResult {
        statistic: d_int as f64 / (n as f64 * m as f64),
        p_value: ks_tail(n, m, d_int),
    }
}

/// Two-sample KS test with the randomized p-value `P(D > d) + u P(D = d)`,
/// `u` in `[0, 1)`. Exactly uniform under the null for continuous data,
/// where the plain p-value is only super-uniform because `D` is discrete.
pub fn ks_two_sample_randomized(a: &[f64], b: &[f64], u: f64) -> KsResult {
    let d_int = ks_distance(a, b);
    let (n, m) = (a.len(), b.len());
    // D n m only takes multiples of gcd(n, m).
    let next = d_int + gcd(n as u64, m as u64);
    let (ge, gt) = (ks_tail(n, m, d_int), ks_tail(n, m, next));
    KsResult {
        statistic: d_int as f64 / (n as f64 * m as f64),
        p_value: (gt + u * (ge - gt)).clamp(0.0, 1.0),
    }
}

/// `P(D >= d / (n m))` under the null, by counting lattice paths that stay
/// strictly inside the band `|i m - j n| < d`. Only the band is visited.
fn ks_exact_p(n: usize, m: usize, d_int: u64) -> f64 {
    if d_int == 0 {
        return 1.0;
    }
    let (n64, m64, d) = (n as i64, m as i64, d_int as i64);
    // Row i keeps (i m - d) / n < j < (i m + d) / n.
    let band = |i: usize| {
        let im = i as i64 * m64;
        let lo = ((im - d).div_euclid(n64) + 1).max(0) as usize;
        let hi = (im + d - 1).div_euclid(n64).min(m64);
        (lo, hi)
    };
    // a[j] holds (#paths to (i, j) inside the band) / C(i + j, i).
    let mut a = vec![0.0f64; m + 1];
    let (mut prev_lo, hi0) = band(0);
    for v in &mut a[prev_lo..=hi0 as usize] {
        *v = 1.0;
    }
    for i in 1..=n {
        let (lo, hi) = band(i);
        if hi < lo as i64 {
            return 1.0;
        }
        for v in &mut a[prev_lo..lo] {
            *v = 0.0;
        }
        let fi = i as f64;
        for j in lo..=hi as usize {
            let s = fi + j as f64;
            let left = if j > lo { a[j - 1] } else { 0.0 };
            a[j] = a[j] * fi / s + left * j as f64 / s;
        }
        prev_lo = lo;
    }
    1.0 - a[m]
}

/// Kolmogorov survival function `Q(x) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of uniformity on `[0, 1]`.
pub fn ks_uniform(xs: &[f64]) -> KsResult {
    let n = xs.len();
    assert!(n > 0, "KS test needs a nonempty sample");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = v
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / nf - x).max(x - i as f64 / nf))
        .fold(0.0, f64::max);
    let en = nf.sqrt();
    KsResult {
        statistic,
        p_value: kolmogorov_q((en + 0.12 + 0.11 / en) * statistic),
    }
}

/// Holm step-down adjusted p-values, in input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        adjusted[i] = running;
    }
    adjusted
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Ranks starting at 1, ties share their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut r = vec![0.0; n];
    let mut k = 0;
    while k < n {
        let mut e = k;
        while e + 1 < n && xs[order[e + 1]] == xs[order[k]] {
            e += 1;
        }
        let avg = (k + e) as f64 / 2.0 + 1.0;
        for &i in &order[k..=e] {
            r[i] = avg;
        }
        k = e + 1;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}
