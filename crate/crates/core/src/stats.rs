//! Estimators, confidence intervals, fits and goodness-of-fit tests.

use serde::{Deserialize, Serialize};

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Pairwise (cascade) summation; the result depends only on the order of
/// `xs`, never on how work was scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
  const LEAF: usize = 32;
  if xs.len() <= LEAF {
    return xs.iter().sum();
  }
  let mid = xs.len() / 2;
  pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean with a normal-theory 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
  pub value: f64,
  pub se: f64,
  pub lo: f64,
  pub hi: f64,
  pub n: usize,
}

impl Estimate {
  pub fn from_samples(xs: &[f64]) -> Self {
    let n = xs.len();
    if n == 0 {
      return Self { value: f64::NAN, se: f64::NAN, lo: f64::NAN, hi: f64::NAN, n };
    }
    let mean = pairwise_sum(xs) / n as f64;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
    let se = (var / n as f64).sqrt();
    Self { value: mean, se, lo: mean - Z95 * se, hi: mean + Z95 * se, n }
  }

  pub fn contains(&self, v: f64) -> bool {
    self.lo <= v && v <= self.hi
  }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64, f64) {
  if n == 0 {
    return (f64::NAN, 0.0, 1.0);
  }
  let nf = n as f64;
  let p = k as f64 / nf;
  let z2 = z * z;
  let denom = 1.0 + z2 / nf;
  let center = (p + z2 / (2.0 * nf)) / denom;
  let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
  let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
  let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
  (p, lo, hi)
}

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
  pub slope: f64,
  pub intercept: f64,
  pub r2: f64,
  pub slope_se: f64,
  pub n: usize,
}

impl LinearFit {
  pub fn fit(x: &[f64], y: &[f64]) -> Option<Self> {
    let n = x.len();
    if n < 2 || n != y.len() {
      return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx <= 0.0 {
      return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
      .iter()
      .zip(y)
      .map(|(a, b)| {
        let e = b - intercept - slope * a;
        e * e
      })
      .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    Some(Self { slope, intercept, r2, slope_se, n })
  }

  /// Two-sided 95% interval for the slope (normal approximation).
  pub fn slope_ci(&self) -> (f64, f64) {
    (self.slope - Z95 * self.slope_se, self.slope + Z95 * self.slope_se)
  }
}

/// Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
  if lambda < 0.2 {
    return 1.0;
  }
  let mut sum = 0.0;
  for k in 1..200 {
    let kf = k as f64;
    let term = (-2.0 * kf * kf * lambda * lambda).exp();
    sum += if k % 2 == 1 { term } else { -term };
    if term < 1e-16 {
      break;
    }
  }
  (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
  pub statistic: f64,
  pub p_value: f64,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
  let mut v = xs.to_vec();
  v.sort_by(|a, b| a.total_cmp(b));
  v
}

/// Two-sample Kolmogorov–Smirnov test with the Stephens small-sample
/// correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
  let a = sorted(a);
  let b = sorted(b);
  let (na, nb) = (a.len(), b.len());
  let (mut i, mut j) = (0, 0);
  let mut d: f64 = 0.0;
  while i < na && j < nb {
    let x = a[i].min(b[j]);
    while i < na && a[i] <= x {
      i += 1;
    }
    while j < nb && b[j] <= x {
      j += 1;
    }
    d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
  }
  let ne = (na * nb) as f64 / (na + nb) as f64;
  let sq = ne.sqrt();
  KsResult { statistic: d, p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d) }
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> KsResult {
  let v = sorted(xs);
  let n = v.len() as f64;
  let mut d: f64 = 0.0;
  for (i, &x) in v.iter().enumerate() {
    let f = cdf(x);
    d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
  }
  let sq = n.sqrt();
  KsResult { statistic: d, p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d) }
}

/// Inverse empirical CDF quantile: the smallest sample with ECDF >= p.
pub fn quantile_lower(sorted: &[f64], p: f64) -> f64 {
  if sorted.is_empty() {
    return f64::NAN;
  }
  let n = sorted.len();
  let k = ((p * n as f64).ceil() as usize).clamp(1, n);
  sorted[k - 1]
}

/// Median, averaging the middle pair for even sizes.
pub fn median(xs: &[f64]) -> f64 {
  let v = sorted(xs);
  let n = v.len();
  if n == 0 {
    return f64::NAN;
  }
  if n % 2 == 1 {
    v[n / 2]
  } else {
    0.5 * (v[n / 2 - 1] + v[n / 2])
  }
}

fn ranks(xs: &[f64]) -> Vec<f64> {
  let mut idx: Vec<usize> = (0..xs.len()).collect();
  idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
  let mut r = vec![0.0; xs.len()];
  let mut i = 0;
  while i < idx.len() {
    let mut j = i;
    while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
      j += 1;
    }
    let avg = (i + j) as f64 / 2.0 + 1.0;
    for k in i..=j {
      r[idx[k]] = avg;
    }
    i = j + 1;
  }
  r
}

/// Spearman rank correlation and its large-sample two-sided p-value.
pub fn spearman(a: &[f64], b: &[f64]) -> (f64, f64) {
  let ra = ranks(a);
  let rb = ranks(b);
  let n = a.len() as f64;
  let ma = ra.iter().sum::<f64>() / n;
  let mb = rb.iter().sum::<f64>() / n;
  let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
  for (x, y) in ra.iter().zip(&rb) {
    sab += (x - ma) * (y - mb);
    saa += (x - ma) * (x - ma);
    sbb += (y - mb) * (y - mb);
  }
  let rho = sab / (saa * sbb).sqrt();
  let z = rho * (n - 1.0).sqrt();
  (rho, libm::erfc(z.abs() / std::f64::consts::SQRT_2))
}
