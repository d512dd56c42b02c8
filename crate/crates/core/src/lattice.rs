//! Long-range random conductance models on finite boxes of `Z^d`.
//!
//! Bond weights are a pure function of `(seed, bond)`, so a field never stores
//! them and any two builds with the same header agree bond by bond.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::sync::{Arc, RwLock};

use rand::Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::sphere_area;
use crate::rng::PathRng;
use crate::samplers::PathRecord;

/// Law of the i.i.d. bond weights `w_xy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightLaw {
  Constant {
    value: f64,
  },
  /// `value` with probability `keep`, else 0.
  Bernoulli {
    keep: f64,
    value: f64,
  },
  /// Bernoulli(`keep`) times a Pareto variable with `P(w > s) = s^{-index}`, `s >= 1`.
  BernoulliPareto {
    keep: f64,
    index: f64,
  },
}

impl WeightLaw {
  pub fn validate(&self) -> Result<()> {
    let bad = |what, value, lo, hi| Err(Error::OutOfRange { what, value, lo, hi });
    match *self {
      WeightLaw::Constant { value } if !(value > 0.0 && value.is_finite()) => bad("weight", value, 0.0, f64::INFINITY),
      WeightLaw::Bernoulli { keep, .. } | WeightLaw::BernoulliPareto { keep, .. } if !(keep > 0.0 && keep <= 1.0) => {
        bad("keep", keep, 0.0, 1.0)
      }
      WeightLaw::Bernoulli { value, .. } if !(value > 0.0 && value.is_finite()) => {
        bad("weight", value, 0.0, f64::INFINITY)
      }
      WeightLaw::BernoulliPareto { index, .. } if !(index > 1.0) => bad("pareto index", index, 1.0, f64::INFINITY),
      _ => Ok(()),
    }
  }

  fn id(&self) -> u32 {
    match self {
      WeightLaw::Constant { .. } => 0,
      WeightLaw::Bernoulli { .. } => 1,
      WeightLaw::BernoulliPareto { .. } => 2,
    }
  }

  fn params(&self) -> [f64; 2] {
    match *self {
      WeightLaw::Constant { value } => [value, 0.0],
      WeightLaw::Bernoulli { keep, value } => [keep, value],
      WeightLaw::BernoulliPareto { keep, index } => [keep, index],
    }
  }

  fn from_id(id: u32, p: [f64; 2]) -> Result<Self> {
    Ok(match id {
      0 => WeightLaw::Constant { value: p[0] },
      1 => WeightLaw::Bernoulli { keep: p[0], value: p[1] },
      2 => WeightLaw::BernoulliPareto { keep: p[0], index: p[1] },
      _ => return Err(Error::Parse(format!("unknown weight law id {id}"))),
    })
  }

  pub fn is_constant(&self) -> bool {
    matches!(self, WeightLaw::Constant { .. }) || matches!(self, WeightLaw::Bernoulli { keep, .. } if *keep == 1.0)
  }

  /// Weight from two uniforms in `[0, 1)`.
  fn sample(&self, u1: f64, u2: f64) -> f64 {
    match *self {
      WeightLaw::Constant { value } => value,
      WeightLaw::Bernoulli { keep, value } => {
        if u1 < keep {
          value
        } else {
          0.0
        }
      }
      WeightLaw::BernoulliPareto { keep, index } => {
        if u1 < keep {
          (1.0 - u2).powf(-1.0 / index)
        } else {
          0.0
        }
      }
    }
  }

  /// `E[w^p]`.
  pub fn moment(&self, p: f64) -> f64 {
    match *self {
      WeightLaw::Constant { value } => value.powf(p),
      WeightLaw::Bernoulli { keep, value } => keep * value.powf(p),
      WeightLaw::BernoulliPareto { keep, index } => {
        if p < index {
          keep * index / (index - p)
        } else {
          f64::INFINITY
        }
      }
    }
  }

  /// `E[w^{-q}; w > 0]`.
  pub fn negative_moment(&self, q: f64) -> f64 {
    match *self {
      WeightLaw::BernoulliPareto { keep, index } => keep * index / (index + q),
      _ => self.moment(-q),
    }
  }

  pub fn zero_probability(&self) -> f64 {
    match *self {
      WeightLaw::Constant { .. } => 0.0,
      WeightLaw::Bernoulli { keep, .. } | WeightLaw::BernoulliPareto { keep, .. } => 1.0 - keep,
    }
  }
}

/// VSRW jumps at rate `nu_x`; CSRW at rate 1. Both use `eta_xy / nu_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkKind {
  Vsrw,
  Csrw,
}

/// Metric used for balls and running suprema.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
  #[default]
  Euclidean,
  Graph,
}

/// Empirical bond moments against the declared law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
  pub bonds: usize,
  pub p: f64,
  pub q: f64,
  pub empirical_p: f64,
  pub declared_p: f64,
  pub empirical_neg_q: f64,
  pub declared_neg_q: f64,
  pub zero_fraction: f64,
  pub declared_zero: f64,
}

#[derive(Debug)]
struct SiteTable {
  alias: Option<WeightedAliasIndex<f64>>,
  nu: f64,
}

/// Conductances `eta_xy = w_xy |x - y|^{-(d + alpha)}` for `0 < |x - y| <= R_J`
/// around the box `[-L, L]^d`.
#[derive(Debug)]
pub struct ConductanceField {
  pub d: usize,
  pub alpha: f64,
  pub half_width: i64,
  pub range: f64,
  pub law: WeightLaw,
  pub seed: u64,
  pub moments: MomentReport,
  /// `sum_{|z| > R_J} |z|^{-(d + alpha)}` times `E[w]`, integral approximation.
  pub truncated_tail_mass: f64,
  offsets: Vec<Vec<i64>>,
  kernel: Vec<f64>,
  shared: Option<Arc<SiteTable>>,
  cache: RwLock<HashMap<Vec<i64>, Arc<SiteTable>>>,
}

fn splitmix(mut z: u64) -> u64 {
  z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
  z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
  z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
  z ^ (z >> 31)
}

fn unit(h: u64) -> f64 {
  (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bond weight stream: symmetric in `(x, y)`.
fn bond_uniforms(seed: u64, x: &[i64], y: &[i64]) -> (f64, f64) {
  let (a, b) = if x <= y { (x, y) } else { (y, x) };
  let mut h = splitmix(seed);
  for &c in a.iter().chain(b) {
    h = splitmix(h ^ (c as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
  }
  let u1 = unit(splitmix(h));
  let u2 = unit(splitmix(h ^ 0x5851_f42d_4c95_7f2d));
  (u1, u2)
}

/// All `z` in `Z^d` with `0 < |z| <= range`, in lexicographic order.
fn ball_offsets(d: usize, range: f64) -> Vec<Vec<i64>> {
  let m = range.floor() as i64;
  let mut out = Vec::new();
  let mut z = vec![-m; d];
  loop {
    let n2: i64 = z.iter().map(|c| c * c).sum();
    if n2 > 0 && (n2 as f64) <= range * range {
      out.push(z.clone());
    }
    let mut i = d;
    loop {
      if i == 0 {
        return out;
      }
      i -= 1;
      if z[i] < m {
        z[i] += 1;
        break;
      }
      z[i] = -m;
    }
  }
}

/// Bonds sampled for the moment check.
const MOMENT_BONDS: usize = 100_000;
const MOMENT_P: f64 = 1.0;
const MOMENT_Q: f64 = 1.0;

/// Builds the field; `range = None` uses `R_J = L / 4`.
pub fn build_field(
  d: usize,
  alpha: f64,
  half_width: i64,
  range: Option<f64>,
  law: WeightLaw,
  seed: u64,
) -> Result<ConductanceField> {
  if d == 0 {
    return Err(Error::InvalidArgument("dimension must be at least 1".into()));
  }
  if !(alpha > 0.0 && alpha < 2.0) {
    return Err(Error::OutOfRange { what: "alpha", value: alpha, lo: 0.0, hi: 2.0 });
  }
  law.validate()?;
  let range = range.unwrap_or(half_width as f64 / 4.0);
  if !(range >= 1.0) || (half_width as f64) < 4.0 * range {
    return Err(Error::InvalidArgument(format!("need 1 <= R_J <= L / 4, got R_J = {range}, L = {half_width}")));
  }
  if law.moment(MOMENT_P).is_infinite() {
    return Err(Error::InvalidArgument("weight law has no finite first moment".into()));
  }
  let offsets = ball_offsets(d, range);
  let kernel: Vec<f64> = offsets
    .iter()
    .map(|z| {
      let n = (z.iter().map(|c| (c * c) as f64).sum::<f64>()).sqrt();
      n.powf(-(d as f64 + alpha))
    })
    .collect();
  let moments = moment_check(d, half_width, &offsets, &law, seed)?;
  let shared = if law.is_constant() {
    let w = law.moment(1.0);
    let weights: Vec<f64> = kernel.iter().map(|k| w * k).collect();
    Some(Arc::new(SiteTable {
      nu: weights.iter().sum(),
      alias: Some(WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidArgument(e.to_string()))?),
    }))
  } else {
    None
  };
  Ok(ConductanceField {
    d,
    alpha,
    half_width,
    range,
    law,
    seed,
    moments,
    truncated_tail_mass: law.moment(1.0) * sphere_area(d) * range.powf(-alpha) / alpha,
    offsets,
    kernel,
    shared,
    cache: RwLock::new(HashMap::new()),
  })
}

fn moment_check(d: usize, l: i64, offsets: &[Vec<i64>], law: &WeightLaw, seed: u64) -> Result<MomentReport> {
  let mut wp = Vec::new();
  let mut wq = Vec::new();
  let mut zeros = 0usize;
  let mut x = vec![-l; d];
  'outer: loop {
    for z in offsets.iter().filter(|z| z.as_slice() > vec![0; d].as_slice()) {
      let y: Vec<i64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
      let (u1, u2) = bond_uniforms(seed, &x, &y);
      let w = law.sample(u1, u2);
      wp.push(w.powf(MOMENT_P));
      if w > 0.0 {
        wq.push(w.powf(-MOMENT_Q));
      } else {
        wq.push(0.0);
        zeros += 1;
      }
      if wp.len() >= MOMENT_BONDS {
        break 'outer;
      }
    }
    let mut i = d;
    loop {
      if i == 0 {
        break 'outer;
      }
      i -= 1;
      if x[i] < l {
        x[i] += 1;
        break;
      }
      x[i] = -l;
    }
  }
  let n = wp.len();
  let est_p = crate::stats::Estimate::from_samples(&wp);
  let est_q = crate::stats::Estimate::from_samples(&wq);
  let report = MomentReport {
    bonds: n,
    p: MOMENT_P,
    q: MOMENT_Q,
    empirical_p: est_p.value,
    declared_p: law.moment(MOMENT_P),
    empirical_neg_q: est_q.value,
    declared_neg_q: law.negative_moment(MOMENT_Q),
    zero_fraction: zeros as f64 / n as f64,
    declared_zero: law.zero_probability(),
  };
  let off = |emp: f64, decl: f64, se: f64| (emp - decl).abs() > 6.0 * se + 0.05 * decl.abs();
  let zero_se = (report.declared_zero * (1.0 - report.declared_zero) / n as f64).sqrt();
  if off(est_p.value, report.declared_p, est_p.se)
    || off(est_q.value, report.declared_neg_q, est_q.se)
    || (report.zero_fraction - report.declared_zero).abs() > 6.0 * zero_se + 1e-3
  {
    return Err(Error::MomentCheckFailed(format!("{report:?}")));
  }
  Ok(report)
}

impl ConductanceField {
  /// `w_xy`; zero on the diagonal and beyond `R_J`.
  pub fn weight(&self, x: &[i64], y: &[i64]) -> f64 {
    let n2: i64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if n2 == 0 || n2 as f64 > self.range * self.range {
      return 0.0;
    }
    let (u1, u2) = bond_uniforms(self.seed, x, y);
    self.law.sample(u1, u2)
  }

  /// `eta_xy = w_xy |x - y|^{-(d + alpha)}`.
  pub fn conductance(&self, x: &[i64], y: &[i64]) -> f64 {
    let w = self.weight(x, y);
    if w == 0.0 {
      return 0.0;
    }
    let n = x.iter().zip(y).map(|(a, b)| ((a - b) * (a - b)) as f64).sum::<f64>().sqrt();
    w * n.powf(-(self.d as f64 + self.alpha))
  }

  pub fn offsets(&self) -> &[Vec<i64>] {
    &self.offsets
  }

  pub fn in_box(&self, x: &[i64]) -> bool {
    x.iter().all(|c| c.abs() <= self.half_width)
  }

  fn table(&self, x: &[i64]) -> Arc<SiteTable> {
    if let Some(t) = &self.shared {
      return t.clone();
    }
    if let Some(t) = self.cache.read().expect("site cache poisoned").get(x) {
      return t.clone();
    }
    let mut y = vec![0; self.d];
    let weights: Vec<f64> = self
      .offsets
      .iter()
      .zip(&self.kernel)
      .map(|(z, k)| {
        for i in 0..self.d {
          y[i] = x[i] + z[i];
        }
        let (u1, u2) = bond_uniforms(self.seed, x, &y);
        self.law.sample(u1, u2) * k
      })
      .collect();
    let nu: f64 = weights.iter().sum();
    let t = Arc::new(SiteTable { nu, alias: if nu > 0.0 { WeightedAliasIndex::new(weights).ok() } else { None } });
    self.cache.write().expect("site cache poisoned").insert(x.to_vec(), t.clone());
    t
  }

  /// `nu_x = sum_y eta_xy`.
  pub fn nu(&self, x: &[i64]) -> f64 {
    self.table(x).nu
  }

  /// Draws the next site from `x` with probability `eta_xy / nu_x`.
  pub fn sample_jump<R: Rng + ?Sized>(&self, x: &[i64], rng: &mut R) -> Option<Vec<i64>> {
    let t = self.table(x);
    let k = t.alias.as_ref()?.sample(rng);
    Some(x.iter().zip(&self.offsets[k]).map(|(a, b)| a + b).collect())
  }

  /// Holding rate and next site.
  fn step<R: Rng + ?Sized>(&self, kind: WalkKind, x: &[i64], rng: &mut R) -> Option<(f64, Vec<i64>)> {
    let t = self.table(x);
    let alias = t.alias.as_ref()?;
    let rate = match kind {
      WalkKind::Vsrw => t.nu,
      WalkKind::Csrw => 1.0,
    };
    let hold: f64 = Exp1.sample(rng);
    let k = alias.sample(rng);
    Some((hold / rate, x.iter().zip(&self.offsets[k]).map(|(a, b)| a + b).collect()))
  }

  fn box_sites(&self) -> usize {
    ((2 * self.half_width + 1) as usize).pow(self.d as u32)
  }

  fn all_sites(&self) -> Vec<Vec<i64>> {
    let l = self.half_width;
    let mut out = Vec::with_capacity(self.box_sites());
    let mut x = vec![-l; self.d];
    loop {
      out.push(x.clone());
      let mut i = self.d;
      loop {
        if i == 0 {
          return out;
        }
        i -= 1;
        if x[i] < l {
          x[i] += 1;
          break;
        }
        x[i] = -l;
      }
    }
  }

  /// `(min, max)` of `nu_x` over the box.
  pub fn nu_range(&self) -> Result<(f64, f64)> {
    if self.shared.is_some() {
      let nu = self.nu(&vec![0; self.d]);
      return Ok((nu, nu));
    }
    self.small_field_guard()?;
    Ok(self.all_sites().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
      let nu = self.nu(x);
      (lo.min(nu), hi.max(nu))
    }))
  }

  /// CSRW requires `m1 <= nu_x <= m2` on the realized field.
  pub fn check_csrw(&self, m1: f64, m2: f64) -> Result<()> {
    let (lo, hi) = self.nu_range()?;
    if lo < m1 || hi > m2 {
      return Err(Error::OutOfRange { what: "nu_x", value: if lo < m1 { lo } else { hi }, lo: m1, hi: m2 });
    }
    Ok(())
  }

  fn small_field_guard(&self) -> Result<()> {
    const MAX_WORK: usize = 50_000_000;
    if self.box_sites().saturating_mul(self.offsets.len()) > MAX_WORK {
      return Err(Error::Unsupported(format!("exhaustive scans are limited to {MAX_WORK} site-bond pairs")));
    }
    Ok(())
  }

  /// Largest detailed-balance defect over bonds inside the box: against
  /// counting measure for the VSRW rates `eta_xy`, against `nu` for the CSRW
  /// rates `eta_xy / nu_x`.
  pub fn detailed_balance_defect(&self, kind: WalkKind) -> Result<f64> {
    self.small_field_guard()?;
    let mut worst: f64 = 0.0;
    for x in self.all_sites() {
      let nu_x = self.nu(&x);
      for z in &self.offsets {
        let y: Vec<i64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
        if !self.in_box(&y) {
          continue;
        }
        let (fwd, bwd) = match kind {
          WalkKind::Vsrw => (self.conductance(&x, &y), self.conductance(&y, &x)),
          WalkKind::Csrw => {
            let nu_y = self.nu(&y);
            if nu_x == 0.0 || nu_y == 0.0 {
              continue;
            }
            (nu_x * (self.conductance(&x, &y) / nu_x), nu_y * (self.conductance(&y, &x) / nu_y))
          }
        };
        let scale = fwd.abs().max(bwd.abs());
        if scale > 0.0 {
          worst = worst.max((fwd - bwd).abs() / scale);
        }
      }
    }
    Ok(worst)
  }

  /// Hop count between `x` and `y` over bonds with `w > 0` inside the box;
  /// `None` when disconnected.
  pub fn graph_distance(&self, x: &[i64], y: &[i64]) -> Result<Option<usize>> {
    self.small_field_guard()?;
    if !self.in_box(x) || !self.in_box(y) {
      return Err(Error::InvalidArgument("graph distance needs sites inside the box".into()));
    }
    let side = (2 * self.half_width + 1) as usize;
    let index = |p: &[i64]| p.iter().fold(0usize, |acc, c| acc * side + (c + self.half_width) as usize);
    let mut seen = vec![usize::MAX; self.box_sites()];
    let mut queue = VecDeque::new();
    seen[index(x)] = 0;
    queue.push_back(x.to_vec());
    while let Some(p) = queue.pop_front() {
      let dp = seen[index(&p)];
      if p == y {
        return Ok(Some(dp));
      }
      for z in &self.offsets {
        let q: Vec<i64> = p.iter().zip(z).map(|(a, b)| a + b).collect();
        if self.in_box(&q) && seen[index(&q)] == usize::MAX && self.weight(&p, &q) > 0.0 {
          seen[index(&q)] = dp + 1;
          queue.push_back(q);
        }
      }
    }
    Ok(None)
  }
}

/// A walk observed at its jump times.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
  pub path: PathRecord,
  /// The walk left the box before the horizon.
  pub censored: bool,
  pub jumps: usize,
}

fn to_f64(x: &[i64]) -> Vec<f64> {
  x.iter().map(|&c| c as f64).collect()
}

fn euclid(x: &[i64], y: &[i64]) -> f64 {
  x.iter().zip(y).map(|(a, b)| ((a - b) * (a - b)) as f64).sum::<f64>().sqrt()
}

/// Continuous-time walk from `x0` up to `horizon` or the first exit from the box.
pub fn simulate_walk(
  field: &ConductanceField,
  kind: WalkKind,
  x0: &[i64],
  horizon: f64,
  rng: &mut PathRng,
) -> Result<Walk> {
  if x0.len() != field.d || !field.in_box(x0) {
    return Err(Error::InvalidArgument("start must be a site of the box".into()));
  }
  let mut path = PathRecord::new(to_f64(x0));
  let mut x = x0.to_vec();
  let mut t = 0.0;
  let mut jumps = 0;
  while let Some((hold, y)) = field.step(kind, &x, rng) {
    if t + hold > horizon {
      break;
    }
    t += hold;
    x = y;
    jumps += 1;
    path.push(t, to_f64(&x), euclid(&x, x0).ln());
    if !field.in_box(&x) {
      return Ok(Walk { path, censored: true, jumps });
    }
  }
  if path.times.last().is_none_or(|&last| last < horizon) {
    path.push(horizon, to_f64(&x), euclid(&x, x0).ln());
  }
  Ok(Walk { path, censored: false, jumps })
}

/// First time the walk is at Euclidean distance `>= r` from `x0`.
/// Returns `(tau, exit point, censored)`; censored on box exit or horizon.
pub fn walk_exit(
  field: &ConductanceField,
  kind: WalkKind,
  x0: &[i64],
  r: f64,
  horizon: f64,
  rng: &mut PathRng,
) -> (f64, Vec<f64>, bool) {
  let mut x = x0.to_vec();
  let mut t = 0.0;
  loop {
    let Some((hold, y)) = field.step(kind, &x, rng) else {
      return (horizon, to_f64(&x), true);
    };
    t += hold;
    if t > horizon {
      return (horizon, to_f64(&x), true);
    }
    x = y;
    if !field.in_box(&x) {
      return (t, to_f64(&x), true);
    }
    if euclid(&x, x0) >= r {
      return (t, to_f64(&x), false);
    }
  }
}

const ENV_MAGIC: &[u8; 8] = b"LILENV01";

/// Header-only environment file: `d, alpha, L, R_J, law id, law params, seed`.
pub fn write_env<W: Write>(mut w: W, field: &ConductanceField) -> Result<()> {
  w.write_all(ENV_MAGIC)?;
  w.write_all(&(field.d as u32).to_le_bytes())?;
  w.write_all(&field.alpha.to_le_bytes())?;
  w.write_all(&field.half_width.to_le_bytes())?;
  w.write_all(&field.range.to_le_bytes())?;
  w.write_all(&field.law.id().to_le_bytes())?;
  for p in field.law.params() {
    w.write_all(&p.to_le_bytes())?;
  }
  w.write_all(&field.seed.to_le_bytes())?;
  Ok(())
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
  let mut b = [0u8; N];
  r.read_exact(&mut b)?;
  Ok(b)
}

/// Rebuilds the field recorded by [`write_env`].
pub fn read_env<R: Read>(mut r: R) -> Result<ConductanceField> {
  if &read_array::<R, 8>(&mut r)? != ENV_MAGIC {
    return Err(Error::Parse("not an environment file".into()));
  }
  let d = u32::from_le_bytes(read_array(&mut r)?) as usize;
  let alpha = f64::from_le_bytes(read_array(&mut r)?);
  let half_width = i64::from_le_bytes(read_array(&mut r)?);
  let range = f64::from_le_bytes(read_array(&mut r)?);
  let id = u32::from_le_bytes(read_array(&mut r)?);
  let params = [f64::from_le_bytes(read_array(&mut r)?), f64::from_le_bytes(read_array(&mut r)?)];
  let seed = u64::from_le_bytes(read_array(&mut r)?);
  build_field(d, alpha, half_width, Some(range), WeightLaw::from_id(id, params)?, seed)
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::rng::path_rng;

  #[test]
  fn offsets_fill_the_ball() {
    let o = ball_offsets(2, 2.0);
    // 5x5 square minus corners (|z|^2 = 5, 8) and the origin
    assert_eq!(o.len(), 12);
    assert!(o.iter().all(|z| z.iter().map(|c| c * c).sum::<i64>() <= 4));
  }

  #[test]
  fn weights_are_symmetric() {
    let law = WeightLaw::BernoulliPareto { keep: 0.6, index: 3.0 };
    let f = build_field(1, 1.0, 40, None, law, 9).unwrap();
    for (x, y) in [(0, 3), (-5, 2), (7, 17)] {
      assert_eq!(f.weight(&[x], &[y]), f.weight(&[y], &[x]));
    }
    assert_eq!(f.weight(&[4], &[4]), 0.0);
  }

  #[test]
  fn constant_law_gives_bare_kernel() {
    let f = build_field(2, 1.5, 16, None, WeightLaw::Constant { value: 1.0 }, 1).unwrap();
    let eta = f.conductance(&[0, 0], &[1, 2]);
    assert_eq!(eta, 5f64.sqrt().powf(-3.5));
  }

  #[test]
  fn walk_censors_on_box_exit() {
    let f = build_field(1, 1.0, 4, Some(1.0), WeightLaw::Constant { value: 1.0 }, 1).unwrap();
    let w = simulate_walk(&f, WalkKind::Vsrw, &[0], 1e9, &mut path_rng(3, 0)).unwrap();
    assert!(w.censored);
    assert!(w.path.check_invariants().is_ok());
  }
}
