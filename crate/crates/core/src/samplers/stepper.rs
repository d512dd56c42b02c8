//! Increment engine shared by every sampler entry point.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::{dist, stable_density_constant};
use crate::scale::{LogCorrectedPowerScale, ScaleFunction};
use crate::symbols::{Frozen, NumericLevy1d, PowerDensity, PowerTerm, Regime, SymbolSpec};

use super::levy::{isotropic_stable, PowerLevy};
use super::variates::{normal, poisson, symmetric_stable, SignedLn};
use super::{check_grid, LnLaw, PathRecord, ProcessSpec, Scheme, StepRule, SubordinatorSpec, Triplet};

#[derive(Debug, Clone)]
enum Mode {
  Levy(Triplet),
  Frozen { symbol: SymbolSpec, rule: StepRule, d: usize },
  Subordinate { base: Triplet, law: Option<LnLaw>, sub: SubordinatorSpec },
  Suppressed { base: Triplet, jumps: PowerLevy, rho: f64, rule: StepRule },
}

/// Advances states of one process spec; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Stepper {
  mode: Mode,
  d: usize,
}

/// Tables of numerically inverted log-corrected symbols, keyed by
/// `(alpha, gamma)` rounded to `1e-3`.
type LevyCache = Mutex<HashMap<(i64, i64), Arc<NumericLevy1d>>>;

fn numeric_levy(alpha: f64, gamma: f64) -> Result<Arc<NumericLevy1d>> {
  static CACHE: OnceLock<LevyCache> = OnceLock::new();
  let key = ((alpha * 1e3).round() as i64, (gamma * 1e3).round() as i64);
  let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
  let mut guard = cache.lock().expect("numeric Lévy cache poisoned");
  if let Some(t) = guard.get(&key) {
    return Ok(t.clone());
  }
  let t = Arc::new(NumericLevy1d::new(key.0 as f64 * 1e-3, key.1 as f64 * 1e-3, 1e-10, 1e4, 8)?);
  guard.insert(key, t.clone());
  Ok(t)
}

/// Largest `s` with `pred(s)` for a predicate that holds below a threshold,
/// bisected in `ln s` over `[lo, hi]`.
fn last_true<P: Fn(f64) -> bool>(pred: P, lo: f64, hi: f64) -> f64 {
  let (mut a, mut b) = (lo.ln(), hi.ln());
  if pred(hi) {
    return hi;
  }
  if !pred(lo) {
    return lo;
  }
  for _ in 0..100 {
    let m = 0.5 * (a + b);
    if pred(m.exp()) {
      a = m;
    } else {
      b = m;
    }
  }
  a.exp()
}

fn frozen_phi(frozen: &Frozen, d: usize, r: f64) -> Result<f64> {
  Ok(match frozen {
    Frozen::VaryingOrder { alpha, gamma } => LogCorrectedPowerScale { alpha: *alpha, gamma: *gamma }.eval(r)?,
    Frozen::Cylindrical { alpha } => r.powf(*alpha) * (d as f64).powf(alpha / 2.0 - 1.0),
    Frozen::Kernel { plus, minus, density, .. } => {
      let w = 0.5 * (plus + minus);
      1.0 / density.terms.iter().map(|t| w * t.c / stable_density_constant(t.alpha, 1) * r.powf(-t.alpha)).sum::<f64>()
    }
  })
}

/// Increment of the Lévy process with characteristics frozen at the left
/// endpoint, added to `out`.
fn frozen_increment<R: Rng + ?Sized>(
  frozen: &Frozen,
  d: usize,
  dt: f64,
  rule: &StepRule,
  rng: &mut R,
  out: &mut [f64],
) -> Result<()> {
  match frozen {
    Frozen::VaryingOrder { alpha, gamma } => {
      if *gamma == 0.0 && rule.scheme == Scheme::Exact {
        let mut buf = vec![0.0; d];
        isotropic_stable(*alpha, d, rng, &mut buf);
        let s = dt.powf(1.0 / alpha);
        for (o, b) in out.iter_mut().zip(buf) {
          *o += s * b;
        }
      } else if *gamma == 0.0 {
        let jumps =
          PowerLevy { d, density: PowerDensity::stable(stable_density_constant(*alpha, d), *alpha), axis: false };
        let eps = rule.eps.unwrap_or_else(|| jumps.threshold(dt, f64::INFINITY, rule.jump_budget));
        jumps.truncated_increment(eps, f64::INFINITY, dt, rng, out);
      } else if d == 1 {
        let table = numeric_levy(*alpha, *gamma)?;
        let ell = LogCorrectedPowerScale { alpha: *alpha, gamma: *gamma }.ln_inverse(dt.ln())?.exp();
        let eps = rule.eps.unwrap_or_else(|| {
          let lo = ell * 1e-12;
          let eps_var = last_true(|s| table.small_variance(s) * dt <= 0.1 * ell * ell, lo, ell);
          let eps_budget = last_true(|s| table.tail(s) * dt > rule.jump_budget, lo, ell * 1e6);
          eps_var.max(eps_budget)
        });
        out[0] += (table.small_variance(eps) * dt).sqrt() * normal(rng);
        let mass = table.tail(eps);
        for _ in 0..poisson(mass * dt, rng) {
          let s = table.inverse_tail(mass * (1.0 - rng.random::<f64>()));
          out[0] += if rng.random::<bool>() { s } else { -s };
        }
      } else {
        return Err(Error::Unsupported("log-corrected symbols are simulated in one dimension".into()));
      }
    }
    Frozen::Cylindrical { alpha } => {
      let s = dt.powf(1.0 / alpha);
      for o in out.iter_mut() {
        *o += s * symmetric_stable(*alpha, rng);
      }
    }
    Frozen::Kernel { plus, minus, density, regime } => {
      let w = plus + minus;
      let sym = PowerLevy {
        d: 1,
        density: PowerDensity {
          terms: density.terms.iter().map(|t| PowerTerm { c: t.c * w / 2.0, alpha: t.alpha }).collect(),
        },
        axis: false,
      };
      let eps = rule.eps.unwrap_or_else(|| sym.threshold(dt, f64::INFINITY, rule.jump_budget));
      out[0] += (sym.small_variance(eps) * dt).sqrt() * normal(rng);
      let mut buf = [0.0];
      for _ in 0..poisson(sym.tail(eps) * dt, rng) {
        sym.sample_jump(eps, f64::INFINITY, rng, &mut buf);
        let s = buf[0].abs();
        out[0] += if rng.random::<f64>() * w < *plus { s } else { -s };
      }
      let skew = plus - minus;
      let drift = match regime {
        Regime::P1 if eps < 1.0 => -skew * density.half_first_moment(eps, 1.0),
        Regime::P1 if eps > 1.0 => skew * density.half_first_moment(1.0, eps),
        Regime::P2 => skew * density.terms.iter().map(|t| t.c * eps.powf(1.0 - t.alpha) / (1.0 - t.alpha)).sum::<f64>(),
        _ => 0.0,
      };
      out[0] += drift * dt;
    }
  }
  Ok(())
}

impl Stepper {
  pub fn new(spec: &ProcessSpec) -> Result<Self> {
    spec.validate()?;
    let d = spec.dim();
    let mode = match spec {
      ProcessSpec::Subordinate { base, subordinator } => {
        let base = base.triplet()?.expect("validated");
        Mode::Subordinate { law: base.ln_law(), base, sub: subordinator.clone() }
      }
      ProcessSpec::SuppressedMeyer { base, rho, step } => {
        let base = base.triplet()?.expect("validated");
        let jumps = base.jumps.clone().expect("validated");
        Mode::Suppressed { base, jumps, rho: *rho, rule: step.clone() }
      }
      _ => match spec.triplet()? {
        Some(t) => Mode::Levy(t),
        None => {
          let rule = match spec {
            ProcessSpec::StableLike { step, .. } | ProcessSpec::CylindricalStable { step, .. } => step.clone(),
            _ => StepRule::default(),
          };
          Mode::Frozen { symbol: spec.symbol().expect("state-dependent families carry a symbol"), rule, d }
        }
      },
    };
    Ok(Self { mode, d })
  }

  pub fn dim(&self) -> usize {
    self.d
  }

  /// Replaces `x` by the state after time `dt`.
  pub fn advance<R: Rng + ?Sized>(&self, x: &mut [f64], dt: f64, rng: &mut R) -> Result<()> {
    if x.len() != self.d {
      return Err(Error::InvalidArgument(format!("state must have dimension {}", self.d)));
    }
    let mut buf = vec![0.0; self.d];
    match &self.mode {
      Mode::Levy(t) => {
        t.exact_increment(dt, rng, &mut buf);
      }
      Mode::Subordinate { base, sub, .. } => {
        let s = sub.increment(dt, rng);
        if s > 0.0 {
          base.exact_increment(s, rng, &mut buf);
        }
      }
      Mode::Suppressed { base, jumps, rho, rule } => {
        let eps = rule.eps.unwrap_or_else(|| jumps.threshold(dt, *rho, rule.jump_budget));
        jumps.truncated_increment(eps, *rho, dt, rng, &mut buf);
        base.add_gaussian_and_drift(dt, rng, &mut buf);
      }
      Mode::Frozen { symbol, rule, d } => {
        let mut remaining = dt;
        let mut steps = 0usize;
        while remaining > 0.0 {
          let frozen = symbol.freeze(x).expect("state-dependent symbol");
          let mut h = match rule.resolution {
            Some(res) => remaining.min(rule.eta * frozen_phi(&frozen, *d, res)?),
            None => remaining,
          };
          if remaining - h <= 1e-12 * dt {
            h = remaining;
          }
          buf.iter_mut().for_each(|b| *b = 0.0);
          frozen_increment(&frozen, *d, h, rule, rng, &mut buf)?;
          for (xi, b) in x.iter_mut().zip(&buf) {
            *xi += b;
          }
          remaining -= h;
          steps += 1;
          if steps > rule.max_substeps && remaining > 0.0 {
            return Err(Error::StepTooCoarse(format!(
              "more than {} substeps needed for dt = {dt} at resolution {:?}",
              rule.max_substeps, rule.resolution
            )));
          }
        }
        return Ok(());
      }
    }
    for (xi, b) in x.iter_mut().zip(&buf) {
      *xi += b;
    }
    Ok(())
  }

  /// Path on `grid` started at `x`.
  pub fn path<R: Rng + ?Sized>(&self, x: &[f64], grid: &[f64], rng: &mut R) -> Result<PathRecord> {
    self.monitored_path(x, grid, f64::INFINITY, 1, rng)
  }

  /// Path on `grid` whose running supremum is also taken over interior
  /// substeps: each grid interval is split into `max(min_substeps,
  /// ceil(len / max_dt))` equal steps.
  pub fn monitored_path<R: Rng + ?Sized>(
    &self,
    x: &[f64],
    grid: &[f64],
    max_dt: f64,
    min_substeps: usize,
    rng: &mut R,
  ) -> Result<PathRecord> {
    check_grid(grid)?;
    let substeps = |len: f64| -> usize {
      let k = if max_dt.is_finite() { (len / max_dt).ceil() as usize } else { 1 };
      k.max(min_substeps).max(1)
    };
    let mut rec = PathRecord::new(x.to_vec());
    if let Mode::Subordinate { law: Some(law), sub, .. } = &self.mode {
      // One-dimensional subordinate paths run in the log domain: the
      // geometric-stable clock produces displacements far below f64 range.
      let mut pos = SignedLn::ZERO;
      let mut t = 0.0;
      for &tk in grid {
        let k = substeps(tk - t);
        let h = (tk - t) / k as f64;
        let mut top = f64::NEG_INFINITY;
        for _ in 0..k {
          let ln_s = sub.ln_increment(h, rng);
          if ln_s > f64::NEG_INFINITY {
            pos = pos.sum(law.ln_increment(ln_s, rng));
          }
          top = top.max(pos.ln);
        }
        rec.push(tk, vec![x[0] + pos.to_f64()], top);
        t = tk;
      }
      return Ok(rec);
    }
    let mut y = x.to_vec();
    let mut t = 0.0;
    for &tk in grid {
      let k = substeps(tk - t);
      let h = (tk - t) / k as f64;
      let mut top = f64::NEG_INFINITY;
      for _ in 0..k {
        self.advance(&mut y, h, rng)?;
        top = top.max(dist(&y, x).ln());
      }
      rec.push(tk, y.clone(), top);
      t = tk;
    }
    Ok(rec)
  }
}
