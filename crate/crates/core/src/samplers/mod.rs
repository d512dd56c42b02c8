//! Path samplers for the continuous-state families: exact Lévy increments,
//! frozen-coefficient Euler steps for state-dependent symbols, subordinate
//! processes and the suppressed-jump process with reattached big jumps.

mod levy;
mod meyer;
mod stepper;
mod subordinator;
mod trace;
pub mod variates;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{one_minus_cos_moment, sphere_area, stable_density_constant};
use crate::parallel::par_map;
use crate::rng::{path_rng, PathRng};
use crate::scale::TabulatedScale;
use crate::symbols::{levy_tail, phi_from_symbol, Field, PowerDensity, SymbolSpec};

pub use levy::{isotropic_stable, PowerLevy};
pub use meyer::{meyer_split, sample_meyer_path, sample_meyer_paths, MeyerPath, MeyerSplit};
pub use stepper::Stepper;
pub use subordinator::{sample_subordinator_path, SubordinatorSpec};
pub use trace::{path_csv, read_binary_trace, write_binary_trace, BinaryTrace};

/// Normalization of the 1d stable law: unit symbol `|xi|^alpha` or unit
/// Lévy density `|z|^{-1-alpha}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StableNorm {
  #[default]
  Symbol,
  Density,
}

/// How increments of a frozen log-corrected symbol are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
  /// Exact stable increments whenever the frozen symbol is a pure power.
  #[default]
  Exact,
  /// Always compound Poisson above `eps` plus a Gaussian small-jump proxy.
  CompoundPoisson,
}

/// Step control of the frozen-coefficient scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRule {
  /// Substeps obey `dt <= eta Phi(x, resolution)`.
  #[serde(default = "default_eta")]
  pub eta: f64,
  /// Target spatial resolution; `None` means one frozen step per grid cell.
  #[serde(default)]
  pub resolution: Option<f64>,
  /// Fixed small-jump threshold; `None` selects it per step.
  #[serde(default)]
  pub eps: Option<f64>,
  /// Cap on the expected number of compound-Poisson jumps per step.
  #[serde(default = "default_jump_budget")]
  pub jump_budget: f64,
  #[serde(default = "default_max_substeps")]
  pub max_substeps: usize,
  #[serde(default)]
  pub scheme: Scheme,
}

fn default_eta() -> f64 {
  0.1
}

fn default_jump_budget() -> f64 {
  256.0
}

fn default_max_substeps() -> usize {
  1 << 22
}

impl Default for StepRule {
  fn default() -> Self {
    Self {
      eta: default_eta(),
      resolution: None,
      eps: None,
      jump_budget: default_jump_budget(),
      max_substeps: default_max_substeps(),
      scheme: Scheme::Exact,
    }
  }
}

fn two() -> f64 {
  2.0
}

/// A simulable process family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
  /// Symbol `|xi|^alpha` in `R^d`.
  IsotropicStable { alpha: f64, d: usize },
  /// Symmetric 1d stable law.
  OneDStable {
    alpha: f64,
    #[serde(default)]
    norm: StableNorm,
  },
  /// Symbol `sum_i |xi_i|^{alpha(x)}`.
  CylindricalStable {
    alpha: Field,
    d: usize,
    #[serde(default)]
    step: StepRule,
  },
  /// Jump kernel `|x - y|^{-1-alpha}` along coordinate axes only.
  AxisSingularStable { alpha: f64, d: usize },
  /// Feller process with the given symbol, frozen-coefficient Euler scheme.
  StableLike {
    symbol: SymbolSpec,
    #[serde(default)]
    step: StepRule,
  },
  /// Generator `(variance / 2) Laplacian`; the default `variance = 2` is the
  /// generator `Laplacian`.
  BrownianMotion {
    d: usize,
    #[serde(default = "two")]
    variance: f64,
  },
  /// `X_t = Z_{S_t}`.
  Subordinate { base: Box<ProcessSpec>, subordinator: SubordinatorSpec },
  /// The base process with all jumps longer than `rho` removed.
  SuppressedMeyer {
    base: Box<ProcessSpec>,
    rho: f64,
    #[serde(default)]
    step: StepRule,
  },
}

fn check_alpha(alpha: f64) -> Result<()> {
  if alpha > 0.0 && alpha < 2.0 {
    Ok(())
  } else {
    Err(Error::OutOfRange { what: "alpha", value: alpha, lo: 0.0, hi: 2.0 })
  }
}

/// Region on which state-dependent fields are validated.
const FIELD_CHECK_HALF_WIDTH: f64 = 10.0;

/// Lévy triplet of a translation-invariant spec.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Triplet {
  pub d: usize,
  pub jumps: Option<PowerLevy>,
  /// Lower Cholesky factor of `2a`: the Gaussian part is `chol N(0, I)`.
  pub chol: Vec<Vec<f64>>,
  /// Operator norm of `a`.
  pub a_norm: f64,
  pub drift: Vec<f64>,
}

fn cholesky(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
  let n = m.len();
  let mut l = vec![vec![0.0; n]; n];
  for i in 0..n {
    for j in 0..=i {
      let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
      if i == j {
        let v = m[i][i] - s;
        l[i][j] = if v > 0.0 { v.sqrt() } else { 0.0 };
      } else if l[j][j] > 0.0 {
        l[i][j] = (m[i][j] - s) / l[j][j];
      }
    }
  }
  l
}

impl Triplet {
  fn new(d: usize, jumps: Option<PowerLevy>, a: Vec<Vec<f64>>, drift: Vec<f64>) -> Self {
    let a_norm = crate::symbols::operator_norm(&a);
    let two_a: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| 2.0 * v).collect()).collect();
    Self { d, jumps, chol: if a.is_empty() { vec![] } else { cholesky(&two_a) }, a_norm, drift }
  }

  fn gaussian(d: usize, a: f64) -> Self {
    let m = (0..d).map(|i| (0..d).map(|j| if i == j { a } else { 0.0 }).collect()).collect();
    Self::new(d, None, m, vec![])
  }

  fn add_gaussian_and_drift<R: rand::Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) {
    if !self.chol.is_empty() {
      let z: Vec<f64> = (0..self.d).map(|_| variates::normal(rng)).collect();
      let sq = dt.sqrt();
      for (i, o) in out.iter_mut().enumerate() {
        let s: f64 = (0..=i).map(|k| self.chol[i][k] * z[k]).sum();
        *o += sq * s;
      }
    }
    for (o, b) in out.iter_mut().zip(&self.drift) {
      *o += b * dt;
    }
  }

  /// Exact increment over `dt`, written into `out`.
  pub fn exact_increment<R: rand::Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    if let Some(j) = &self.jumps {
      j.exact_increment(dt, rng, out);
    }
    self.add_gaussian_and_drift(dt, rng, out);
  }

  /// `Phi(r) = 1 / sup_{|xi| <= 1/r} Re q(xi)`; every term peaks on the
  /// boundary (on the diagonal for axis measures).
  pub fn phi(&self, r: f64) -> f64 {
    let k = 1.0 / r;
    let mut sup = self.a_norm * k * k;
    if let Some(j) = &self.jumps {
      for t in &j.density.terms {
        sup += if j.axis {
          t.c / stable_density_constant(t.alpha, 1) * (j.d as f64).powf(1.0 - t.alpha / 2.0) * k.powf(t.alpha)
        } else {
          t.c / stable_density_constant(t.alpha, j.d) * k.powf(t.alpha)
        };
      }
    }
    1.0 / sup
  }

  /// Single-component 1d law, for log-domain subordination.
  fn ln_law(&self) -> Option<LnLaw> {
    if self.d != 1 || self.drift.iter().any(|&b| b != 0.0) {
      return None;
    }
    let gauss = self.chol.first().map_or(0.0, |r| r[0]);
    match &self.jumps {
      None if gauss > 0.0 => Some(LnLaw::Gaussian { sd: gauss }),
      Some(j) if gauss == 0.0 && j.density.terms.len() == 1 => {
        let t = j.density.terms[0];
        Some(LnLaw::Stable { alpha: t.alpha, k: t.c / stable_density_constant(t.alpha, 1) })
      }
      _ => None,
    }
  }
}

/// 1d base law `sd sqrt(s) N` or `(k s)^{1/alpha} S_alpha` over time `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum LnLaw {
  Gaussian { sd: f64 },
  Stable { alpha: f64, k: f64 },
}

impl LnLaw {
  fn ln_increment<R: rand::Rng + ?Sized>(&self, ln_s: f64, rng: &mut R) -> variates::SignedLn {
    let (v, ln_scale) = match *self {
      LnLaw::Gaussian { sd } => (variates::normal(rng), sd.ln() + 0.5 * ln_s),
      LnLaw::Stable { alpha, k } => (variates::symmetric_stable(alpha, rng), (k.ln() + ln_s) / alpha),
    };
    variates::SignedLn { negative: v < 0.0, ln: v.abs().ln() + ln_scale }
  }
}

impl ProcessSpec {
  pub fn dim(&self) -> usize {
    match self {
      ProcessSpec::IsotropicStable { d, .. }
      | ProcessSpec::CylindricalStable { d, .. }
      | ProcessSpec::AxisSingularStable { d, .. }
      | ProcessSpec::BrownianMotion { d, .. } => *d,
      ProcessSpec::OneDStable { .. } => 1,
      ProcessSpec::StableLike { symbol, .. } => symbol.dim(),
      ProcessSpec::Subordinate { base, .. } | ProcessSpec::SuppressedMeyer { base, .. } => base.dim(),
    }
  }

  pub fn validate(&self) -> Result<()> {
    if self.dim() == 0 {
      return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    match self {
      ProcessSpec::IsotropicStable { alpha, .. } => check_alpha(*alpha),
      ProcessSpec::OneDStable { alpha, norm } => {
        if *alpha == 2.0 && *norm == StableNorm::Symbol {
          Ok(())
        } else {
          check_alpha(*alpha)
        }
      }
      ProcessSpec::AxisSingularStable { alpha, d } => {
        if *d < 2 {
          return Err(Error::InvalidArgument("axis-singular kernels need d >= 2".into()));
        }
        check_alpha(*alpha)
      }
      ProcessSpec::CylindricalStable { alpha, d, .. } => {
        let h = FIELD_CHECK_HALF_WIDTH;
        SymbolSpec::CylindricalStable { d: *d, alpha: alpha.clone() }.validate_on(&vec![-h; *d], &vec![h; *d])
      }
      ProcessSpec::StableLike { symbol, .. } => {
        let d = symbol.dim();
        let h = FIELD_CHECK_HALF_WIDTH;
        symbol.validate_on(&vec![-h; d], &vec![h; d])
      }
      ProcessSpec::BrownianMotion { variance, .. } => {
        if *variance > 0.0 && variance.is_finite() {
          Ok(())
        } else {
          Err(Error::OutOfRange { what: "variance", value: *variance, lo: 0.0, hi: f64::INFINITY })
        }
      }
      ProcessSpec::Subordinate { base, subordinator } => {
        base.validate()?;
        subordinator.validate()?;
        if base.triplet()?.is_none() {
          return Err(Error::UnsupportedExact("a subordinated base must have exact increments".into()));
        }
        Ok(())
      }
      ProcessSpec::SuppressedMeyer { base, rho, .. } => {
        base.validate()?;
        if !(*rho > 0.0) {
          return Err(Error::OutOfRange { what: "rho", value: *rho, lo: 0.0, hi: f64::INFINITY });
        }
        match base.triplet()? {
          Some(Triplet { jumps: Some(_), .. }) => Ok(()),
          _ => Err(Error::Unsupported("jump suppression needs a Lévy base with a power-law density".into())),
        }
      }
    }
  }

  /// Lévy triplet of translation-invariant specs.
  pub(crate) fn triplet(&self) -> Result<Option<Triplet>> {
    Ok(match self {
      ProcessSpec::IsotropicStable { alpha, d } => Some(Triplet::new(
        *d,
        Some(PowerLevy {
          d: *d,
          density: PowerDensity::stable(stable_density_constant(*alpha, *d), *alpha),
          axis: false,
        }),
        vec![],
        vec![],
      )),
      ProcessSpec::OneDStable { alpha, norm } => {
        if *alpha == 2.0 {
          Some(Triplet::gaussian(1, 1.0))
        } else {
          let c = match norm {
            StableNorm::Symbol => stable_density_constant(*alpha, 1),
            StableNorm::Density => 1.0,
          };
          Some(Triplet::new(
            1,
            Some(PowerLevy { d: 1, density: PowerDensity::stable(c, *alpha), axis: false }),
            vec![],
            vec![],
          ))
        }
      }
      ProcessSpec::AxisSingularStable { alpha, d } => Some(Triplet::new(
        *d,
        Some(PowerLevy { d: *d, density: PowerDensity::stable(1.0, *alpha), axis: true }),
        vec![],
        vec![],
      )),
      ProcessSpec::BrownianMotion { d, variance } => Some(Triplet::gaussian(*d, variance / 2.0)),
      ProcessSpec::CylindricalStable { alpha: Field::Constant { value }, d, .. } => Some(Triplet::new(
        *d,
        Some(PowerLevy {
          d: *d,
          density: PowerDensity::stable(stable_density_constant(*value, 1), *value),
          axis: true,
        }),
        vec![],
        vec![],
      )),
      ProcessSpec::StableLike { symbol, .. } => match symbol {
        SymbolSpec::PureLevy { d, density, axis, gaussian, drift } => Some(Triplet::new(
          *d,
          density.clone().map(|density| PowerLevy { d: *d, density, axis: *axis }),
          gaussian.clone(),
          drift.clone(),
        )),
        SymbolSpec::VaryingOrder { d, alpha: Field::Constant { value: a }, gamma: Field::Constant { value: g } }
          if *g == 0.0 =>
        {
          Some(Triplet::new(
            *d,
            Some(PowerLevy { d: *d, density: PowerDensity::stable(stable_density_constant(*a, *d), *a), axis: false }),
            vec![],
            vec![],
          ))
        }
        _ => None,
      },
      _ => None,
    })
  }

  /// Whether increments are exact (no frozen-coefficient approximation).
  pub fn has_exact_increments(&self) -> bool {
    match self {
      ProcessSpec::Subordinate { .. } => true,
      ProcessSpec::SuppressedMeyer { .. } => false,
      _ => matches!(self.triplet(), Ok(Some(_))),
    }
  }

  /// The symbol, for families that have one in closed form.
  pub fn symbol(&self) -> Option<SymbolSpec> {
    match self {
      ProcessSpec::StableLike { symbol, .. } => Some(symbol.clone()),
      ProcessSpec::CylindricalStable { alpha, d, .. } => {
        Some(SymbolSpec::CylindricalStable { d: *d, alpha: alpha.clone() })
      }
      ProcessSpec::Subordinate { .. } | ProcessSpec::SuppressedMeyer { .. } => None,
      _ => {
        let t = self.triplet().ok()??;
        let gaussian = if t.chol.is_empty() {
          vec![]
        } else {
          (0..t.d)
            .map(|i| (0..t.d).map(|j| (0..t.d).map(|k| t.chol[i][k] * t.chol[j][k]).sum::<f64>() / 2.0).collect())
            .collect()
        };
        Some(SymbolSpec::PureLevy {
          d: t.d,
          density: t.jumps.as_ref().map(|j| j.density.clone()),
          axis: t.jumps.as_ref().is_some_and(|j| j.axis),
          gaussian,
          drift: t.drift.clone(),
        })
      }
    }
  }

  /// `Phi(x, r)`: from the symbol, or `1 / phi1(1 / F(r))` for subordinate
  /// processes. A suppressed process reports the scale of its base.
  pub fn phi(&self, x: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0) {
      return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    match self {
      ProcessSpec::Subordinate { base, subordinator } => {
        let f = base.phi(x, r)?;
        Ok(1.0 / subordinator.laplace_exponent(1.0 / f)?)
      }
      ProcessSpec::SuppressedMeyer { base, .. } => base.phi(x, r),
      _ => {
        if let Some(t) = self.triplet()? {
          return Ok(t.phi(r));
        }
        let symbol = self.symbol().expect("state-dependent families carry a symbol");
        phi_from_symbol(&symbol, x, r)
      }
    }
  }

  /// `r -> Phi(x, r)` tabulated on `[r_min, r_max]`.
  pub fn phi_table(&self, x: &[f64], r_min: f64, r_max: f64, per_decade: usize) -> Result<TabulatedScale<f64>> {
    TabulatedScale::try_from_fn(|r| self.phi(x, r), r_min, r_max, per_decade)
  }

  /// Jump intensity `J(x, B(x, s)^c)`.
  pub fn jump_tail(&self, x: &[f64], s: f64) -> Result<f64> {
    match self {
      ProcessSpec::Subordinate { base, subordinator } => {
        // Brownian motion time-changed by an alpha_s-stable subordinator is
        // isotropic 2 alpha_s-stable with symbol (a |xi|^2)^{alpha_s}.
        match (base.triplet()?, subordinator) {
          (Some(t), SubordinatorSpec::Stable { alpha }) if t.jumps.is_none() && t.drift.iter().all(|&b| b == 0.0) => {
            let beta = 2.0 * alpha;
            let c = stable_density_constant(beta, t.d) * t.a_norm.powf(*alpha);
            Ok(c * sphere_area(t.d) * s.powf(-beta) / beta)
          }
          _ => Err(Error::Unsupported(
            "jump tails of subordinate processes are implemented for Brownian bases and stable subordinators".into(),
          )),
        }
      }
      ProcessSpec::SuppressedMeyer { base, rho, .. } => {
        if s >= *rho {
          Ok(0.0)
        } else {
          Ok(base.jump_tail(x, s)? - base.jump_tail(x, *rho)?)
        }
      }
      _ => {
        if let Some(t) = self.triplet()? {
          return Ok(t.jumps.as_ref().map_or(0.0, |j| j.tail(s)));
        }
        let symbol = self.symbol().expect("state-dependent families carry a symbol");
        levy_tail(&symbol, x, s)
      }
    }
  }

  /// Canonical content hash of the spec.
  pub fn hash(&self) -> String {
    crate::rng::json_hash(self)
  }
}

/// Unit 1d symbol constant `c` in `q = c |xi|^alpha` of the density
/// `|z|^{-1-alpha}`.
pub fn density_norm_symbol_constant(alpha: f64) -> f64 {
  2.0 * one_minus_cos_moment(alpha)
}

/// A trajectory observed on a time grid with its running supremum
/// `M_t = sup_{s <= t} |X_s - start|` (grid points only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
  pub start: Vec<f64>,
  pub times: Vec<f64>,
  pub positions: Vec<Vec<f64>>,
  pub running_sup: Vec<f64>,
  /// `ln M_t`; exact where `M_t` underflows.
  pub ln_running_sup: Vec<f64>,
}

impl PathRecord {
  pub fn new(start: Vec<f64>) -> Self {
    Self { start, times: vec![], positions: vec![], running_sup: vec![], ln_running_sup: vec![] }
  }

  /// Appends an observation with `ln |X_t - start| = ln_disp`.
  pub fn push(&mut self, t: f64, position: Vec<f64>, ln_disp: f64) {
    let prev = self.ln_running_sup.last().copied().unwrap_or(f64::NEG_INFINITY);
    let m = prev.max(ln_disp);
    self.times.push(t);
    self.positions.push(position);
    self.ln_running_sup.push(m);
    self.running_sup.push(m.exp());
  }

  pub fn len(&self) -> usize {
    self.times.len()
  }

  pub fn is_empty(&self) -> bool {
    self.times.is_empty()
  }

  pub fn dim(&self) -> usize {
    self.start.len()
  }

  /// Running maximum recomputed from the stored positions.
  pub fn brute_force_sup(&self) -> Vec<f64> {
    let mut m: f64 = 0.0;
    self
      .positions
      .iter()
      .map(|p| {
        m = m.max(crate::num::dist(p, &self.start));
        m
      })
      .collect()
  }

  pub fn check_invariants(&self) -> Result<()> {
    let n = self.times.len();
    if self.positions.len() != n || self.running_sup.len() != n || self.ln_running_sup.len() != n {
      return Err(Error::InvalidArgument("path columns have different lengths".into()));
    }
    if n > 0 && !(self.times[0] > 0.0) {
      return Err(Error::InvalidArgument("first time must be positive".into()));
    }
    for i in 1..n {
      if !(self.times[i] > self.times[i - 1]) {
        return Err(Error::NonMonotone { index: i });
      }
      if self.running_sup[i] < self.running_sup[i - 1] {
        return Err(Error::NonMonotone { index: i });
      }
    }
    Ok(())
  }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
  if grid.is_empty() {
    return Err(Error::InvalidArgument("empty time grid".into()));
  }
  if !(grid[0] > 0.0) {
    return Err(Error::InvalidArgument("time grid must start after 0".into()));
  }
  for i in 1..grid.len() {
    if !(grid[i] > grid[i - 1]) || !grid[i].is_finite() {
      return Err(Error::NonMonotone { index: i });
    }
  }
  Ok(())
}

/// `n` equal steps of length `dt`.
pub fn uniform_grid(dt: f64, n: usize) -> Vec<f64> {
  (1..=n).map(|i| i as f64 * dt).collect()
}

/// `t0, t0 q, t0 q^2, ...` up to `t1` (inclusive of the last point not above it).
pub fn geometric_grid(t0: f64, t1: f64, q: f64) -> Vec<f64> {
  let n = ((t1 / t0).ln() / q.ln()).floor() as usize;
  (0..=n).map(|i| t0 * q.powi(i as i32)).collect()
}

/// Uniform steps of `dt` up to `switch`, then geometric with ratio `q` up to
/// `t_end`.
pub fn hybrid_grid(dt: f64, switch: f64, q: f64, t_end: f64) -> Vec<f64> {
  let n = (switch / dt).round() as usize;
  let mut g = uniform_grid(dt, n);
  let mut t = *g.last().unwrap_or(&dt);
  while t * q <= t_end {
    t *= q;
    g.push(t);
  }
  g
}

/// One increment over `dt` started at `x`: exact for Lévy families, the
/// frozen-coefficient step for state-dependent ones.
pub fn sample_increment(spec: &ProcessSpec, x: &[f64], dt: f64, rng: &mut PathRng) -> Result<Vec<f64>> {
  let stepper = Stepper::new(spec)?;
  let mut y = x.to_vec();
  stepper.advance(&mut y, dt, rng)?;
  Ok(y.iter().zip(x).map(|(a, b)| a - b).collect())
}

/// Exact increment over `dt`; errors for families without exact laws.
pub fn exact_increment(spec: &ProcessSpec, dt: f64, rng: &mut PathRng) -> Result<Vec<f64>> {
  if !spec.has_exact_increments() {
    return Err(Error::UnsupportedExact(format!("{spec:?}")));
  }
  sample_increment(spec, &vec![0.0; spec.dim()], dt, rng)
}

/// Path on `grid` from `x`, stream 0 of `seed`.
pub fn sample_path(spec: &ProcessSpec, x: &[f64], grid: &[f64], seed: u64) -> Result<PathRecord> {
  let stepper = Stepper::new(spec)?;
  stepper.path(x, grid, &mut path_rng(seed, 0))
}

/// `n` independent paths on `grid`; path `i` uses stream `i` of `seed`.
pub fn sample_paths(
  spec: &ProcessSpec,
  x: &[f64],
  grid: &[f64],
  n: usize,
  seed: u64,
  workers: usize,
) -> Result<Vec<PathRecord>> {
  let stepper = Stepper::new(spec)?;
  par_map(n, workers, |i| stepper.path(x, grid, &mut path_rng(seed, i as u64))).into_iter().collect()
}

/// `n` independent copies of `X_t` started at `x`.
pub fn sample_endpoints(
  spec: &ProcessSpec,
  x: &[f64],
  t: f64,
  n: usize,
  seed: u64,
  workers: usize,
) -> Result<Vec<Vec<f64>>> {
  let stepper = Stepper::new(spec)?;
  par_map(n, workers, |i| {
    let mut y = x.to_vec();
    stepper.advance(&mut y, t, &mut path_rng(seed, i as u64))?;
    Ok(y)
  })
  .into_iter()
  .collect()
}
