use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
  #[error("too few samples: need at least {needed}, got {got}")]
  TooFewSamples { needed: usize, got: usize },
  #[error("values not strictly increasing at index {index}")]
  NonMonotone { index: usize },
  #[error("{what} = {value} outside [{lo}, {hi}]")]
  OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },
  #[error("domain mismatch: {0}")]
  DomainMismatch(String),
  #[error("quadrature failed to reach tolerance: {0}")]
  QuadratureFailure(String),
  #[error("not a Lévy measure: {0}")]
  NonLevy(String),
  #[error("insufficient samples: {0}")]
  InsufficientSamples(String),
  #[error("exact increments unavailable for {0}; use the frozen-coefficient scheme")]
  UnsupportedExact(String),
  #[error("step too coarse: {0}")]
  StepTooCoarse(String),
  #[error("unsupported: {0}")]
  Unsupported(String),
  #[error("invalid argument: {0}")]
  InvalidArgument(String),
  #[error("moment check failed: {0}")]
  MomentCheckFailed(String),
  #[error("censoring rate {rate:.4} exceeds {limit}")]
  ExcessCensoring { rate: f64, limit: f64 },
  #[error("insufficient events: {0}")]
  InsufficientEvents(String),
  #[error("insufficient survivors: {0}")]
  InsufficientSurvivors(String),
  #[error("running supremum {value} outside tabulated scale range [{lo}, {hi}]")]
  OutOfDomain { value: f64, lo: f64, hi: f64 },
  #[error("curves do not share grid and direction")]
  MixedGrids,
  #[error("malformed data: {0}")]
  Parse(String),
  #[error(transparent)]
  Io(#[from] std::io::Error),
}
