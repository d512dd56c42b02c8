use std::fmt;

/// Failures of the runner, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
  Config { field: Option<String>, line: Option<usize>, msg: String },
  UnknownPreset(String),
  Io(std::io::Error),
  Runtime(lil_lab::Error),
}

impl CliError {
  pub fn exit_code(&self) -> i32 {
    match self {
      CliError::Config { .. } | CliError::UnknownPreset(_) => 2,
      CliError::Io(_) | CliError::Runtime(_) => 3,
    }
  }
}

impl fmt::Display for CliError {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match self {
      CliError::Config { field, line, msg } => {
        write!(f, "config error")?;
        if let Some(field) = field {
          write!(f, " in field `{field}`")?;
        }
        if let Some(line) = line {
          write!(f, " at line {line}")?;
        }
        write!(f, ": {msg}")
      }
      CliError::UnknownPreset(name) => write!(f, "unknown preset `{name}`"),
      CliError::Io(e) => write!(f, "i/o failure: {e}"),
      CliError::Runtime(e) => write!(f, "{e}"),
    }
  }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
  fn from(e: std::io::Error) -> Self {
    CliError::Io(e)
  }
}

impl From<lil_lab::Error> for CliError {
  fn from(e: lil_lab::Error) -> Self {
    match e {
      lil_lab::Error::Io(e) => CliError::Io(e),
      e => CliError::Runtime(e),
    }
  }
}
