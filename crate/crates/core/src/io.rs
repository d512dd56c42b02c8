//! Atomic artifact writes and the CSV header convention.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Provenance carried in the leading `#` lines of every CSV artifact.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
  pub config_hash: String,
  pub spec_hash: String,
  pub seed: u64,
}

impl Provenance {
  pub fn header_lines(&self) -> String {
    format!("# config_hash={}\n# spec_hash={}\n# seed={}\n", self.config_hash, self.spec_hash, self.seed)
  }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
  if let Some(dir) = path.parent() {
    if !dir.as_os_str().is_empty() {
      fs::create_dir_all(dir)?;
    }
  }
  let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
  let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
  {
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
  }
  fs::rename(&tmp, path)?;
  Ok(())
}

/// Renders a CSV document: provenance comments, header, rows.
pub fn csv_document(prov: Option<&Provenance>, header: &str, rows: &[Vec<f64>]) -> String {
  let mut out = String::new();
  if let Some(p) = prov {
    out.push_str(&p.header_lines());
  }
  out.push_str(header);
  out.push('\n');
  for row in rows {
    let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
  }
  out
}

/// Shortest round-trip representation; keeps bodies byte-stable.
pub fn format_float(v: f64) -> String {
  if v.is_nan() {
    "nan".into()
  } else if v.is_infinite() {
    if v > 0.0 {
      "inf".into()
    } else {
      "-inf".into()
    }
  } else {
    format!("{v:?}")
  }
}

/// Strips `#` comment lines; returns the header and parsed numeric rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
  let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
  let header: Vec<String> = lines
    .next()
    .ok_or_else(|| crate::Error::Parse("empty csv".into()))?
    .split(',')
    .map(|s| s.trim().to_string())
    .collect();
  let mut rows = Vec::new();
  for (i, line) in lines.enumerate() {
    let row = line
      .split(',')
      .map(|c| c.trim().parse::<f64>().map_err(|e| crate::Error::Parse(format!("row {}: {e}", i + 2))))
      .collect::<Result<Vec<f64>>>()?;
    if row.len() != header.len() {
      return Err(crate::Error::Parse(format!("row {} has {} cells, header has {}", i + 2, row.len(), header.len())));
    }
    rows.push(row);
  }
  Ok((header, rows))
}

/// Body of a CSV document without provenance comments.
pub fn csv_body(text: &str) -> String {
  text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn csv_round_trip() {
    let prov = Provenance { config_hash: "abc".into(), spec_hash: "def".into(), seed: 3 };
    let doc = csv_document(Some(&prov), "r,value", &[vec![0.1, 2.0], vec![1.0, 3.5]]);
    assert!(doc.starts_with("# config_hash=abc"));
    let (h, rows) = parse_csv(&doc).unwrap();
    assert_eq!(h, vec!["r", "value"]);
    assert_eq!(rows[1], vec![1.0, 3.5]);
  }

  #[test]
  fn atomic_write_replaces() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sub/a.txt");
    write_atomic(&p, b"one").unwrap();
    write_atomic(&p, b"two").unwrap();
    assert_eq!(fs::read_to_string(&p).unwrap(), "two");
    assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
  }
}
