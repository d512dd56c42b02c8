//! Path serialization: CSV `t,x_1..x_d,M_t` and a little-endian binary trace.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::io::{csv_document, Provenance};

use super::PathRecord;

const MAGIC: &[u8; 8] = b"LILTRACE";
const VERSION: u32 = 1;

/// CSV rendering of a path.
pub fn path_csv(path: &PathRecord, prov: Option<&Provenance>) -> String {
  let d = path.dim();
  let mut header = String::from("t");
  for i in 1..=d {
    header.push_str(&format!(",x_{i}"));
  }
  header.push_str(",M_t");
  let rows: Vec<Vec<f64>> = (0..path.len())
    .map(|k| {
      let mut row = Vec::with_capacity(d + 2);
      row.push(path.times[k]);
      row.extend_from_slice(&path.positions[k]);
      row.push(path.running_sup[k]);
      row
    })
    .collect();
  csv_document(prov, &header, &rows)
}

/// Decoded binary trace: spec hash plus paths.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTrace {
  pub spec_hash: String,
  pub paths: Vec<PathRecord>,
}

/// Layout: magic, `u32` version, `u32` d, 40-byte ASCII spec hash, `u64`
/// path count; per path `u64` length, start point, then rows
/// `t, x_1..x_d, ln M_t`. All numbers little-endian.
pub fn write_binary_trace<W: Write>(mut w: W, spec_hash: &str, paths: &[PathRecord]) -> Result<()> {
  let d = paths.first().map_or(0, |p| p.dim());
  let mut hash = [b'0'; 40];
  let hb = spec_hash.as_bytes();
  hash[..hb.len().min(40)].copy_from_slice(&hb[..hb.len().min(40)]);
  w.write_all(MAGIC)?;
  w.write_all(&VERSION.to_le_bytes())?;
  w.write_all(&(d as u32).to_le_bytes())?;
  w.write_all(&hash)?;
  w.write_all(&(paths.len() as u64).to_le_bytes())?;
  for p in paths {
    if p.dim() != d {
      return Err(Error::InvalidArgument("paths of different dimensions".into()));
    }
    w.write_all(&(p.len() as u64).to_le_bytes())?;
    for v in &p.start {
      w.write_all(&v.to_le_bytes())?;
    }
    for k in 0..p.len() {
      w.write_all(&p.times[k].to_le_bytes())?;
      for v in &p.positions[k] {
        w.write_all(&v.to_le_bytes())?;
      }
      w.write_all(&p.ln_running_sup[k].to_le_bytes())?;
    }
  }
  Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
  let mut b = [0u8; 4];
  r.read_exact(&mut b)?;
  Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
  let mut b = [0u8; 8];
  r.read_exact(&mut b)?;
  Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
  let mut b = [0u8; 8];
  r.read_exact(&mut b)?;
  Ok(f64::from_le_bytes(b))
}

pub fn read_binary_trace<R: Read>(mut r: R) -> Result<BinaryTrace> {
  let mut magic = [0u8; 8];
  r.read_exact(&mut magic)?;
  if &magic != MAGIC {
    return Err(Error::Parse("not a path trace".into()));
  }
  let version = read_u32(&mut r)?;
  if version != VERSION {
    return Err(Error::Parse(format!("unsupported trace version {version}")));
  }
  let d = read_u32(&mut r)? as usize;
  let mut hash = [0u8; 40];
  r.read_exact(&mut hash)?;
  let spec_hash = String::from_utf8(hash.to_vec()).map_err(|e| Error::Parse(e.to_string()))?;
  let n = read_u64(&mut r)?;
  let mut paths = Vec::new();
  for _ in 0..n {
    let len = read_u64(&mut r)? as usize;
    let start = (0..d).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let mut p = PathRecord::new(start);
    for _ in 0..len {
      let t = read_f64(&mut r)?;
      let x = (0..d).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
      let ln_m = read_f64(&mut r)?;
      p.push(t, x, ln_m);
    }
    paths.push(p);
  }
  Ok(BinaryTrace { spec_hash, paths })
}
