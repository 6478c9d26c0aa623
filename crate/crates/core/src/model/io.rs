//! Model snapshot file format.
//!
//! One file: a compact JSON header line `{dims, version, segments}` followed
//! by every segment flattened row-major as little-endian 32-bit floats, in
//! the listed order. Reading and re-writing a file reproduces it bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dims, ParamSet, SEGMENT_NAMES};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    dims: Dims,
    version: u64,
    segments: Vec<String>,
}

pub fn to_bytes(params: &ParamSet) -> Result<Vec<u8>> {
    params.validate()?;
    let header = Header {
        dims: params.dims,
        version: params.version,
        segments: SEGMENT_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.reserve(params.dims.len() * 4);
    for v in params.values() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<ParamSet> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Usage("model file has no header line".into()))?;
    let header: Header = serde_json::from_slice(&bytes[..nl])?;
    if header.segments != SEGMENT_NAMES {
        return Err(Error::Usage(format!(
            "unexpected segment order {:?}",
            header.segments
        )));
    }
    let d = header.dims;
    let body = &bytes[nl + 1..];
    if body.len() != d.len() * 4 {
        return Err(Error::Shape(format!(
            "model body is {} bytes, dims {:?} need {}",
            body.len(),
            d,
            d.len() * 4
        )));
    }
    let mut values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
    let mut take = |n: usize| -> Vec<f64> { values.by_ref().take(n).collect() };
    let p = ParamSet {
        dims: d,
        version: header.version,
        w1: take(d.hidden * d.featdim),
        b1: take(d.hidden),
        w2: take(d.vocab * d.hidden),
        b2: take(d.vocab),
    };
    p.validate()?;
    Ok(p)
}

pub fn write_param_file(params: &ParamSet, path: &Path) -> Result<()> {
    let bytes = to_bytes(params)?;
    fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_param_file(path: &Path) -> Result<ParamSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    from_bytes(&bytes)
}
