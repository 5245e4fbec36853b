//! Binary state checkpoints.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size      | field                                          |
//! |--------|-----------|------------------------------------------------|
//! | 0      | 8         | magic `DKSTATE\0`                              |
//! | 8      | 4         | format version (u32, currently 1)              |
//! | 12     | 1         | basis kind: 0 = full, 1 = subensemble          |
//! | 13     | 3         | zero padding                                   |
//! | 16     | 8         | n_max (u64)                                    |
//! | 24     | 8         | number of spin ladders G (u64)                 |
//! | 32     | variable  | per ladder: size n (u64), then n site indices (u64 each) |
//! | …      | 8         | dimension D (u64)                              |
//! | …      | 8         | time in seconds (f64)                          |
//! | …      | 16·D      | amplitudes as (re f64, im f64) pairs           |
//! | …      | 32        | SHA-256 of every preceding byte                |

use super::{EngineError, StateVector};
use crate::{Basis, BasisKind, C64};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"DKSTATE\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn encode_checkpoint(state: &StateVector) -> Vec<u8> {
    let b = &state.basis;
    let mut out = Vec::with_capacity(64 + 16 * state.dim());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(match b.kind() {
        BasisKind::Full => 0,
        BasisKind::Subensemble => 1,
    });
    out.extend_from_slice(&[0u8; 3]);
    out.extend_from_slice(&(b.n_max() as u64).to_le_bytes());
    out.extend_from_slice(&(b.n_groups() as u64).to_le_bytes());
    for g in b.groups() {
        out.extend_from_slice(&(g.len() as u64).to_le_bytes());
        for &s in g {
            out.extend_from_slice(&(s as u64).to_le_bytes());
        }
    }
    out.extend_from_slice(&(state.dim() as u64).to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    for a in &state.amplitudes {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], EngineError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| EngineError::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, EngineError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, EngineError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize, EngineError> {
        usize::try_from(self.u64()?).map_err(|_| EngineError::Checkpoint("value does not fit usize".into()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<StateVector, EngineError> {
    if bytes.len() < 32 + 16 {
        return Err(EngineError::Checkpoint("file too short".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(EngineError::Checkpoint("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(EngineError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(EngineError::Checkpoint(format!("unsupported version {version}")));
    }
    let kind = r.take(4)?[0];
    let n_max = r.usize()?;
    let n_groups = r.usize()?;
    let mut groups = Vec::new();
    for _ in 0..n_groups {
        let n = r.usize()?;
        let g = (0..n).map(|_| r.usize()).collect::<Result<Vec<_>, _>>()?;
        groups.push(g);
    }
    let basis = match kind {
        0 => {
            if groups.iter().enumerate().any(|(i, g)| g != &[i]) {
                return Err(EngineError::Checkpoint("full basis with non-singleton ladders".into()));
            }
            Basis::full(n_groups, n_max)
        }
        1 => Basis::subensemble(groups, n_max),
        k => return Err(EngineError::Checkpoint(format!("unknown basis kind {k}"))),
    };
    let dim = r.usize()?;
    if basis.checked_dim() != Some(dim) {
        return Err(EngineError::Checkpoint("dimension does not match the basis".into()));
    }
    let time = r.f64()?;
    let mut amplitudes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let re = r.f64()?;
        let im = r.f64()?;
        amplitudes.push(C64::new(re, im));
    }
    if r.pos != body.len() {
        return Err(EngineError::Checkpoint("trailing bytes".into()));
    }
    Ok(StateVector { amplitudes, basis, time })
}

pub fn write_checkpoint(path: &Path, state: &StateVector) -> Result<(), EngineError> {
    std::fs::write(path, encode_checkpoint(state))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<StateVector, EngineError> {
    decode_checkpoint(&std::fs::read(path)?)
}
