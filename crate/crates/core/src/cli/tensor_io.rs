//! The `GST1` binary tensor format.
//!
//! Layout: magic `GST1`, version (u32 LE), rank (u32 LE), `rank` dims
//! (u32 LE each), dtype tag (u8: 0 = f32, 1 = f64), row-major payload.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GST1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32 = 0,
    F64 = 1,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            t => Err(Error::UnsupportedDtype(t)),
        }
    }
}

/// A dense row-major tensor held in 64-bit precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!("dims {dims:?} hold {n} values, got {}", data.len())));
        }
        Ok(Tensor { dims, data })
    }

    pub fn scalar(v: f64) -> Self {
        Tensor { dims: Vec::new(), data: vec![v] }
    }

    pub fn encode(&self, dtype: Dtype) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + 4 * self.dims.len() + dtype.size() * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out.push(dtype as u8);
        for &v in &self.data {
            match dtype {
                Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
        out
    }

    /// Decodes one tensor from the front of `bytes`, returning it with the
    /// number of bytes consumed.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Self, Dtype, usize)> {
        let mut at = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            if bytes.len() < at + n {
                return Err(Error::TruncatedPayload { expected: at + n, got: bytes.len() });
            }
            let s = &bytes[at..at + n];
            at += n;
            Ok(s)
        };
        if take(4).map_err(|_| Error::BadMagic)? != MAGIC {
            return Err(Error::BadMagic);
        }
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
        let version = u32_at(take(4)?);
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let rank = u32_at(take(4)?) as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(u32_at(take(4)?) as usize);
        }
        let dtype = Dtype::from_tag(take(1)?[0])?;
        let n: usize = dims.iter().product();
        let payload = take(n * dtype.size())?;
        let data = match dtype {
            Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4")) as f64).collect(),
            Dtype::F64 => payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8"))).collect(),
        };
        Ok((Tensor { dims, data }, dtype, at))
    }

    pub fn decode(bytes: &[u8]) -> Result<(Self, Dtype)> {
        let (t, d, used) = Self::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err(Error::ShapeMismatch(format!("{} trailing bytes after tensor", bytes.len() - used)));
        }
        Ok((t, d))
    }
}

pub fn write_tensor(path: &Path, t: &Tensor, dtype: Dtype) -> Result<()> {
    std::fs::write(path, t.encode(dtype))?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<(Tensor, Dtype)> {
    Tensor::decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_is_21_bytes() {
        let b = Tensor::scalar(3.5).encode(Dtype::F64);
        assert_eq!(b.len(), 21);
        assert_eq!(Tensor::decode(&b).unwrap().0, Tensor::scalar(3.5));
    }

    #[test]
    fn empty_payload() {
        let t = Tensor::new(vec![3, 0], vec![]).unwrap();
        let b = t.encode(Dtype::F32);
        assert_eq!(Tensor::decode(&b).unwrap().0, t);
    }

    #[test]
    fn corrupt_headers() {
        let mut b = Tensor::new(vec![2], vec![1.0, 2.0]).unwrap().encode(Dtype::F64);
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(Tensor::decode(&bad), Err(Error::BadMagic)));
        let mut v2 = b.clone();
        v2[4] = 2;
        assert!(matches!(Tensor::decode(&v2), Err(Error::UnsupportedVersion(2))));
        let mut dt = b.clone();
        dt[16] = 7;
        assert!(matches!(Tensor::decode(&dt), Err(Error::UnsupportedDtype(7))));
        b.truncate(b.len() - 3);
        assert!(matches!(Tensor::decode(&b), Err(Error::TruncatedPayload { .. })));
    }
}
