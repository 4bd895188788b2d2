//! `CBF1` field tensor files.
//!
//! Layout (little-endian): magic `43 42 46 31`, `u32` height, `u32` width,
//! `u32` channels, then `height * width * channels` `f32` values, row-major
//! with the channel index varying fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};

pub const MAGIC: [u8; 4] = *b"CBF1";
const HEADER_LEN: usize = 16;

/// A decoded tensor before it is interpreted as a scalar or vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub values: Vec<f32>,
}

pub fn encode(height: usize, width: usize, channels: usize, values: &[f32]) -> Vec<u8> {
    assert_eq!(values.len(), height * width * channels);
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * values.len());
    out.extend_from_slice(&MAGIC);
    for dim in [height, width, channels] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_scalar(field: &ScalarField) -> Vec<u8> {
    encode(field.height(), field.width(), 1, field.data())
}

pub fn encode_vector(field: &VectorField) -> Vec<u8> {
    let flat: Vec<f32> = field.data().iter().flat_map(|v| *v).collect();
    encode(field.height(), field.width(), 2, &flat)
}

/// `origin` only labels errors.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<Tensor> {
    let corrupt = |reason: String| Error::CorruptFile {
        path: origin.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(corrupt(format!("bad magic {:02x?}", &bytes[..4])));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (height, width, channels) = (word(4), word(8), word(12));
    let count = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| corrupt("dimension overflow".into()))?;
    if height == 0 || width == 0 || channels == 0 {
        return Err(corrupt(format!(
            "zero dimension {height}x{width}x{channels}"
        )));
    }
    if bytes.len() != HEADER_LEN + 4 * count {
        return Err(corrupt(format!(
            "{height}x{width}x{channels} needs {} payload bytes, found {}",
            4 * count,
            bytes.len() - HEADER_LEN
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Tensor {
        height,
        width,
        channels,
        values,
    })
}

impl Tensor {
    pub fn into_scalar(self, origin: &Path) -> Result<ScalarField> {
        if self.channels != 1 {
            return Err(Error::CorruptFile {
                path: origin.to_path_buf(),
                reason: format!("expected 1 channel, found {}", self.channels),
            });
        }
        ScalarField::from_vec(self.height, self.width, self.values)
    }

    pub fn into_vector(self, origin: &Path) -> Result<VectorField> {
        if self.channels != 2 {
            return Err(Error::CorruptFile {
                path: origin.to_path_buf(),
                reason: format!("expected 2 channels, found {}", self.channels),
            });
        }
        let data = self.values.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        VectorField::from_vec(self.height, self.width, data)
    }
}

pub fn read(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    read(path)?.into_scalar(path)
}

pub fn read_vector(path: &Path) -> Result<VectorField> {
    read(path)?.into_vector(path)
}

pub fn write_scalar(path: &Path, field: &ScalarField) -> Result<()> {
    fs::write(path, encode_scalar(field)).map_err(|e| Error::io(path, e))
}

pub fn write_vector(path: &Path, field: &VectorField) -> Result<()> {
    fs::write(path, encode_vector(field)).map_err(|e| Error::io(path, e))
}
