//! Chunk enumeration, chained checksums and length-prefixed records.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::FramingError;

/// Reflected CRC-32 polynomial (0x04C11DB7 bit-reversed).
const POLY_REFLECTED: u32 = 0xEDB8_8320;

/// The field element `1` in reflected bit order.
pub const GF_ONE: u32 = 0x8000_0000;

pub fn crc32(payload: &[u8]) -> u32 {
    crc32fast::hash(payload)
}

/// Multiplication in GF(2^32) modulo the CRC-32 polynomial, operands in
/// reflected bit order (bit 31 holds the x^0 coefficient).
pub fn gf32_mul(a: u32, b: u32) -> u32 {
    let mut product = 0u32;
    let mut shifted = b;
    for bit in (0..32).rev() {
        if a & (1 << bit) != 0 {
            product ^= shifted;
        }
        // shifted *= x
        shifted = if shifted & 1 != 0 {
            (shifted >> 1) ^ POLY_REFLECTED
        } else {
            shifted >> 1
        };
    }
    product
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub index: u32,
    pub payload: Vec<u8>,
    pub crc: u32,
}

impl Chunk {
    pub fn new(index: u32, payload: Vec<u8>) -> Self {
        let crc = crc32(&payload);
        Chunk { index, payload, crc }
    }

    /// Whether the stored checksum still matches the payload.
    pub fn is_intact(&self) -> bool {
        crc32(&self.payload) == self.crc
    }
}

/// Accumulated order-sensitive tag over a chunk sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainTag(pub u32);

pub fn split_chunks(message: &[u8], chunk_size: usize) -> Result<Vec<Chunk>, FramingError> {
    if chunk_size == 0 {
        return Err(FramingError::ZeroChunkSize);
    }
    Ok(message
        .chunks(chunk_size)
        .enumerate()
        .map(|(i, c)| Chunk::new(i as u32, c.to_vec()))
        .collect())
}

pub fn join_chunks(chunks: &[Chunk]) -> Vec<u8> {
    chunks.iter().flat_map(|c| c.payload.iter().copied()).collect()
}

/// `c_0 = crc_0`, `c_i = (c_{i-1} + 1) * crc_i` in GF(2^32).
///
/// A bare running product would be commutative and blind to reordering; the
/// `+ 1` makes each step an affine map, so the composition depends on order.
pub fn chain_crc(chunks: &[Chunk]) -> Result<ChainTag, FramingError> {
    let (first, rest) = chunks.split_first().ok_or(FramingError::EmptyChain)?;
    let tag = rest
        .iter()
        .fold(first.crc, |acc, c| gf32_mul(acc ^ GF_ONE, c.crc));
    Ok(ChainTag(tag))
}

/// Indices in `0..declared_count` that never arrived, ascending.
pub fn detect_omission(received: &[Chunk], declared_count: u32) -> Result<Vec<u32>, FramingError> {
    let mut seen = BTreeSet::new();
    for c in received {
        if c.index >= declared_count {
            return Err(FramingError::IndexOutOfRange {
                index: c.index,
                declared: declared_count,
            });
        }
        if !seen.insert(c.index) {
            return Err(FramingError::DuplicateIndex(c.index));
        }
    }
    Ok((0..declared_count).filter(|i| !seen.contains(i)).collect())
}

/// Record layout: index (u32 BE), length (u32 BE), payload, crc (u32 BE).
pub fn write_records(chunks: &[Chunk]) -> Vec<u8> {
    let mut out = Vec::new();
    for c in chunks {
        out.extend_from_slice(&c.index.to_be_bytes());
        out.extend_from_slice(&(c.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&c.payload);
        out.extend_from_slice(&c.crc.to_be_bytes());
    }
    out
}

pub fn read_records(mut bytes: &[u8]) -> Result<Vec<Chunk>, FramingError> {
    fn take_u32(bytes: &mut &[u8], offset: usize) -> Result<u32, FramingError> {
        let (head, tail) = bytes
            .split_first_chunk::<4>()
            .ok_or(FramingError::TruncatedRecord { offset })?;
        *bytes = tail;
        Ok(u32::from_be_bytes(*head))
    }
    let total = bytes.len();
    let mut chunks = Vec::new();
    while !bytes.is_empty() {
        let offset = total - bytes.len();
        let index = take_u32(&mut bytes, offset)?;
        let len = take_u32(&mut bytes, offset)? as usize;
        if bytes.len() < len {
            return Err(FramingError::TruncatedRecord { offset });
        }
        let (payload, tail) = bytes.split_at(len);
        bytes = tail;
        let crc = take_u32(&mut bytes, offset)?;
        chunks.push(Chunk {
            index,
            payload: payload.to_vec(),
            crc,
        });
    }
    Ok(chunks)
}
