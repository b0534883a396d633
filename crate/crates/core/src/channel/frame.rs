use serde::{Deserialize, Serialize};

use crate::codespace::SignalVector;

use super::ChannelError;

/// Signal vectors in transmission order, all of one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFrame {
    dimension: usize,
    vectors: Vec<SignalVector>,
}

impl SignalFrame {
    pub fn new(dimension: usize, vectors: Vec<SignalVector>) -> Result<Self, ChannelError> {
        if let Some(v) = vectors.iter().find(|v| v.dimension() != dimension) {
            return Err(ChannelError::DimensionMismatch {
                expected: dimension,
                found: v.dimension(),
            });
        }
        Ok(SignalFrame { dimension, vectors })
    }

    pub fn empty(dimension: usize) -> Self {
        SignalFrame {
            dimension,
            vectors: Vec::new(),
        }
    }

    /// One-dimensional frame of 0/1 values, most significant first.
    pub fn from_bits(bits: &[u8]) -> Self {
        SignalFrame {
            dimension: 1,
            vectors: bits.iter().map(|&b| SignalVector::from_bits(&[b])).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[SignalVector] {
        &self.vectors
    }

    pub(crate) fn vectors_mut(&mut self) -> &mut Vec<SignalVector> {
        &mut self.vectors
    }

    pub fn push(&mut self, v: SignalVector) -> Result<(), ChannelError> {
        if v.dimension() != self.dimension {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dimension,
                found: v.dimension(),
            });
        }
        self.vectors.push(v);
        Ok(())
    }

    /// Components flattened in transmission order.
    pub fn components(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.vectors.iter().flat_map(|v| v.components().iter().copied())
    }

    /// One vector per line, in signal-literal form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vectors {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ChannelError> {
        let vectors = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<SignalVector>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ChannelError::Parse(e.to_string()))?;
        let dimension = vectors.first().map_or(1, SignalVector::dimension);
        SignalFrame::new(dimension, vectors)
    }
}
