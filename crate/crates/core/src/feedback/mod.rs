//! Feedback channels: the sender watches what the receiver made of its
//! messages and sends only the difference, pre-distorted by its estimate of
//! the receiver's error function.

mod model;
mod scenarios;
mod session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::{identify_error_model, ErrorFunction, Family, Identification, InverseModel};
pub use scenarios::{
    apply_patch, resolve_ambiguity, run_adapter_scenario, ram_monitor, AdapterRound, Patch, Resolution,
    DEFAULT_RESOLVE_THRESHOLD,
};
pub use session::{log_csv, RoundLog, Session, SessionConfig};

/// Widest magnitude a box may carry, in bits.
pub const MAX_MAGNITUDE_BITS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum FeedbackError {
    #[error("quantization step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("value {value} needs more than {MAX_MAGNITUDE_BITS} magnitude bits at step {q}")]
    Overflow { value: f64, q: f64 },
    #[error("malformed box payload")]
    MalformedBox,
    #[error("error function is not invertible: {0}")]
    NonInvertible(String),
    #[error("value {0} is not a symbol of the remap alphabet")]
    OutsideAlphabet(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("adapter scenario needs a permutation of 4 states, got {0} entries")]
    WrongAlphabet(usize),
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("no symbol in the alphabet completes {0:?}")]
    NoCompletion(String),
    #[error("invalid session parameter: {0}")]
    InvalidParameter(String),
}

/// The difference the sender still has to explain away.
pub fn delta(reference: f64, feedback: f64) -> f64 {
    reference - feedback
}

/// A transmission slot that crosses the link every round, full or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualBox {
    pub capacity: usize,
    pub payload: Vec<u8>,
}

impl VirtualBox {
    pub fn empty() -> Self {
        VirtualBox { capacity: MAX_MAGNITUDE_BITS + 1, payload: Vec::new() }
    }

    pub fn fill(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn payload_string(&self) -> String {
        self.payload.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

/// Quantizes `d` to a multiple of `q` and writes it as a sign bit (1 for
/// negative) followed by the shortest binary magnitude, most significant
/// bit first. Values that round to zero produce an empty box.
pub fn modulate(d: f64, q: f64) -> Result<VirtualBox, FeedbackError> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(FeedbackError::InvalidStep(q));
    }
    let steps = (d.abs() / q).round();
    if !steps.is_finite() || steps >= 2f64.powi(MAX_MAGNITUDE_BITS as i32) {
        return Err(FeedbackError::Overflow { value: d, q });
    }
    let m = steps as u64;
    if m == 0 {
        return Ok(VirtualBox::empty());
    }
    let width = 64 - m.leading_zeros() as usize;
    let mut payload = Vec::with_capacity(width + 1);
    payload.push(u8::from(d < 0.0));
    payload.extend((0..width).rev().map(|i| ((m >> i) & 1) as u8));
    Ok(VirtualBox { capacity: MAX_MAGNITUDE_BITS + 1, payload })
}

pub fn demodulate(b: &VirtualBox, q: f64) -> Result<f64, FeedbackError> {
    let Some((&sign, magnitude)) = b.payload.split_first() else {
        return Ok(0.0);
    };
    if magnitude.is_empty() || magnitude.len() > MAX_MAGNITUDE_BITS || b.payload.iter().any(|&x| x > 1) {
        return Err(FeedbackError::MalformedBox);
    }
    let m = magnitude.iter().fold(0u64, |acc, &x| (acc << 1) | u64::from(x));
    let v = m as f64 * q;
    Ok(if sign == 1 { -v } else { v })
}
