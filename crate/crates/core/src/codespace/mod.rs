//! Codebooks in signal space and decoding by classification.
//!
//! A codebook is a set of labeled prototype vectors. Decoding a received
//! vector means finding the nearest prototype; when the nearest one is too
//! far away, or several tie, the decoder only reports the error.

mod budget;
mod codebook;
mod decode;
mod reliability;

use thiserror::Error;

pub use budget::{
    adaptive_recode, majority_residual, redundancy_budget, repetition_for, RecodePlan,
    RedundancyBudget, MAX_REPETITION,
};
pub use codebook::{
    hamming74_codebook, Codebook, Prototype, Radius, SignalVector, SymbolId, HAMMING74_WORDS,
};
pub use decode::{distance_table, map_decode, nn_decode, DecodeOutcome};
pub use reliability::{
    reliability_profile, ReliabilityClass, ReliabilityProfile, ReliabilityThresholds,
};

#[derive(Debug, Error, PartialEq)]
pub enum CodespaceError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("codebook dimension must be positive")]
    ZeroDimension,
    #[error("codebook has no prototypes")]
    EmptyCodebook,
    #[error("symbol {0} appears more than once")]
    DuplicateSymbol(SymbolId),
    #[error("symbol {0} repeats another prototype's vector")]
    DuplicateVector(SymbolId),
    #[error("symbol {0} has a non-finite component")]
    NonFiniteComponent(SymbolId),
    #[error("every component of the signal is erased")]
    AllErased,
    #[error("expected {expected} priors, found {found}")]
    PriorLength { expected: usize, found: usize },
    #[error("priors must be finite and non-negative")]
    InvalidPrior,
    #[error("every prior is zero")]
    AllPriorsZero,
    #[error("prior weight must be finite and non-negative, got {0}")]
    InvalidWeight(f64),
    #[error("net bits must be positive")]
    ZeroNetBits,
    #[error("gross bits {gross} below net bits {net}")]
    GrossBelowNet { net: u64, gross: u64 },
    #[error("probability out of range: {0}")]
    InvalidProbability(f64),
    #[error("symbol {symbol:?} with error rate {rate} cannot be protected by majority vote")]
    Unprotectable { symbol: String, rate: f64 },
    #[error("no trials observed")]
    NoTrials,
    #[error("{flips} flips exceed {trials} trials")]
    FlipsExceedTrials { flips: u64, trials: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}
