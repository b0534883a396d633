//! Composable, seeded error models and the frames they corrupt.

mod frame;
mod model;
mod rng;

use thiserror::Error;

pub use frame::SignalFrame;
pub use model::{compose, ErrorModel, Permutation};
pub use rng::TrialRng;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("compose needs at least one model")]
    EmptyCompose,
    #[error("{path}: {reason}")]
    InvalidParameter { path: String, reason: String },
    #[error("value {value} is not a symbol of a {size}-symbol alphabet")]
    OutsideAlphabet { value: f64, size: usize },
    #[error("not a bijection: {0:?}")]
    NotABijection(Vec<usize>),
    #[error("parse error: {0}")]
    Parse(String),
}
