//! A contextual code on the octagon: the legal successors of each state
//! are spread far apart, so an illegal reception can be snapped back.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ErrorModel, SignalFrame, TrialRng};

use crate::codespace::{distance_table, nn_decode, Codebook, DecodeOutcome, Prototype, Radius, SignalVector, SymbolId};

use super::StackError;

pub const STATE_NAMES: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

/// Eight states at the vertices of a regular octagon on the unit circle,
/// `a` at angle 0 and counterclockwise. State `s` may be followed by
/// `s + 2` (bit 0) or `s + 5` (bit 1), modulo 8; the context and both
/// followers are pairwise non-adjacent.
#[derive(Debug, Clone)]
pub struct ContextualCodebook {
    book: Codebook,
    followers: [[usize; 2]; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualStep {
    /// `None` when the two legal followers tie.
    pub bit: Option<u8>,
    pub state: Option<usize>,
    pub outcome: DecodeOutcome,
}

impl Default for ContextualCodebook {
    fn default() -> Self {
        Self::octagon()
    }
}

impl ContextualCodebook {
    pub fn octagon() -> Self {
        let prototypes = (0..8)
            .map(|k| {
                let angle = k as f64 * PI / 4.0;
                Prototype { symbol: SymbolId(k as u32 + 1), vector: vec![angle.cos(), angle.sin()] }
            })
            .collect();
        let book = Codebook::new(2, prototypes).expect("distinct vertices").with_radius(Radius::Unbounded);
        let followers = std::array::from_fn(|s| [(s + 2) % 8, (s + 5) % 8]);
        ContextualCodebook { book, followers }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.book
    }

    /// `[follower for bit 0, follower for bit 1]`
    pub fn followers(&self, state: usize) -> [usize; 2] {
        self.followers[state]
    }

    pub fn state_index(name: char) -> Option<usize> {
        STATE_NAMES.iter().position(|&c| c == name)
    }

    /// The noiseless signal for `state`.
    pub fn signal(&self, state: usize) -> SignalVector {
        SignalVector::from_values(&self.book.prototypes()[state].vector)
    }

    /// Next state after sending `bit` from `state`.
    pub fn encode(&self, state: usize, bit: u8) -> usize {
        self.followers[state][usize::from(bit & 1)]
    }
}

/// Steps between two states around the octagon.
fn steps(a: usize, b: usize) -> usize {
    let d = (a + 8 - b) % 8;
    d.min(8 - d)
}

/// Nearest neighbor over all eight states; an illegal winner is snapped to
/// the legal follower fewer octagon steps away. If the eight-way decision
/// ties, the two followers are compared directly.
pub fn contextual_decode(book: &ContextualCodebook, context: usize, signal: &SignalVector) -> Result<ContextualStep, StackError> {
    if context >= 8 {
        return Err(StackError::UnknownSymbol(context.to_string()));
    }
    let legal = book.followers(context);
    let decided = |state: usize, outcome: DecodeOutcome| {
        let bit = legal.iter().position(|&f| f == state).map(|b| b as u8);
        ContextualStep { bit, state: Some(state), outcome }
    };
    let table = distance_table(&book.book, signal)?;
    match nn_decode(&book.book, signal)? {
        DecodeOutcome::ExactMatch { symbol } | DecodeOutcome::Corrected { symbol, .. } => {
            let winner = symbol.0 as usize - 1;
            let outcome = nn_decode(&book.book, signal)?;
            if legal.contains(&winner) {
                return Ok(decided(winner, outcome));
            }
            // followers sit 3 steps apart, so at most one is nearest
            let snapped = if steps(winner, legal[0]) < steps(winner, legal[1]) { legal[0] } else { legal[1] };
            let distance = table[snapped].1;
            Ok(decided(snapped, DecodeOutcome::Corrected { symbol: SymbolId(snapped as u32 + 1), distance }))
        }
        _ => {
            let (d0, d1) = (table[legal[0]].1, table[legal[1]].1);
            if (d0 - d1).abs() <= 1e-12 * d0.max(d1) {
                return Ok(ContextualStep {
                    bit: None,
                    state: None,
                    outcome: DecodeOutcome::Ambiguous { symbols: legal.map(|s| SymbolId(s as u32 + 1)).to_vec() },
                });
            }
            let pick = if d0 < d1 { legal[0] } else { legal[1] };
            let distance = table[pick].1;
            Ok(decided(pick, DecodeOutcome::Corrected { symbol: SymbolId(pick as u32 + 1), distance }))
        }
    }
}

/// Context-free baseline: plain nearest neighbor over the eight states.
pub fn plain_octagon_decode(book: &ContextualCodebook, signal: &SignalVector) -> Result<Option<usize>, StackError> {
    Ok(nn_decode(&book.book, signal)?.symbol().map(|s| s.0 as usize - 1))
}

/// Paired error counts of contextual and plain decoding under the same noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualComparison {
    pub trials: u64,
    pub contextual_errors: u64,
    pub plain_errors: u64,
}

impl ContextualComparison {
    pub fn contextual_rate(&self) -> f64 {
        self.contextual_errors as f64 / self.trials as f64
    }

    pub fn plain_rate(&self) -> f64 {
        self.plain_errors as f64 / self.trials as f64
    }
}

/// Sends `trials` random steps (random context, random bit) with Gaussian
/// noise of deviation `sigma` per dimension. Each noisy signal is decoded
/// both with the correct context and by plain eight-way nearest neighbor.
pub fn compare_contextual(seed: u64, sigma: f64, trials: u64) -> Result<ContextualComparison, StackError> {
    let book = ContextualCodebook::octagon();
    let noise = ErrorModel::Gaussian { sigma };
    noise.validate()?;
    let mut result = ContextualComparison { trials, contextual_errors: 0, plain_errors: 0 };
    for t in 0..trials {
        let trial = TrialRng::new(seed, t);
        let mut rng = trial.fork(0).rng();
        let context = rng.random_range(0..8usize);
        let bit = rng.random_range(0..2u8);
        let sent = book.encode(context, bit);
        let frame = SignalFrame::new(2, vec![book.signal(sent)])?;
        let noisy = noise.apply(&frame, &trial.fork(1))?;
        let received = &noisy.vectors()[0];
        let step = contextual_decode(&book, context, received)?;
        result.contextual_errors += u64::from(step.bit != Some(bit));
        result.plain_errors += u64::from(plain_octagon_decode(&book, received)? != Some(sent));
    }
    Ok(result)
}
