//! Memory patching, the driver/driven automaton pair, and completing an
//! ambiguous prefix from context.

use serde::{Deserialize, Serialize};

use crate::channel::Permutation;
use crate::stack::ContextPool;

use super::{identify_error_model, ErrorFunction, Family, FeedbackError};

/// Bits to flip to restore a memory image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub positions: Vec<usize>,
    /// One bit per position: the flip itself.
    pub corrective_bits: usize,
    /// Bits needed to name the positions.
    pub address_bits: usize,
}

impl Patch {
    pub fn total_bits(&self) -> usize {
        self.corrective_bits + self.address_bits
    }
}

/// Compares `memory` against `backup` (both 0/1 per entry) and lists the
/// positions that differ.
pub fn ram_monitor(memory: &[u8], backup: &[u8]) -> Result<Patch, FeedbackError> {
    if memory.len() != backup.len() {
        return Err(FeedbackError::LengthMismatch { left: memory.len(), right: backup.len() });
    }
    let positions: Vec<usize> = (0..memory.len()).filter(|&i| memory[i] != backup[i]).collect();
    let width = if memory.len() <= 1 { 0 } else { (usize::BITS - (memory.len() - 1).leading_zeros()) as usize };
    Ok(Patch { corrective_bits: positions.len(), address_bits: positions.len() * width, positions })
}

pub fn apply_patch(memory: &mut [u8], patch: &Patch) {
    for &i in &patch.positions {
        memory[i] ^= 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterRound {
    pub round: usize,
    pub driver: usize,
    pub driven: usize,
    /// Cyclic distance between driver and driven states.
    pub lag: usize,
}

/// A driver automaton cycles through four states, one per round, and sends
/// each to a driven automaton through the symbol substitution `mapping`.
/// From round `install_at + 1` on, the receiver first passes what it gets
/// through an adapter built by probing the substitution.
pub fn run_adapter_scenario(
    mapping: &Permutation,
    rounds: usize,
    install_at: Option<usize>,
) -> Result<Vec<AdapterRound>, FeedbackError> {
    if mapping.len() != 4 {
        return Err(FeedbackError::WrongAlphabet(mapping.len()));
    }
    if rounds == 0 {
        return Err(FeedbackError::NoRounds);
    }
    let link = ErrorFunction::Remap { mapping: mapping.clone() };
    let adapter = match install_at {
        Some(_) => Some(identify_error_model(|x| link.apply(x), Family::Remap { alphabet: 4 })?.inverse),
        None => None,
    };
    (1..=rounds)
        .map(|round| {
            let driver = (round - 1) % 4;
            let mut received = link.apply(driver as f64)?;
            if let (Some(adapter), Some(at)) = (&adapter, install_at) {
                if round > at {
                    received = adapter.apply(received)?;
                }
            }
            let driven = received as usize;
            let d = (driver + 4 - driven) % 4;
            Ok(AdapterRound { round, driver, driven, lag: d.min(4 - d) })
        })
        .collect()
}

pub const DEFAULT_RESOLVE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    /// The context settles it: treat the missing part as an erasure.
    Completed { symbol: String },
    /// Ask the sender which of these suffixes was meant.
    RequestMore { suffixes: Vec<String> },
}

/// Completes `prefix` from the pool's alphabet. A single candidate is taken
/// as is; otherwise the pool's priors in its current context, renormalized
/// over the candidates, must reach `threshold` on one of them.
pub fn resolve_ambiguity(prefix: &str, pool: &ContextPool, threshold: f64) -> Result<Resolution, FeedbackError> {
    let priors = pool.priors(pool.previous());
    let candidates: Vec<(usize, &String)> =
        pool.alphabet().iter().enumerate().filter(|(_, s)| s.starts_with(prefix)).collect();
    match candidates.as_slice() {
        [] => return Err(FeedbackError::NoCompletion(prefix.to_string())),
        [(_, only)] => return Ok(Resolution::Completed { symbol: only.to_string() }),
        _ => {}
    }
    let mass: f64 = candidates.iter().map(|(i, _)| priors[*i]).sum();
    let (best, best_p) = candidates
        .iter()
        .map(|(i, s)| (*s, priors[*i] / mass))
        .fold((candidates[0].1, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if pool.observations() > 0 && best_p >= threshold {
        return Ok(Resolution::Completed { symbol: best.clone() });
    }
    Ok(Resolution::RequestMore {
        suffixes: candidates.iter().map(|(_, s)| s[prefix.len()..].to_string()).collect(),
    })
}
