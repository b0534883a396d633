//! The three-layer demonstration stack: Hamming-coded bits, repaired tag
//! framing, and a forgiving yes/no vocabulary on top.

use serde::{Deserialize, Serialize};

use crate::channel::{ErrorModel, TrialRng};

use super::{semantic_decode, Profile, ResidualReport, Stack, StackError, Symbol};

/// What the sender types.
pub const CASE1_WORDS: [&str; 10] = ["yess", "ja", "no", "YES", "nope", "es", "nein", "ye", "yes", "NO"];
pub const CASE1_SEED: u64 = 11;
pub const CASE1_FLIP_P: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case1Run {
    pub seed: u64,
    pub p: f64,
    pub sent: Vec<String>,
    /// Booleans the sender meant.
    pub truth: Vec<bool>,
    /// `None` where the stack gave up on a symbol.
    pub received: Vec<Option<bool>>,
    pub report: ResidualReport,
}

impl Case1Run {
    pub fn matches_truth(&self) -> bool {
        self.received.len() == self.truth.len() && self.received.iter().zip(&self.truth).all(|(r, t)| *r == Some(*t))
    }
}

/// Builds the balanced stack and sends [`CASE1_WORDS`] through random bit
/// flips with probability `p`.
pub fn scenario_case1(seed: u64, p: f64) -> Result<(Stack, Case1Run), StackError> {
    let stack = Stack::profile(Profile::Balanced);
    let message: Vec<Symbol> = CASE1_WORDS.iter().map(|w| Symbol::Word(w.to_string())).collect();
    let truth = CASE1_WORDS
        .iter()
        .map(|w| semantic_decode(w, true).0.expect("vocabulary words decode"))
        .collect();
    let t = stack.transmit(&message, &ErrorModel::RandomFlip { p }, &TrialRng::new(seed, 0))?;
    let received = t
        .received
        .iter()
        .map(|s| match s {
            Symbol::Bool(b) => Some(*b),
            _ => None,
        })
        .collect();
    let run = Case1Run {
        seed,
        p,
        sent: CASE1_WORDS.iter().map(|w| w.to_string()).collect(),
        truth,
        received,
        report: t.report,
    };
    Ok((stack, run))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_demo_recovers_every_answer() {
        let (stack, run) = scenario_case1(CASE1_SEED, CASE1_FLIP_P).unwrap();
        assert_eq!(stack.layers().len(), 3);
        assert!(run.matches_truth(), "{run:?}");
        let bottom = run.report.layers.last().unwrap();
        assert!(bottom.corrected > 0);
        assert!(run.report.layers.iter().all(|l| l.is_conserved()));
    }

    #[test]
    fn noiseless_demo_is_exact() {
        let (_, run) = scenario_case1(0, 0.0).unwrap();
        assert!(run.matches_truth());
        assert_eq!(run.truth, vec![true, true, false, true, false, true, false, true, true, false]);
    }
}
