//! Bit-by-bit MAP decoding with priors cascaded from a symbol-level pool,
//! compared against plain hard decisions on a Markov source.
//!
//! The context is a belief over the previous symbol, updated from the
//! received bits, rather than the previous decision: with a peaked source a
//! single wrong decision would otherwise drag every later prior with it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ErrorModel, SignalFrame, TrialRng};
use crate::codespace::{map_decode, Codebook, Radius, SignalVector};

use super::{ContextPool, StackError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorExperiment {
    pub seed: u64,
    /// Symbols used to fill the pool before decoding starts.
    pub training: usize,
    /// Symbols decoded and scored.
    pub symbols: usize,
    /// Crossover probability of the binary channel.
    pub p: f64,
    /// Probability that symbol `s` is followed by `s + 3 (mod 8)`; the rest
    /// is spread evenly over the other seven symbols.
    pub stay: f64,
}

impl Default for PriorExperiment {
    fn default() -> Self {
        PriorExperiment { seed: 1, training: 100_000, symbols: 100_000, p: 0.2, stay: 0.9 }
    }
}

/// Paired symbol error counts; `map_only` counts symbols only MAP got
/// wrong, `plain_only` those only the hard decision got wrong.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorComparison {
    pub symbols: u64,
    pub map_errors: u64,
    pub plain_errors: u64,
    pub map_only: u64,
    pub plain_only: u64,
}

impl PriorComparison {
    pub fn map_rate(&self) -> f64 {
        self.map_errors as f64 / self.symbols as f64
    }

    pub fn plain_rate(&self) -> f64 {
        self.plain_errors as f64 / self.symbols as f64
    }

    /// Paired sign-test statistic for "MAP makes fewer errors";
    /// 2.326 is the one-sided 99% point.
    pub fn z(&self) -> f64 {
        let n = (self.map_only + self.plain_only) as f64;
        if n == 0.0 {
            return 0.0;
        }
        (self.plain_only as f64 - self.map_only as f64) / n.sqrt()
    }
}

const BITS: usize = 3;

fn next_symbol(rng: &mut impl Rng, s: usize, stay: f64) -> usize {
    if rng.random_bool(stay) {
        (s + 3) % 8
    } else {
        let other = rng.random_range(0..7);
        let skip = (s + 3) % 8;
        if other >= skip { other + 1 } else { other }
    }
}

fn bits_of(s: usize) -> Vec<u8> {
    (0..BITS).rev().map(|i| ((s >> i) & 1) as u8).collect()
}

pub fn run_prior_experiment(exp: &PriorExperiment) -> Result<PriorComparison, StackError> {
    let channel = ErrorModel::RandomFlip { p: exp.p };
    channel.validate()?;
    if !(exp.p > 0.0 && exp.p < 0.5) {
        return Err(StackError::Config(format!("crossover {} outside (0, 0.5)", exp.p)));
    }
    let names: Vec<String> = (0..8).map(|s| format!("{s:03b}")).collect();
    let mut pool = ContextPool::new(names).with_encodings((0..8).map(bits_of).collect())?;
    let mut rng = TrialRng::new(exp.seed, 0).rng();
    let mut s = rng.random_range(0..8);
    for _ in 0..exp.training {
        pool.observe_index(s);
        s = next_symbol(&mut rng, s, exp.stay);
    }
    pool.reset_context();

    let mut source = TrialRng::new(exp.seed, 1).rng();
    let mut message = Vec::with_capacity(exp.symbols);
    let mut s = source.random_range(0..8);
    for _ in 0..exp.symbols {
        message.push(s);
        s = next_symbol(&mut source, s, exp.stay);
    }
    let bits: Vec<u8> = message.iter().flat_map(|&s| bits_of(s)).collect();
    let received = channel.apply(&SignalFrame::from_bits(&bits), &TrialRng::new(exp.seed, 2))?;

    let book = Codebook::from_bit_strings(&["0", "1"])?.with_radius(Radius::Unbounded);
    // scales the prior term to the channel's log-likelihood ratio
    let weight = 1.0 / ((1.0 - exp.p) / exp.p).ln();
    let mut cmp = PriorComparison { symbols: exp.symbols as u64, map_errors: 0, plain_errors: 0, map_only: 0, plain_only: 0 };
    // belief over the previous symbol given everything received so far
    let mut belief = pool.priors(None);
    let (keep, flip) = (1.0 - exp.p, exp.p);
    for (k, &sent) in message.iter().enumerate() {
        let group = &received.vectors()[k * BITS..(k + 1) * BITS];
        let hard: Vec<u8> = group.iter().map(|v| u8::from(v.components()[0] == Some(1.0))).collect();
        let next = if k == 0 { belief.clone() } else { pool.predictive(&belief)? };
        let mut decided: Vec<u8> = Vec::with_capacity(BITS);
        for (i, v) in group.iter().enumerate() {
            let [p0, p1] = pool.cascade_over(&next, &decided)?;
            let bit = match map_decode(&book, &SignalVector(v.0.clone()), &[p0, p1], weight)?.symbol() {
                Some(id) => (id.0 - 1) as u8,
                None => hard[i],
            };
            decided.push(bit);
        }
        belief = next
            .iter()
            .enumerate()
            .map(|(s, p)| p * bits_of(s).iter().zip(&hard).map(|(a, b)| if a == b { keep } else { flip }).product::<f64>())
            .collect();
        let total: f64 = belief.iter().sum();
        belief.iter_mut().for_each(|b| *b /= total);
        let map_symbol = decided.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        let plain_symbol = hard.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        let (map_wrong, plain_wrong) = (map_symbol != sent, plain_symbol != sent);
        cmp.map_errors += u64::from(map_wrong);
        cmp.plain_errors += u64::from(plain_wrong);
        cmp.map_only += u64::from(map_wrong && !plain_wrong);
        cmp.plain_only += u64::from(plain_wrong && !map_wrong);
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priors_help_on_a_matching_source() {
        let exp = PriorExperiment { training: 20_000, symbols: 5_000, ..PriorExperiment::default() };
        let c = run_prior_experiment(&exp).unwrap();
        assert!(c.map_errors < c.plain_errors, "{c:?}");
        // hard decisions on 3 bits at p = 0.2 fail with probability 1 - 0.8^3
        assert!((c.plain_rate() - 0.488).abs() < 0.03, "{c:?}");
        assert!(c.z() > 2.326);
    }

    #[test]
    fn uninformative_source_still_never_worse_by_much() {
        let exp = PriorExperiment { training: 20_000, symbols: 5_000, stay: 1.0 / 8.0, ..PriorExperiment::default() };
        let c = run_prior_experiment(&exp).unwrap();
        assert!(c.map_rate() <= c.plain_rate() + 0.03, "{c:?}");
    }
}
