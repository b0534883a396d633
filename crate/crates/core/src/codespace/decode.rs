//! Decoding by classification against a codebook.

use serde::{Deserialize, Serialize};

use super::{Codebook, CodespaceError, SignalVector, SymbolId};

/// Relative slack under which two scores count as tied.
const TIE_EPSILON: f64 = 1e-12;

/// Result of classifying one received signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeOutcome {
    ExactMatch { symbol: SymbolId },
    Corrected { symbol: SymbolId, distance: f64 },
    DetectedUncorrectable { nearest: f64 },
    Ambiguous { symbols: Vec<SymbolId> },
}

impl DecodeOutcome {
    /// The decided symbol, if decoding committed to one.
    pub fn symbol(&self) -> Option<SymbolId> {
        match self {
            DecodeOutcome::ExactMatch { symbol } | DecodeOutcome::Corrected { symbol, .. } => {
                Some(*symbol)
            }
            _ => None,
        }
    }

    pub fn is_corrected(&self) -> bool {
        matches!(self, DecodeOutcome::Corrected { .. })
    }

    /// Detect-only outcomes: the decoder saw an error it cannot fix.
    pub fn is_uncorrectable(&self) -> bool {
        matches!(
            self,
            DecodeOutcome::DetectedUncorrectable { .. } | DecodeOutcome::Ambiguous { .. }
        )
    }
}

fn check_signal(book: &Codebook, signal: &SignalVector) -> Result<(), CodespaceError> {
    if signal.dimension() != book.dimension() {
        return Err(CodespaceError::DimensionMismatch {
            expected: book.dimension(),
            found: signal.dimension(),
        });
    }
    if signal.erased_count() == signal.dimension() {
        return Err(CodespaceError::AllErased);
    }
    Ok(())
}

fn distance(prototype: &[f64], signal: &SignalVector) -> f64 {
    prototype
        .iter()
        .zip(signal.components())
        .filter_map(|(p, s)| s.map(|v| (v - p) * (v - p)))
        .sum()
}

/// Squared distance from `signal` to every prototype, in codebook order.
pub fn distance_table(
    book: &Codebook,
    signal: &SignalVector,
) -> Result<Vec<(SymbolId, f64)>, CodespaceError> {
    check_signal(book, signal)?;
    Ok(book
        .prototypes()
        .iter()
        .map(|p| (p.symbol, distance(&p.vector, signal)))
        .collect())
}

fn tied(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= TIE_EPSILON * a.abs().max(b.abs()).max(1.0))
}

/// Picks the minimum score; `distances` gives the geometric distance per
/// entry used for the radius check and the reported correction distance.
fn settle(book: &Codebook, scores: &[(SymbolId, f64)], distances: &[f64]) -> DecodeOutcome {
    let best = scores
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::INFINITY, f64::min);
    let winners: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| tied(*s, best))
        .map(|(i, _)| i)
        .collect();
    let nearest = winners
        .iter()
        .map(|&i| distances[i])
        .fold(f64::INFINITY, f64::min);
    if !book.radius().admits(nearest) {
        return DecodeOutcome::DetectedUncorrectable { nearest };
    }
    if winners.len() > 1 {
        return DecodeOutcome::Ambiguous {
            symbols: winners.iter().map(|&i| scores[i].0).collect(),
        };
    }
    let i = winners[0];
    let (symbol, d) = (scores[i].0, distances[i]);
    if d == 0.0 {
        DecodeOutcome::ExactMatch { symbol }
    } else {
        DecodeOutcome::Corrected { symbol, distance: d }
    }
}

/// Nearest-neighbor decoding over the non-erased components.
pub fn nn_decode(book: &Codebook, signal: &SignalVector) -> Result<DecodeOutcome, CodespaceError> {
    let table = distance_table(book, signal)?;
    let distances: Vec<f64> = table.iter().map(|(_, d)| *d).collect();
    Ok(settle(book, &table, &distances))
}

/// Prior-biased decoding: minimizes `distance - weight * ln(prior)`.
///
/// `priors` is aligned with the codebook's prototype order. A zero prior
/// excludes its symbol unless `weight` is zero, in which case the priors are
/// ignored entirely and this is plain nearest-neighbor decoding. The radius
/// is checked against the winner's geometric distance.
pub fn map_decode(
    book: &Codebook,
    signal: &SignalVector,
    priors: &[f64],
    weight: f64,
) -> Result<DecodeOutcome, CodespaceError> {
    if priors.len() != book.len() {
        return Err(CodespaceError::PriorLength {
            expected: book.len(),
            found: priors.len(),
        });
    }
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(CodespaceError::InvalidWeight(weight));
    }
    if priors.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(CodespaceError::InvalidPrior);
    }
    if priors.iter().all(|p| *p == 0.0) {
        return Err(CodespaceError::AllPriorsZero);
    }
    let table = distance_table(book, signal)?;
    let distances: Vec<f64> = table.iter().map(|(_, d)| *d).collect();
    if weight == 0.0 {
        return Ok(settle(book, &table, &distances));
    }
    let scores: Vec<(SymbolId, f64)> = table
        .iter()
        .zip(priors)
        .map(|(&(s, d), &p)| {
            let score = if p == 0.0 {
                f64::INFINITY
            } else {
                d - weight * p.ln()
            };
            (s, score)
        })
        .collect();
    Ok(settle(book, &scores, &distances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codespace::{hamming74_codebook, Radius, HAMMING74_WORDS};

    fn bits(word: u8) -> Vec<u8> {
        (0..7).map(|i| (word >> (6 - i)) & 1).collect()
    }

    fn popcount_distance(a: &[u8], b: &str) -> f64 {
        a.iter()
            .zip(b.bytes())
            .filter(|(x, y)| **x != (*y - b'0'))
            .count() as f64
    }

    #[test]
    fn reference_error_word_distances() {
        let book = hamming74_codebook();
        let s: SignalVector = "0110001".parse().unwrap();
        let table = distance_table(&book, &s).unwrap();
        let got: Vec<f64> = table.iter().map(|(_, d)| *d).collect();
        assert_eq!(
            got,
            vec![3., 2., 6., 3., 4., 5., 5., 4., 3., 2., 2., 3., 4., 1., 5., 4.]
        );
        assert_eq!(
            nn_decode(&book, &s).unwrap(),
            DecodeOutcome::Corrected { symbol: SymbolId(14), distance: 1.0 }
        );
    }

    #[test]
    fn codeword_decodes_exactly() {
        let book = hamming74_codebook();
        let s: SignalVector = "0000000".parse().unwrap();
        assert_eq!(
            nn_decode(&book, &s).unwrap(),
            DecodeOutcome::ExactMatch { symbol: SymbolId(1) }
        );
        let ones: SignalVector = "1111111".parse().unwrap();
        let t = distance_table(&book, &ones).unwrap();
        assert_eq!(t[15].1, 0.0);
        assert_eq!(t[0].1, 7.0);
    }

    #[test]
    fn erased_tail_resolves_uniquely() {
        let book = hamming74_codebook();
        let s: SignalVector = "01100??".parse().unwrap();
        // brute force: which codewords agree with the five known bits?
        let known = "01100";
        let matches: Vec<usize> = HAMMING74_WORDS
            .iter()
            .enumerate()
            .filter(|(_, w)| w.starts_with(known))
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(matches, vec![14]);
        assert_eq!(
            nn_decode(&book, &s).unwrap(),
            DecodeOutcome::ExactMatch { symbol: SymbolId(14) }
        );
    }

    #[test]
    fn binary_distance_equals_bit_count_everywhere() {
        let book = hamming74_codebook();
        for word in 0u8..128 {
            let b = bits(word);
            let table = distance_table(&book, &SignalVector::from_bits(&b)).unwrap();
            for ((_, d), w) in table.iter().zip(HAMMING74_WORDS) {
                assert_eq!(*d, popcount_distance(&b, w));
            }
        }
    }

    #[test]
    fn errors_on_bad_signals() {
        let book = hamming74_codebook();
        assert!(matches!(
            nn_decode(&book, &"0101".parse().unwrap()),
            Err(CodespaceError::DimensionMismatch { expected: 7, found: 4 })
        ));
        assert!(matches!(
            nn_decode(&book, &"???????".parse().unwrap()),
            Err(CodespaceError::AllErased)
        ));
    }

    #[test]
    fn out_of_radius_is_detect_only() {
        // zero radius turns the code into a pure detector
        let book = hamming74_codebook().with_radius(Radius::Bounded(0.0));
        let out = nn_decode(&book, &"0110001".parse().unwrap()).unwrap();
        assert_eq!(out, DecodeOutcome::DetectedUncorrectable { nearest: 1.0 });
    }

    #[test]
    fn ties_are_ambiguous() {
        let book = hamming74_codebook().with_radius(Radius::Unbounded);
        // words 1 and 2 both end in 0000
        let out = nn_decode(&book, &"???0000".parse().unwrap()).unwrap();
        assert!(matches!(out, DecodeOutcome::Ambiguous { ref symbols } if symbols.len() >= 2));
    }

    fn tied_signal() -> SignalVector {
        // first 7-bit word at distance exactly 2 from both word 2 and word 10
        let w2 = HAMMING74_WORDS[1];
        let w10 = HAMMING74_WORDS[9];
        let word = (0u8..128)
            .map(bits)
            .find(|b| popcount_distance(b, w2) == 2.0 && popcount_distance(b, w10) == 2.0)
            .unwrap();
        SignalVector::from_bits(&word)
    }

    #[test]
    fn prior_breaks_a_tie() {
        let book = hamming74_codebook().with_radius(Radius::Unbounded);
        let s = tied_signal();
        let mut priors = vec![0.0; 16];
        priors[1] = 0.9;
        priors[9] = 0.1;
        assert_eq!(
            map_decode(&book, &s, &priors, 1.0).unwrap(),
            DecodeOutcome::Corrected { symbol: SymbolId(2), distance: 2.0 }
        );
        // flipped priors flip the decision
        priors[1] = 0.1;
        priors[9] = 0.9;
        assert_eq!(map_decode(&book, &s, &priors, 1.0).unwrap().symbol(), Some(SymbolId(10)));
    }

    #[test]
    fn zero_weight_and_uniform_priors_reduce_to_nearest_neighbor() {
        let book = hamming74_codebook();
        let mut skewed = vec![0.0; 16];
        skewed[3] = 1.0;
        let uniform = vec![1.0 / 16.0; 16];
        for word in 0u8..128 {
            let s = SignalVector::from_bits(&bits(word));
            let nn = nn_decode(&book, &s).unwrap();
            assert_eq!(map_decode(&book, &s, &skewed, 0.0).unwrap(), nn);
            for weight in [0.5, 1.0, 7.0] {
                assert_eq!(map_decode(&book, &s, &uniform, weight).unwrap(), nn);
            }
        }
    }

    #[test]
    fn map_rejects_bad_priors() {
        let book = hamming74_codebook();
        let s: SignalVector = "0000000".parse().unwrap();
        assert!(matches!(
            map_decode(&book, &s, &[0.0; 16], 1.0),
            Err(CodespaceError::AllPriorsZero)
        ));
        assert!(matches!(
            map_decode(&book, &s, &[0.5; 3], 1.0),
            Err(CodespaceError::PriorLength { .. })
        ));
        assert!(map_decode(&book, &s, &[1.0 / 16.0; 16], -1.0).is_err());
    }
}
