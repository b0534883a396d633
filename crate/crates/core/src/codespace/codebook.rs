//! Codebooks as prototype sets in signal space.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CodespaceError;

/// Identifier of a codebook symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How far a signal may sit from its nearest prototype and still be corrected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radius {
    Bounded(f64),
    Unbounded,
}

impl Radius {
    pub fn admits(&self, distance: f64) -> bool {
        match *self {
            Radius::Bounded(r) => distance <= r,
            Radius::Unbounded => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub symbol: SymbolId,
    pub vector: Vec<f64>,
}

/// A set of labeled prototype vectors sharing one dimension.
///
/// The metric is fixed: summed squared difference over the non-erased
/// components of the received signal. For 0/1-valued books this equals the
/// Hamming distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dimension: usize,
    prototypes: Vec<Prototype>,
    radius: Radius,
}

impl Codebook {
    /// Builds a codebook with the default correction radius:
    /// `floor((d_min - 1) / 2)` for binary books, unbounded otherwise.
    pub fn new(dimension: usize, prototypes: Vec<Prototype>) -> Result<Self, CodespaceError> {
        if dimension == 0 {
            return Err(CodespaceError::ZeroDimension);
        }
        if prototypes.is_empty() {
            return Err(CodespaceError::EmptyCodebook);
        }
        let mut seen = HashSet::new();
        for (i, p) in prototypes.iter().enumerate() {
            if p.vector.len() != dimension {
                return Err(CodespaceError::DimensionMismatch {
                    expected: dimension,
                    found: p.vector.len(),
                });
            }
            if p.vector.iter().any(|v| !v.is_finite()) {
                return Err(CodespaceError::NonFiniteComponent(p.symbol));
            }
            if !seen.insert(p.symbol) {
                return Err(CodespaceError::DuplicateSymbol(p.symbol));
            }
            if prototypes[..i].iter().any(|q| q.vector == p.vector) {
                return Err(CodespaceError::DuplicateVector(p.symbol));
            }
        }
        let mut book = Codebook {
            dimension,
            prototypes,
            radius: Radius::Unbounded,
        };
        if book.is_binary() {
            let dmin = book.min_distance();
            let r = if dmin.is_finite() {
                ((dmin - 1.0) / 2.0).floor().max(0.0)
            } else {
                // single prototype: everything decodes to it
                f64::INFINITY
            };
            book.radius = if r.is_finite() {
                Radius::Bounded(r)
            } else {
                Radius::Unbounded
            };
        }
        Ok(book)
    }

    /// Builds a codebook from 0/1 strings, symbol ids assigned 1..=n.
    pub fn from_bit_strings<S: AsRef<str>>(words: &[S]) -> Result<Self, CodespaceError> {
        let mut prototypes = Vec::with_capacity(words.len());
        let mut dimension = None;
        for (i, w) in words.iter().enumerate() {
            let vector = w
                .as_ref()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0.0),
                    '1' => Ok(1.0),
                    other => Err(CodespaceError::Parse(format!("not a bit: {other:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            dimension.get_or_insert(vector.len());
            prototypes.push(Prototype {
                symbol: SymbolId(i as u32 + 1),
                vector,
            });
        }
        Codebook::new(dimension.unwrap_or(0), prototypes)
    }

    pub fn with_radius(mut self, radius: Radius) -> Self {
        self.radius = radius;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn prototypes(&self) -> &[Prototype] {
        &self.prototypes
    }

    pub fn radius(&self) -> Radius {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.prototypes
            .iter()
            .all(|p| p.vector.iter().all(|&v| v == 0.0 || v == 1.0))
    }

    pub fn position(&self, symbol: SymbolId) -> Option<usize> {
        self.prototypes.iter().position(|p| p.symbol == symbol)
    }

    pub fn prototype(&self, symbol: SymbolId) -> Option<&Prototype> {
        self.prototypes.iter().find(|p| p.symbol == symbol)
    }

    /// Smallest pairwise squared distance, infinite for a single prototype.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.prototypes.iter().enumerate() {
            for b in &self.prototypes[i + 1..] {
                let d: f64 = a
                    .vector
                    .iter()
                    .zip(&b.vector)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                best = best.min(d);
            }
        }
        best
    }

    /// Text table form: one `symbol-id: v1 v2 ... vD` line per prototype.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for p in &self.prototypes {
            out.push_str(&p.symbol.to_string());
            out.push(':');
            for v in &p.vector {
                out.push(' ');
                out.push_str(&format_component(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self, CodespaceError> {
        let mut prototypes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, rest) = line.split_once(':').ok_or_else(|| {
                CodespaceError::Parse(format!("line {}: missing ':'", lineno + 1))
            })?;
            let id: u32 = id.trim().parse().map_err(|_| {
                CodespaceError::Parse(format!("line {}: bad symbol id {id:?}", lineno + 1))
            })?;
            let vector = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        CodespaceError::Parse(format!("line {}: bad component {t:?}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            prototypes.push(Prototype {
                symbol: SymbolId(id),
                vector,
            });
        }
        let dimension = prototypes.first().map_or(0, |p| p.vector.len());
        Codebook::new(dimension, prototypes)
    }
}

fn format_component(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// The sixteen legal Hamming(7,4) words, in table order; word `i` is symbol `i`.
pub const HAMMING74_WORDS: [&str; 16] = [
    "0000000", "1110000", "1001100", "0111100", "0101010", "1011010", "1100110", "0010110",
    "1101001", "0011001", "0100101", "1010101", "1000011", "0110011", "0001111", "1111111",
];

/// The Hamming(7,4) reference codebook: 16 binary prototypes, radius 1.
pub fn hamming74_codebook() -> Codebook {
    Codebook::from_bit_strings(&HAMMING74_WORDS).expect("static table is valid")
}

/// A received signal: each component is a value or erased.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalVector(pub Vec<Option<f64>>);

impl SignalVector {
    pub fn from_values(values: &[f64]) -> Self {
        SignalVector(values.iter().copied().map(Some).collect())
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        SignalVector(bits.iter().map(|&b| Some(f64::from(b))).collect())
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Option<f64>] {
        &self.0
    }

    pub fn erased_count(&self) -> usize {
        self.0.iter().filter(|c| c.is_none()).count()
    }

    pub fn erase(&mut self, index: usize) {
        self.0[index] = None;
    }
}

impl fmt::Display for SignalVector {
    /// Compact form (`0110?01`) when every component is a bit or erased,
    /// space-separated values otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compact = self
            .0
            .iter()
            .all(|c| matches!(c, None | Some(0.0) | Some(1.0)));
        if compact {
            for c in &self.0 {
                match c {
                    None => f.write_str("?")?,
                    Some(v) if *v == 0.0 => f.write_str("0")?,
                    Some(_) => f.write_str("1")?,
                }
            }
            Ok(())
        } else {
            let parts: Vec<String> = self
                .0
                .iter()
                .map(|c| c.map_or_else(|| "?".to_string(), |v| format!("{v}")))
                .collect();
            f.write_str(&parts.join(" "))
        }
    }
}

impl FromStr for SignalVector {
    type Err = CodespaceError;

    /// Accepts `01100??` or whitespace-separated reals with `?` for erasures.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(CodespaceError::Parse("empty signal literal".into()));
        }
        if s.contains(char::is_whitespace) {
            s.split_whitespace()
                .map(|t| {
                    if t == "?" {
                        Ok(None)
                    } else {
                        t.parse::<f64>()
                            .map(Some)
                            .map_err(|_| CodespaceError::Parse(format!("bad component {t:?}")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map(SignalVector)
        } else {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(Some(0.0)),
                    '1' => Ok(Some(1.0)),
                    '?' => Ok(None),
                    other => Err(CodespaceError::Parse(format!("bad signal char {other:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(SignalVector)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_table_matches_reference_rows() {
        let book = hamming74_codebook();
        assert_eq!(book.dimension(), 7);
        assert_eq!(book.len(), 16);
        let word = |i: u32| SignalVector::from_values(&book.prototype(SymbolId(i)).unwrap().vector).to_string();
        assert_eq!(word(1), "0000000");
        assert_eq!(word(2), "1110000");
        assert_eq!(word(14), "0110011");
        assert_eq!(word(16), "1111111");
        assert_eq!(book.radius(), Radius::Bounded(1.0));
    }

    #[test]
    fn hamming_pairwise_distance_at_least_three() {
        // all 120 pairs, counted bit by bit
        let mut pairs = 0;
        for (i, a) in HAMMING74_WORDS.iter().enumerate() {
            for b in &HAMMING74_WORDS[i + 1..] {
                let d = a.chars().zip(b.chars()).filter(|(x, y)| x != y).count();
                assert!(d >= 3, "{a} vs {b}");
                pairs += 1;
            }
        }
        assert_eq!(pairs, 120);
    }

    #[test]
    fn rejects_invalid_books() {
        let p = |s: u32, v: Vec<f64>| Prototype { symbol: SymbolId(s), vector: v };
        assert!(matches!(
            Codebook::new(2, vec![p(1, vec![0.0, 1.0]), p(2, vec![0.0])]),
            Err(CodespaceError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Codebook::new(1, vec![p(1, vec![0.0]), p(1, vec![1.0])]),
            Err(CodespaceError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            Codebook::new(1, vec![p(1, vec![0.5]), p(2, vec![0.5])]),
            Err(CodespaceError::DuplicateVector(_))
        ));
        assert!(matches!(Codebook::new(1, vec![]), Err(CodespaceError::EmptyCodebook)));
    }

    #[test]
    fn analog_books_default_to_unbounded_radius() {
        let book = Codebook::new(
            1,
            vec![
                Prototype { symbol: SymbolId(1), vector: vec![-1.0] },
                Prototype { symbol: SymbolId(2), vector: vec![1.5] },
            ],
        )
        .unwrap();
        assert_eq!(book.radius(), Radius::Unbounded);
    }

    #[test]
    fn table_round_trip() {
        let book = hamming74_codebook();
        let text = book.to_table();
        assert!(text.starts_with("1: 0 0 0 0 0 0 0\n2: 1 1 1 0 0 0 0\n"));
        assert_eq!(Codebook::from_table(&text).unwrap(), book);
    }

    #[test]
    fn signal_literals() {
        let s: SignalVector = "01100??".parse().unwrap();
        assert_eq!(s.erased_count(), 2);
        assert_eq!(s.to_string(), "01100??");
        let t: SignalVector = "0.5 ? -1".parse().unwrap();
        assert_eq!(t.0, vec![Some(0.5), None, Some(-1.0)]);
        assert!("01x".parse::<SignalVector>().is_err());
    }
}
