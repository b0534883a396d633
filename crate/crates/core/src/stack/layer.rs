//! The individual channel layers and their wire formats.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::channel::SignalFrame;
use crate::codespace::{hamming74_codebook, nn_decode, Codebook, DecodeOutcome, Radius, SignalVector, SymbolId};
use crate::framing::{repair_tags, RepairOptions, TagStream, Token};

use super::{StackError, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Abort the whole transmission on the first uncorrectable symbol.
    FailFast,
    /// Emit [`Symbol::Erased`] in its place and carry on.
    #[default]
    PassResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Clean,
    Corrected,
    Uncorrectable,
}

/// Where one decoded output symbol came from and what the decoder did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    /// Input positions consumed (symbols, or vectors for the physical layer).
    pub input: Range<usize>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Decoded {
    pub symbols: Vec<Symbol>,
    pub trace: Vec<TraceEntry>,
}

impl Decoded {
    fn push(&mut self, symbol: Symbol, input: Range<usize>, outcome: Outcome) {
        let symbol = if outcome == Outcome::Uncorrectable {
            Symbol::Erased
        } else {
            symbol
        };
        self.symbols.push(symbol);
        self.trace.push(TraceEntry { input, outcome });
    }
}

/// Bottom-layer codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CodeSpec {
    /// 4 data bits per 7-bit word.
    Hamming74,
    /// 1 data bit repeated `k` times, decoded by nearest neighbor (majority).
    Repetition { k: usize },
    /// 1 data bit per channel use, hard decision.
    Raw,
}

impl CodeSpec {
    /// The codebook and how many data bits each word carries.
    pub fn build(&self) -> Result<(Codebook, u32), StackError> {
        Ok(match self {
            CodeSpec::Hamming74 => (hamming74_codebook(), 4),
            CodeSpec::Repetition { k } => {
                if *k == 0 {
                    return Err(StackError::Config("repetition k must be positive".into()));
                }
                let words = ["0".repeat(*k), "1".repeat(*k)];
                (Codebook::from_bit_strings(&words)?, 1)
            }
            CodeSpec::Raw => (
                Codebook::from_bit_strings(&["0", "1"])?.with_radius(Radius::Unbounded),
                1,
            ),
        })
    }
}

const fn default_upper_width() -> u32 {
    8
}

const fn default_max_edits() -> usize {
    8
}

/// Serializable description of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Booleans carried as words; `fuzzy` enables synonym and typo matching.
    Semantic {
        #[serde(default)]
        fuzzy: bool,
        #[serde(default)]
        policy: Policy,
    },
    /// Words as fixed 4-byte slots.
    WordFraming {
        #[serde(default)]
        policy: Policy,
    },
    /// Words wrapped in a repaired tag structure.
    TagFraming {
        #[serde(default = "default_max_edits")]
        max_edits: usize,
        #[serde(default)]
        policy: Policy,
    },
    /// The layer that touches the channel.
    Physical {
        code: CodeSpec,
        /// Bits per symbol arriving from the layer above.
        #[serde(default = "default_upper_width")]
        upper_width: u32,
        /// Overrides the codebook's default correction radius; 0 makes the
        /// layer detect-only.
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        policy: Policy,
    },
}

impl LayerSpec {
    pub fn policy(&self) -> Policy {
        match self {
            LayerSpec::Semantic { policy, .. }
            | LayerSpec::WordFraming { policy }
            | LayerSpec::TagFraming { policy, .. }
            | LayerSpec::Physical { policy, .. } => *policy,
        }
    }

    pub fn name(&self) -> String {
        match self {
            LayerSpec::Semantic { fuzzy: true, .. } => "semantic-fuzzy".into(),
            LayerSpec::Semantic { fuzzy: false, .. } => "semantic".into(),
            LayerSpec::WordFraming { .. } => "word-framing".into(),
            LayerSpec::TagFraming { .. } => "tag-framing".into(),
            LayerSpec::Physical { code, .. } => match code {
                CodeSpec::Hamming74 => "hamming74".into(),
                CodeSpec::Repetition { k } => format!("repetition{k}"),
                CodeSpec::Raw => "raw".into(),
            },
        }
    }
}

/// A built layer, ready to encode and decode.
#[derive(Debug, Clone)]
pub struct Layer {
    pub name: String,
    pub policy: Policy,
    pub(crate) kind: Kind,
}

/// What a layer accepts from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Booleans.
    Semantic,
    /// Words of up to four bytes.
    Framing,
    /// Integers below `2^upper_width`.
    Physical { upper_width: u32 },
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    Semantic { fuzzy: bool },
    WordFraming,
    TagFraming { max_edits: usize },
    Physical(Physical),
}

impl Layer {
    pub fn build(spec: &LayerSpec) -> Result<Self, StackError> {
        let kind = match spec {
            LayerSpec::Semantic { fuzzy, .. } => Kind::Semantic { fuzzy: *fuzzy },
            LayerSpec::WordFraming { .. } => Kind::WordFraming,
            LayerSpec::TagFraming { max_edits, .. } => Kind::TagFraming { max_edits: *max_edits },
            LayerSpec::Physical { code, upper_width, radius, .. } => {
                let (mut book, word_bits) = code.build()?;
                if !(1..=32).contains(upper_width) {
                    return Err(StackError::Config(format!(
                        "upper_width {upper_width} outside 1..=32"
                    )));
                }
                if let Some(r) = radius {
                    if r.is_nan() || *r < 0.0 {
                        return Err(StackError::Config(format!("radius {r} must be non-negative")));
                    }
                    book = book.with_radius(Radius::Bounded(*r));
                }
                Kind::Physical(Physical { book, word_bits, upper_width: *upper_width })
            }
        };
        Ok(Layer { name: spec.name(), policy: spec.policy(), kind })
    }

    pub fn class(&self) -> LayerKind {
        match &self.kind {
            Kind::Semantic { .. } => LayerKind::Semantic,
            Kind::WordFraming | Kind::TagFraming { .. } => LayerKind::Framing,
            Kind::Physical(p) => LayerKind::Physical { upper_width: p.upper_width },
        }
    }

    pub fn is_physical(&self) -> bool {
        matches!(self.kind, Kind::Physical(_))
    }

    pub(crate) fn encode(&self, message: &[Symbol]) -> Result<Vec<Symbol>, StackError> {
        match &self.kind {
            Kind::Semantic { .. } => message
                .iter()
                .map(|s| match s {
                    Symbol::Bool(true) => Ok(Symbol::Word("yes".into())),
                    Symbol::Bool(false) => Ok(Symbol::Word("no".into())),
                    Symbol::Word(w) => Ok(Symbol::Word(w.clone())),
                    other => Err(self.invalid(other)),
                })
                .collect(),
            Kind::WordFraming => {
                let mut out = Vec::new();
                for s in message {
                    out.extend(word_bytes(s).ok_or_else(|| self.invalid(s))?.map(Symbol::Data));
                }
                Ok(out)
            }
            Kind::TagFraming { .. } => {
                let mut out = tag_record(KIND_OPEN, NAME_MSG);
                for s in message {
                    let bytes = word_bytes(s).ok_or_else(|| self.invalid(s))?;
                    out.extend(tag_record(KIND_OPEN, NAME_ANS));
                    out.push(Symbol::Data(KIND_TEXT));
                    out.extend(bytes.map(Symbol::Data));
                    out.extend(tag_record(KIND_CLOSE, NAME_ANS));
                }
                out.extend(tag_record(KIND_CLOSE, NAME_MSG));
                Ok(out)
            }
            Kind::Physical(_) => Err(StackError::Config(format!(
                "layer {} encodes to a frame, not symbols",
                self.name
            ))),
        }
    }

    pub(crate) fn decode(&self, input: &[Symbol]) -> Decoded {
        match &self.kind {
            Kind::Semantic { fuzzy } => {
                let mut out = Decoded::default();
                for (i, s) in input.iter().enumerate() {
                    let (value, outcome) = match s {
                        Symbol::Word(w) => semantic_decode(w, *fuzzy),
                        _ => (None, Outcome::Uncorrectable),
                    };
                    out.push(Symbol::Bool(value.unwrap_or(false)), i..i + 1, outcome);
                }
                out
            }
            Kind::WordFraming => {
                let mut out = Decoded::default();
                for (k, group) in input.chunks(4).enumerate() {
                    let range = 4 * k..4 * k + group.len();
                    match bytes_of(group) {
                        Some(bytes) if group.len() == 4 => {
                            out.push(Symbol::Word(word_from_bytes(&bytes)), range, Outcome::Clean)
                        }
                        _ => out.push(Symbol::Erased, range, Outcome::Uncorrectable),
                    }
                }
                out
            }
            Kind::TagFraming { max_edits } => decode_tags(input, *max_edits),
            Kind::Physical(_) => Decoded::default(),
        }
    }

    fn invalid(&self, symbol: &Symbol) -> StackError {
        StackError::InvalidMessage(format!("layer {} cannot carry {symbol:?}", self.name))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Physical {
    pub(crate) book: Codebook,
    pub(crate) word_bits: u32,
    pub(crate) upper_width: u32,
}

impl Physical {
    pub(crate) fn encode(&self, message: &[Symbol]) -> Result<SignalFrame, StackError> {
        let width = self.upper_width;
        let mut bits = Vec::with_capacity(message.len() * width as usize);
        for s in message {
            match s {
                Symbol::Data(v) if width == 32 || *v < (1 << width) => {
                    bits.extend((0..width).rev().map(|i| ((v >> i) & 1) as u8));
                }
                Symbol::Bool(b) if width == 1 => bits.push(u8::from(*b)),
                other => {
                    return Err(StackError::InvalidMessage(format!(
                        "{other:?} does not fit {width} bits"
                    )))
                }
            }
        }
        let wb = self.word_bits as usize;
        let vectors = bits
            .chunks(wb)
            .map(|chunk| {
                let value = chunk
                    .iter()
                    .chain(std::iter::repeat(&0))
                    .take(wb)
                    .fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                let proto = &self.book.prototypes()[value as usize];
                SignalVector::from_values(&proto.vector)
            })
            .collect();
        Ok(SignalFrame::new(self.book.dimension(), vectors)?)
    }

    /// Decodes each vector, then regroups the recovered bits into symbols.
    pub(crate) fn decode(&self, frame: &SignalFrame) -> Decoded {
        let wb = self.word_bits as usize;
        let width = self.upper_width as usize;
        let mut bits = Vec::with_capacity(frame.len() * wb);
        let mut word_outcome = Vec::with_capacity(frame.len());
        for v in frame.vectors() {
            let decoded = nn_decode(&self.book, v).ok();
            let (value, outcome) = match decoded {
                Some(DecodeOutcome::ExactMatch { symbol }) => (symbol, Outcome::Clean),
                Some(DecodeOutcome::Corrected { symbol, .. }) => (symbol, Outcome::Corrected),
                _ => (SymbolId(1), Outcome::Uncorrectable),
            };
            let value = value.0 - 1;
            bits.extend((0..wb).rev().map(|i| ((value >> i) & 1) as u8));
            word_outcome.push(outcome);
        }
        let mut out = Decoded::default();
        for j in 0..bits.len() / width {
            let (lo, hi) = (j * width, (j + 1) * width);
            let words = lo / wb..hi.div_ceil(wb);
            let outcome = word_outcome[words.clone()]
                .iter()
                .copied()
                .max_by_key(|o| match o {
                    Outcome::Clean => 0,
                    Outcome::Corrected => 1,
                    Outcome::Uncorrectable => 2,
                })
                .unwrap_or(Outcome::Clean);
            let value = bits[lo..hi].iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
            out.push(Symbol::Data(value), words, outcome);
        }
        out
    }
}

fn word_bytes(s: &Symbol) -> Option<[u32; 4]> {
    let Symbol::Word(w) = s else { return None };
    let raw = w.as_bytes();
    if raw.len() > 4 || raw.contains(&0) {
        return None;
    }
    let mut bytes = [0u32; 4];
    for (slot, b) in bytes.iter_mut().zip(raw) {
        *slot = u32::from(*b);
    }
    Some(bytes)
}

fn bytes_of(group: &[Symbol]) -> Option<Vec<u8>> {
    group
        .iter()
        .map(|s| match s {
            Symbol::Data(v) => u8::try_from(*v).ok(),
            _ => None,
        })
        .collect()
}

fn word_from_bytes(bytes: &[u8]) -> String {
    let end = bytes.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
    String::from_utf8_lossy(&bytes[..end]).into_owned()
}

pub const SYNONYMS_TRUE: [&str; 6] = ["yes", "ye", "YES", "es", "yess", "ja"];
pub const SYNONYMS_FALSE: [&str; 4] = ["no", "NO", "nope", "nein"];

/// Maps a received word to a boolean. The canonical words decode clean;
/// synonyms and words one edit away from exactly one synonym set decode as
/// corrected.
pub fn semantic_decode(word: &str, fuzzy: bool) -> (Option<bool>, Outcome) {
    match word {
        "yes" => return (Some(true), Outcome::Clean),
        "no" => return (Some(false), Outcome::Clean),
        _ if !fuzzy => return (None, Outcome::Uncorrectable),
        _ => {}
    }
    let nearest = |set: &[&str]| {
        set.iter()
            .map(|s| strsim::levenshtein(word, s))
            .min()
            .unwrap_or(usize::MAX)
    };
    let (t, f) = (nearest(&SYNONYMS_TRUE), nearest(&SYNONYMS_FALSE));
    match t.min(f) {
        d if d > 1 || t == f => (None, Outcome::Uncorrectable),
        _ => (Some(t < f), Outcome::Corrected),
    }
}

pub(crate) const KIND_OPEN: u32 = 0x0F;
pub(crate) const KIND_CLOSE: u32 = 0xF0;
pub(crate) const KIND_TEXT: u32 = 0x33;
pub(crate) const NAME_MSG: u32 = 0x55;
pub(crate) const NAME_ANS: u32 = 0xAA;
const RECORD: usize = 5;

fn tag_record(kind: u32, name: u32) -> Vec<Symbol> {
    [kind, name, 0, 0, 0].into_iter().map(Symbol::Data).collect()
}

fn byte_book(values: &[u32], radius: f64) -> Codebook {
    let words: Vec<String> = values.iter().map(|v| format!("{v:08b}")).collect();
    Codebook::from_bit_strings(&words)
        .expect("distinct byte codes")
        .with_radius(Radius::Bounded(radius))
}

fn classify(book: &Codebook, symbol: &Symbol) -> Option<(usize, bool)> {
    let Symbol::Data(v) = symbol else { return None };
    let bits: Vec<u8> = (0..8).rev().map(|i| ((v >> i) & 1) as u8).collect();
    match nn_decode(book, &SignalVector::from_bits(&bits)).ok()? {
        DecodeOutcome::ExactMatch { symbol } => Some((symbol.0 as usize - 1, false)),
        DecodeOutcome::Corrected { symbol, .. } => Some((symbol.0 as usize - 1, true)),
        _ => None,
    }
}

/// Classifies 5-byte records into tag tokens, repairs the structure, and
/// returns the text payloads that sit inside an `ans` element.
fn decode_tags(input: &[Symbol], max_edits: usize) -> Decoded {
    // kind codes are 4 apart, name codes 8 apart
    let kinds = byte_book(&[KIND_OPEN, KIND_CLOSE, KIND_TEXT], 1.0);
    let names = byte_book(&[NAME_MSG, NAME_ANS], 3.0);
    const NAMES: [&str; 2] = ["msg", "ans"];

    struct Text {
        range: Range<usize>,
        word: Option<String>,
        outcome: Outcome,
    }
    let mut tokens = Vec::new();
    let mut texts = Vec::new();
    let mut touched = false;
    for (k, rec) in input.chunks_exact(RECORD).enumerate() {
        let range = RECORD * k..RECORD * (k + 1);
        match classify(&kinds, &rec[0]) {
            Some((kind @ (0 | 1), fixed_kind)) => match classify(&names, &rec[1]) {
                Some((name, fixed_name)) => {
                    let name = NAMES[name].to_string();
                    tokens.push(if kind == 0 { Token::Open(name) } else { Token::Close(name) });
                    touched |= fixed_kind || fixed_name;
                }
                // an unreadable tag is dropped and left to structural repair
                None => touched = true,
            },
            Some((_, fixed)) => {
                tokens.push(Token::Text);
                let word = bytes_of(&rec[1..]).map(|b| word_from_bytes(&b));
                let outcome = match (&word, fixed) {
                    (None, _) => Outcome::Uncorrectable,
                    (Some(_), true) => Outcome::Corrected,
                    (Some(_), false) => Outcome::Clean,
                };
                texts.push(Text { range, word, outcome });
            }
            None => {
                tokens.push(Token::Text);
                texts.push(Text { range, word: None, outcome: Outcome::Uncorrectable });
            }
        }
    }

    let mut out = Decoded::default();
    let options = RepairOptions { max_edits, ..RepairOptions::default() };
    let Ok(repair) = repair_tags(&TagStream(tokens), &NAMES, options) else {
        for t in texts {
            out.push(Symbol::Erased, t.range, Outcome::Uncorrectable);
        }
        return out;
    };
    touched |= repair.cost > 0;
    let mut open: Vec<&str> = Vec::new();
    let mut texts = texts.into_iter();
    for token in &repair.stream.0 {
        match token {
            Token::Open(n) => open.push(n),
            Token::Close(_) => {
                open.pop();
            }
            Token::Text => {
                let t = texts.next().expect("repair keeps every text token");
                if open.last() != Some(&"ans") {
                    continue;
                }
                let outcome = match t.outcome {
                    Outcome::Clean if touched => Outcome::Corrected,
                    o => o,
                };
                out.push(Symbol::Word(t.word.unwrap_or_default()), t.range, outcome);
            }
        }
    }
    out
}
