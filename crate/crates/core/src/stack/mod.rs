//! Nested channel layers, residual-error accounting, context pools and
//! contextual codes.

mod case1;
mod contextual;
mod layer;
mod pool;
mod priors;
mod report;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ErrorModel, SignalFrame, TrialRng};
use crate::codespace::CodespaceError;
use crate::framing::FramingError;

pub use case1::{scenario_case1, Case1Run, CASE1_FLIP_P, CASE1_SEED, CASE1_WORDS};
pub use contextual::{
    compare_contextual, contextual_decode, plain_octagon_decode, ContextualCodebook, ContextualComparison, ContextualStep,
    STATE_NAMES,
};
pub use priors::{run_prior_experiment, PriorComparison, PriorExperiment};
pub use layer::{semantic_decode, CodeSpec, Layer, LayerKind, LayerSpec, Outcome, Policy, TraceEntry, SYNONYMS_FALSE, SYNONYMS_TRUE};
pub use pool::{update_pool, ContextPool};
pub use report::{LayerReport, ResidualReport};

#[derive(Debug, Error, PartialEq)]
pub enum StackError {
    #[error("layer {layer} aborted at symbol {position}: uncorrectable")]
    Aborted { layer: String, position: usize },
    #[error("invalid stack: {0}")]
    Config(String),
    #[error("invalid message: {0}")]
    InvalidMessage(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("pools have different alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    Codespace(#[from] CodespaceError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Framing(#[from] FramingError),
}

/// A message symbol as it travels between layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    Bool(bool),
    Word(String),
    Data(u32),
    /// Placeholder a pass-residual layer emits for an uncorrectable symbol.
    Erased,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Bool(b) => write!(f, "{b}"),
            Symbol::Word(w) => f.write_str(w),
            Symbol::Data(v) => write!(f, "{v}"),
            Symbol::Erased => f.write_str("?"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Hamming-coded bits under exact-match upper layers.
    BottomHeavy,
    /// Raw bits under synonym-correcting upper layers.
    TopHeavy,
    /// Some correction at every layer.
    Balanced,
}

impl Profile {
    pub fn layers(self) -> Vec<LayerSpec> {
        let hamming = LayerSpec::Physical {
            code: CodeSpec::Hamming74,
            upper_width: 8,
            radius: None,
            policy: Policy::PassResidual,
        };
        let raw = LayerSpec::Physical {
            code: CodeSpec::Raw,
            upper_width: 8,
            radius: None,
            policy: Policy::PassResidual,
        };
        let words = LayerSpec::WordFraming { policy: Policy::PassResidual };
        let semantic = |fuzzy| LayerSpec::Semantic { fuzzy, policy: Policy::PassResidual };
        match self {
            Profile::BottomHeavy => vec![semantic(false), words, hamming],
            Profile::TopHeavy => vec![semantic(true), words, raw],
            Profile::Balanced => vec![
                semantic(true),
                LayerSpec::TagFraming { max_edits: 8, policy: Policy::PassResidual },
                hamming,
            ],
        }
    }
}

/// Either a named allocation profile or an explicit layer list, top first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<LayerSpec>,
}

impl StackSpec {
    pub fn resolved(&self) -> Result<Vec<LayerSpec>, StackError> {
        match (&self.profile, self.layers.is_empty()) {
            (Some(p), true) => Ok(p.layers()),
            (None, false) => Ok(self.layers.clone()),
            (Some(_), false) => Err(StackError::Config("give either profile or layers, not both".into())),
            (None, true) => Err(StackError::Config("no layers".into())),
        }
    }
}

/// Layers ordered top (most abstract) to bottom (physical).
#[derive(Debug, Clone)]
pub struct Stack {
    layers: Vec<Layer>,
}

/// What reached the top of the stack, plus per-layer accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub received: Vec<Symbol>,
    /// The top-layer output of a noiseless run.
    pub reference: Vec<Symbol>,
    pub report: ResidualReport,
    /// Channel uses (frame components) spent.
    pub channel_uses: usize,
    pub aborted: Option<Abort>,
}

/// Where a fail-fast layer stopped the transmission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abort {
    pub layer: String,
    pub position: usize,
}

impl Stack {
    pub fn new(layers: Vec<Layer>) -> Result<Self, StackError> {
        match layers.iter().position(Layer::is_physical) {
            Some(i) if i + 1 == layers.len() => Ok(Stack { layers }),
            Some(_) => Err(StackError::Config("the physical layer must be last".into())),
            None => Err(StackError::Config("no physical layer".into())),
        }
    }

    pub fn from_spec(spec: &StackSpec) -> Result<Self, StackError> {
        let layers = spec.resolved()?.iter().map(Layer::build).collect::<Result<_, _>>()?;
        Stack::new(layers)
    }

    pub fn profile(profile: Profile) -> Self {
        Stack::from_spec(&StackSpec { profile: Some(profile), layers: Vec::new() })
            .expect("built-in profiles are valid")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    fn physical(&self) -> &layer::Physical {
        match &self.layers.last().expect("non-empty").kind {
            layer::Kind::Physical(p) => p,
            _ => unreachable!("checked in Stack::new"),
        }
    }

    /// Bits of information one top-level symbol carries.
    pub fn symbol_bits(&self, symbol: &Symbol) -> u32 {
        match symbol {
            Symbol::Bool(_) => 1,
            Symbol::Word(w) => 8 * w.len() as u32,
            Symbol::Data(_) if self.layers.len() == 1 => self.physical().upper_width,
            Symbol::Data(_) => 8,
            Symbol::Erased => 0,
        }
    }

    /// Reads a top-level symbol written as text: `true`/`false` for a
    /// semantic top layer, the word itself for framing, an integer otherwise.
    pub fn parse_symbol(&self, text: &str) -> Result<Symbol, StackError> {
        let bad = || StackError::InvalidMessage(format!("{text:?} is not a symbol of layer {}", self.layers[0].name));
        match self.layers[0].class() {
            LayerKind::Semantic => match text {
                "true" | "yes" => Ok(Symbol::Bool(true)),
                "false" | "no" => Ok(Symbol::Bool(false)),
                _ => Err(bad()),
            },
            LayerKind::Framing => Ok(Symbol::Word(text.to_string())),
            LayerKind::Physical { .. } => text.parse().map(Symbol::Data).map_err(|_| bad()),
        }
    }

    /// Decodes a received frame to top-level symbols; a fail-fast abort is
    /// an error.
    pub fn receive(&self, frame: &SignalFrame) -> Result<Vec<Symbol>, StackError> {
        if frame.dimension() != self.physical().book.dimension() {
            return Err(ChannelError::DimensionMismatch { expected: self.physical().book.dimension(), found: frame.dimension() }.into());
        }
        let (mut outputs, abort) = self.decode(frame);
        match abort {
            Some(Abort { layer, position }) => Err(StackError::Aborted { layer, position }),
            None => Ok(outputs.pop().expect("one output per layer").symbols),
        }
    }

    /// Encodes top to bottom: one symbol stream per upper layer, then the frame.
    pub fn encode(&self, message: &[Symbol]) -> Result<(Vec<Vec<Symbol>>, SignalFrame), StackError> {
        let mut streams = vec![message.to_vec()];
        for layer in &self.layers[..self.layers.len() - 1] {
            let next = layer.encode(streams.last().expect("non-empty"))?;
            streams.push(next);
        }
        let frame = self.physical().encode(streams.last().expect("non-empty"))?;
        Ok((streams, frame))
    }

    /// Decodes bottom to top, returning per-layer outputs (bottom first)
    /// and the first fail-fast layer that met an uncorrectable symbol.
    fn decode(&self, frame: &SignalFrame) -> (Vec<layer::Decoded>, Option<Abort>) {
        let mut outputs: Vec<layer::Decoded> = Vec::with_capacity(self.layers.len());
        let mut abort = None;
        for layer in self.layers.iter().rev() {
            let decoded = match outputs.last() {
                None => self.physical().decode(frame),
                Some(below) => layer.decode(&below.symbols),
            };
            if abort.is_none() && layer.policy == Policy::FailFast {
                if let Some(position) = decoded.trace.iter().position(|t| t.outcome == Outcome::Uncorrectable) {
                    abort = Some(Abort { layer: layer.name.clone(), position });
                }
            }
            outputs.push(decoded);
        }
        (outputs, abort)
    }

    /// Sends `message` through the stack and `model`, accounting every
    /// symbol at every layer against a noiseless run.
    pub fn transmit(&self, message: &[Symbol], model: &ErrorModel, rng: &TrialRng) -> Result<Transmission, StackError> {
        self.transmit_corrupted(message, |clean| Ok(model.apply(clean, rng)?))
    }

    /// Like [`Stack::transmit`] with an arbitrary corruption of the frame.
    pub fn transmit_corrupted<F>(&self, message: &[Symbol], corrupt: F) -> Result<Transmission, StackError>
    where
        F: FnOnce(&SignalFrame) -> Result<SignalFrame, StackError>,
    {
        let t = self.deliver(message, corrupt)?;
        match t.aborted {
            Some(Abort { layer, position }) => Err(StackError::Aborted { layer, position }),
            None => Ok(t),
        }
    }

    /// Runs a transmission to the end even if a fail-fast layer gives up,
    /// so every layer is accounted. An abort is recorded in
    /// [`Transmission::aborted`] and nothing is delivered.
    pub fn deliver<F>(&self, message: &[Symbol], corrupt: F) -> Result<Transmission, StackError>
    where
        F: FnOnce(&SignalFrame) -> Result<SignalFrame, StackError>,
    {
        let (_, clean) = self.encode(message)?;
        let noisy = corrupt(&clean)?;
        let (reference, _) = self.decode(&clean);
        let (actual, aborted) = self.decode(&noisy);

        let mut layers = Vec::with_capacity(self.layers.len());
        for (depth, layer) in self.layers.iter().rev().enumerate() {
            let inputs = if depth == 0 {
                report::Inputs::Frame { actual: &noisy, reference: &clean }
            } else {
                report::Inputs::Symbols {
                    actual: &actual[depth - 1].symbols,
                    reference: &reference[depth - 1].symbols,
                }
            };
            layers.push(report::account(&layer.name, &actual[depth], &reference[depth].symbols, inputs));
        }
        layers.reverse();
        let top = self.layers.len() - 1;
        Ok(Transmission {
            received: if aborted.is_some() { Vec::new() } else { actual[top].symbols.clone() },
            reference: reference[top].symbols.clone(),
            report: ResidualReport { layers },
            channel_uses: clean.len() * clean.dimension(),
            aborted,
        })
    }
}

/// Free-function form of [`Stack::transmit`].
pub fn transmit(stack: &Stack, message: &[Symbol], model: &ErrorModel, rng: &TrialRng) -> Result<Transmission, StackError> {
    stack.transmit(message, model, rng)
}
