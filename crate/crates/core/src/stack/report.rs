//! Per-layer residual-error accounting.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::channel::SignalFrame;
use crate::codespace::SignalVector;

use super::layer::{Decoded, Outcome};
use super::Symbol;

/// Counts for one layer over one or more runs.
///
/// Every output position is classified by whether its input was damaged,
/// whether its output is wrong, and whether the layer claimed to correct
/// it. A damaged input that comes out right, or that the layer acted on,
/// counts as corrected; a wrong output that the layer acted on, or whose
/// input was fine, counts as introduced. A miscorrection is therefore both,
/// and `errors_out = errors_in - corrected + introduced` always holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerReport {
    pub layer: String,
    /// Output positions accounted (reference length, or longer if extra
    /// symbols appeared).
    pub units: usize,
    pub errors_in: usize,
    pub corrected: usize,
    pub introduced: usize,
    pub errors_out: usize,
}

impl LayerReport {
    pub fn is_conserved(&self) -> bool {
        self.errors_in + self.introduced == self.errors_out + self.corrected
    }
}

impl AddAssign<&LayerReport> for LayerReport {
    fn add_assign(&mut self, other: &LayerReport) {
        if self.layer.is_empty() {
            self.layer = other.layer.clone();
        }
        self.units += other.units;
        self.errors_in += other.errors_in;
        self.corrected += other.corrected;
        self.introduced += other.introduced;
        self.errors_out += other.errors_out;
    }
}

/// Layer reports ordered top to bottom.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub layers: Vec<LayerReport>,
}

impl ResidualReport {
    /// Adds another report layer by layer.
    pub fn merge(&mut self, other: &ResidualReport) {
        if self.layers.is_empty() {
            self.layers = other.layers.iter().map(|l| LayerReport { layer: l.layer.clone(), ..Default::default() }).collect();
        }
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            *mine += theirs;
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["layer", "errors_in", "corrected", "introduced", "errors_out"])
            .expect("in-memory write");
        for l in &self.layers {
            w.write_record([
                l.layer.clone(),
                l.errors_in.to_string(),
                l.corrected.to_string(),
                l.introduced.to_string(),
                l.errors_out.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

pub(crate) enum Inputs<'a> {
    Frame { actual: &'a SignalFrame, reference: &'a SignalFrame },
    Symbols { actual: &'a [Symbol], reference: &'a [Symbol] },
}

/// Hard decision per component, so analog noise that stays on the right
/// side of the threshold does not count as damage.
fn hard(v: &SignalVector) -> Vec<Option<i64>> {
    v.components().iter().map(|c| c.map(|x| x.round() as i64)).collect()
}

impl Inputs<'_> {
    fn damaged(&self, range: std::ops::Range<usize>) -> bool {
        match self {
            Inputs::Frame { actual, reference } => {
                let (a, r) = (actual.vectors(), reference.vectors());
                range.end > r.len() || range.end > a.len() || a[range.clone()].iter().zip(&r[range]).any(|(x, y)| hard(x) != hard(y))
            }
            Inputs::Symbols { actual, reference } => {
                range.end > reference.len() || range.end > actual.len() || actual[range.clone()] != reference[range]
            }
        }
    }

    fn length_changed(&self) -> bool {
        match self {
            Inputs::Frame { actual, reference } => actual.len() != reference.len(),
            Inputs::Symbols { actual, reference } => actual.len() != reference.len(),
        }
    }
}

pub(crate) fn account(name: &str, actual: &Decoded, reference: &[Symbol], inputs: Inputs<'_>) -> LayerReport {
    let units = actual.symbols.len().max(reference.len());
    let shifted = inputs.length_changed();
    let mut r = LayerReport { layer: name.to_string(), units, ..Default::default() };
    for j in 0..units {
        let out_err = actual.symbols.get(j) != reference.get(j);
        let (in_err, acted) = match actual.trace.get(j) {
            // once the input length changed, positions after the loss no
            // longer line up with the reference
            Some(t) => (inputs.damaged(t.input.clone()) || (shifted && out_err), t.outcome == Outcome::Corrected),
            None => (true, false),
        };
        r.errors_in += usize::from(in_err);
        r.errors_out += usize::from(out_err);
        r.corrected += usize::from(in_err && (!out_err || acted));
        r.introduced += usize::from(out_err && (acted || !in_err));
    }
    r
}
