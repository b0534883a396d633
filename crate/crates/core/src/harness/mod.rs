//! Seeded Monte Carlo runs over a stack and an error model, parameter
//! sweeps, and the named demonstration scenarios.

mod config;
mod scenarios;

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ErrorModel, TrialRng};
use crate::feedback::FeedbackError;
use crate::stack::{LayerKind, ResidualReport, Stack, StackError, Symbol};

pub use config::{FeedbackRunConfig, ScenarioConfig, SweepGrid};
pub use scenarios::{run_scenario, Artifact, ScenarioOutput, SCENARIO_NAMES};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at {path}: {reason}")]
    Config { path: String, reason: String },
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
}

impl HarnessError {
    pub(crate) fn config(path: impl Into<String>, reason: impl ToString) -> Self {
        HarnessError::Config { path: path.into(), reason: reason.to_string() }
    }

    /// True for errors caused by the configuration rather than by a run.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config { .. } | HarnessError::UnknownScenario(_))
    }
}

/// z for a two-sided 99% normal interval.
pub const Z99: f64 = 2.576;

/// Half-width of the 99% normal-approximation interval for a binomial
/// proportion with `successes` out of `trials`.
pub fn half_width(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let r = successes as f64 / trials as f64;
    Z99 * (r * (1.0 - r) / trials as f64).sqrt()
}

/// Integer tallies of a batch of trials. Merging is plain addition, so any
/// grouping of batches gives the same totals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    /// Top-level symbols expected (from the noiseless run).
    pub symbols: u64,
    /// Top-level symbols delivered wrong, missing, or erased.
    pub symbol_errors: u64,
    /// Bottom-layer input units, and how many of them the channel damaged.
    pub raw_units: u64,
    pub raw_errors: u64,
    /// Information bits offered by the sender.
    pub net_bits: u64,
    /// Information bits that arrived intact.
    pub delivered_bits: u64,
    pub channel_uses: u64,
    pub aborted: u64,
    pub layers: ResidualReport,
}

impl Tally {
    pub fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.symbols += other.symbols;
        self.symbol_errors += other.symbol_errors;
        self.raw_units += other.raw_units;
        self.raw_errors += other.raw_errors;
        self.net_bits += other.net_bits;
        self.delivered_bits += other.delivered_bits;
        self.channel_uses += other.channel_uses;
        self.aborted += other.aborted;
        self.layers.merge(&other.layers);
        self
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: Option<String>,
    pub value: Option<f64>,
    /// Damaged fraction of bottom-layer units, before any correction.
    pub raw_rate: f64,
    /// Wrong fraction of top-level symbols, after every correction.
    pub residual_rate: f64,
    pub half_width: f64,
    /// Gross channel bits per net information bit.
    pub overhead: f64,
    pub net_info_per_use: f64,
    pub tally: Tally,
}

impl SweepRow {
    pub fn from_tally(param: Option<String>, value: Option<f64>, tally: Tally) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        SweepRow {
            param,
            value,
            raw_rate: ratio(tally.raw_errors, tally.raw_units),
            residual_rate: ratio(tally.symbol_errors, tally.symbols),
            half_width: half_width(tally.symbol_errors, tally.symbols),
            overhead: ratio(tally.channel_uses, tally.net_bits),
            net_info_per_use: ratio(tally.delivered_bits, tally.channel_uses),
            tally,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

const CSV_HEADER: [&str; 16] = [
    "param",
    "value",
    "trials",
    "symbols",
    "symbol_errors",
    "residual_rate",
    "half_width",
    "raw_units",
    "raw_errors",
    "raw_rate",
    "net_bits",
    "channel_uses",
    "overhead",
    "delivered_bits",
    "net_info_per_use",
    "aborted",
];

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            let t = &r.tally;
            w.write_record([
                r.param.clone().unwrap_or_default(),
                r.value.map(|v| v.to_string()).unwrap_or_default(),
                t.trials.to_string(),
                t.symbols.to_string(),
                t.symbol_errors.to_string(),
                r.residual_rate.to_string(),
                r.half_width.to_string(),
                t.raw_units.to_string(),
                t.raw_errors.to_string(),
                r.raw_rate.to_string(),
                t.net_bits.to_string(),
                t.channel_uses.to_string(),
                r.overhead.to_string(),
                t.delivered_bits.to_string(),
                r.net_info_per_use.to_string(),
                t.aborted.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

const WORDS: [&str; 4] = ["yes", "no", "ja", "nein"];

/// A random message suited to the stack's top layer.
fn random_message(stack: &Stack, len: usize, rng: &mut impl Rng) -> Vec<Symbol> {
    let top = &stack.layers()[0];
    (0..len)
        .map(|_| match top.class() {
            LayerKind::Semantic => Symbol::Bool(rng.random_bool(0.5)),
            LayerKind::Framing => Symbol::Word(WORDS[rng.random_range(0..WORDS.len())].to_string()),
            LayerKind::Physical { upper_width } => {
                let max = if upper_width >= 32 { u32::MAX } else { (1u32 << upper_width) - 1 };
                Symbol::Data(rng.random_range(0..=max))
            }
        })
        .collect()
}

/// The message trial `t` sends: random symbols of the kind the stack's top
/// layer takes.
pub fn trial_message(stack: &Stack, len: usize, seed: u64, t: u64) -> Vec<Symbol> {
    random_message(stack, len, &mut TrialRng::new(seed, t).fork(0).rng())
}

fn run_trial(stack: &Stack, model: &ErrorModel, message_len: usize, seed: u64, t: u64) -> Result<Tally, HarnessError> {
    let trial = TrialRng::new(seed, t);
    let message = trial_message(stack, message_len, seed, t);
    let channel = trial.fork(1);
    let tx = stack.deliver(&message, |clean| Ok(model.apply(clean, &channel)?))?;
    let mut tally = Tally { trials: 1, aborted: u64::from(tx.aborted.is_some()), ..Tally::default() };
    tally.symbols = tx.reference.len() as u64;
    for (i, expected) in tx.reference.iter().enumerate() {
        if tx.received.get(i) == Some(expected) {
            tally.delivered_bits += message.get(i).map_or(0, |s| u64::from(stack.symbol_bits(s)));
        } else {
            tally.symbol_errors += 1;
        }
    }
    tally.net_bits = message.iter().map(|s| u64::from(stack.symbol_bits(s))).sum();
    tally.channel_uses = tx.channel_uses as u64;
    let bottom = tx.report.layers.last().expect("stacks have a physical layer");
    tally.raw_units = bottom.units as u64;
    tally.raw_errors = bottom.errors_in as u64;
    tally.layers = tx.report;
    Ok(tally)
}

/// Runs `config.trials` independent transmissions under `model` and sums
/// their tallies. Trial `t` draws everything from `(config.seed, t)`, so
/// the result does not depend on how many threads run it.
pub fn run_trials(config: &ScenarioConfig, stack: &Stack, model: &ErrorModel) -> Result<Tally, HarnessError> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(stack, model, config.message_len, config.seed, t))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// One report row for the config's own error model.
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<SweepRow, HarnessError> {
    config.validate()?;
    let stack = Stack::from_spec(&config.stack)?;
    Ok(SweepRow::from_tally(None, None, run_trials(config, &stack, &config.model)?))
}

/// One row per grid value, in grid order, each using the config's seed.
pub fn sweep(config: &ScenarioConfig, grid: &SweepGrid) -> Result<SweepReport, HarnessError> {
    config.validate()?;
    grid.validate(&config.model)?;
    let stack = Stack::from_spec(&config.stack)?;
    let rows = grid
        .values
        .iter()
        .map(|&value| {
            let mut model = config.model.clone();
            model.set_param(&grid.param, value);
            model.validate().map_err(|e| HarnessError::config("sweep.values", e))?;
            let tally = run_trials(config, &stack, &model)?;
            Ok(SweepRow::from_tally(Some(grid.param.clone()), Some(value), tally))
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(SweepReport { seed: config.seed, rows })
}

/// The config's sweep if it has one, otherwise a single row.
pub fn run_config(config: &ScenarioConfig) -> Result<SweepReport, HarnessError> {
    match &config.sweep {
        Some(grid) => sweep(config, grid),
        None => Ok(SweepReport { seed: config.seed, rows: vec![run_monte_carlo(config)?] }),
    }
}

/// Writes each artifact into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), HarnessError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| HarnessError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(io(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stack::{CodeSpec, LayerSpec, Policy, StackSpec};

    pub(crate) fn physical(code: CodeSpec, upper_width: u32) -> StackSpec {
        StackSpec {
            profile: None,
            layers: vec![LayerSpec::Physical { code, upper_width, radius: None, policy: Policy::PassResidual }],
        }
    }

    fn config(model: ErrorModel, trials: u64) -> ScenarioConfig {
        ScenarioConfig {
            seed: 9,
            trials,
            stack: physical(CodeSpec::Hamming74, 4),
            model,
            message_len: 1,
            sweep: None,
            out: None,
        }
    }

    #[test]
    fn null_model_is_error_free() {
        let row = run_monte_carlo(&config(ErrorModel::None, 200)).unwrap();
        assert_eq!(row.tally.symbols, 200);
        assert_eq!(row.residual_rate, 0.0);
        assert_eq!(row.raw_rate, 0.0);
        assert_eq!(row.overhead, 7.0 / 4.0);
        assert_eq!(row.net_info_per_use, 4.0 / 7.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let err = run_monte_carlo(&config(ErrorModel::None, 0)).unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref path, .. } if path == "trials"), "{err}");
    }

    #[test]
    fn tallies_merge_in_any_grouping() {
        let c = config(ErrorModel::RandomFlip { p: 0.1 }, 1);
        let stack = Stack::from_spec(&c.stack).unwrap();
        let model = c.model.clone();
        let parts: Vec<Tally> = (0..12).map(|t| run_trial(&stack, &model, 1, c.seed, t).unwrap()).collect();
        let left = parts.iter().cloned().fold(Tally::default(), Tally::merge);
        let right = parts.iter().cloned().rev().fold(Tally::default(), |a, b| b.merge(a));
        let grouped = parts[..5]
            .iter()
            .cloned()
            .fold(Tally::default(), Tally::merge)
            .merge(parts[5..].iter().cloned().fold(Tally::default(), Tally::merge));
        assert_eq!(left, right);
        assert_eq!(left, grouped);
    }

    #[test]
    fn null_sweep_rows_follow_grid() {
        let mut c = config(ErrorModel::None, 50);
        c.model = ErrorModel::RandomFlip { p: 0.0 };
        let grid = SweepGrid { param: "p".into(), values: vec![0.0, 0.01, 0.1] };
        let report = sweep(&c, &grid).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.rows[0].residual_rate, 0.0);
        let values: Vec<f64> = report.rows.iter().map(|r| r.value.unwrap()).collect();
        assert_eq!(values, grid.values);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("param,value,trials,"));
    }

    #[test]
    fn half_width_recomputes() {
        assert_eq!(half_width(0, 100), 0.0);
        assert!((half_width(50, 100) - 2.576 * 0.05).abs() < 1e-12);
    }
}
