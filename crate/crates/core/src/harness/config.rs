use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelError, ErrorModel};
use crate::feedback::{Family, InverseModel, Session, SessionConfig};
use crate::stack::{Stack, StackSpec};

use super::HarnessError;

fn default_model() -> ErrorModel {
    ErrorModel::None
}

fn default_message_len() -> usize {
    1
}

/// Everything a Monte Carlo run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub trials: u64,
    pub stack: StackSpec,
    #[serde(default = "default_model")]
    pub model: ErrorModel,
    /// Top-level symbols per trial.
    #[serde(default = "default_message_len")]
    pub message_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    /// Directory for report files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Values to try for one error-model parameter (every parameter of that
/// name, in nested stages too).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub param: String,
    pub values: Vec<f64>,
}

impl SweepGrid {
    pub fn validate(&self, model: &ErrorModel) -> Result<(), HarnessError> {
        if self.values.is_empty() {
            return Err(HarnessError::config("sweep.values", "empty grid"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(HarnessError::config("sweep.values", format!("non-finite value {v}")));
        }
        if model.clone().set_param(&self.param, 0.0) == 0 {
            return Err(HarnessError::config("sweep.param", format!("model has no parameter {:?}", self.param)));
        }
        Ok(())
    }
}

impl ScenarioConfig {
    /// Parses JSON; a malformed field is reported with its path.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(if path == "." { "(root)".to_string() } else { path }, e.into_inner())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::config("trials", "must be at least 1"));
        }
        if self.message_len == 0 {
            return Err(HarnessError::config("message_len", "must be at least 1"));
        }
        self.model.validate().map_err(|e| match e {
            ChannelError::InvalidParameter { path, reason } => HarnessError::Config { path, reason },
            other => HarnessError::config("model", other),
        })?;
        Stack::from_spec(&self.stack).map_err(|e| HarnessError::config("stack", e))?;
        if let Some(grid) = &self.sweep {
            grid.validate(&self.model)?;
        }
        Ok(())
    }
}

/// A feedback session to run for a fixed number of rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackRunConfig {
    pub session: SessionConfig,
    pub rounds: usize,
    /// `[round, amount]` pairs added to the plant.
    #[serde(default)]
    pub disturbances: Vec<(usize, f64)>,
    /// Probe the receiver first; without it the sender assumes identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identify: Option<Family>,
}

impl FeedbackRunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| HarnessError::config(e.path().to_string(), e.into_inner()))
    }

    pub fn run(&self) -> Result<Session, HarnessError> {
        if self.rounds == 0 {
            return Err(HarnessError::config("rounds", "must be at least 1"));
        }
        let mut session =
            Session::new(self.session.clone(), InverseModel::default()).map_err(|e| HarnessError::config("session", e))?;
        if let Some(family) = self.identify {
            session.identify(family)?;
        }
        session.run(self.rounds, &self.disturbances)?;
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "seed": 3,
        "trials": 10,
        "stack": {"layers": [{"kind": "physical", "code": {"type": "hamming74"}, "upper_width": 4}]},
        "model": {"type": "random_flip", "p": 0.01},
        "sweep": {"param": "p", "values": [0.0, 0.1]}
    }"#;

    fn path_of(text: &str) -> String {
        match ScenarioConfig::from_json(text).unwrap_err() {
            HarnessError::Config { path, .. } => path,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn round_trips() {
        let c = ScenarioConfig::from_json(GOOD).unwrap();
        assert_eq!(c.message_len, 1);
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn feedback_run_parses_and_converges() {
        let run = FeedbackRunConfig::from_json(
            r#"{"session": {"reference": 5, "delay": 1, "receiver": {"type": "affine", "a": 1, "b": 2}},
                "rounds": 10, "disturbances": [[4, 1.5]], "identify": {"type": "affine"}}"#,
        )
        .unwrap();
        let session = run.run().unwrap();
        assert_eq!(session.log().len(), 10);
        assert!((session.plant().unwrap() - 5.0).abs() <= 1e-3);
        let bad = FeedbackRunConfig { rounds: 0, ..run };
        assert!(bad.run().unwrap_err().is_config());
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(path_of(&GOOD.replace("0.01", "1.5")), "model.p");
        assert_eq!(path_of(&GOOD.replace("\"trials\": 10", "\"trials\": 0")), "trials");
        assert_eq!(path_of(&GOOD.replace("\"trials\": 10", "\"trials\": \"ten\"")), "trials");
        assert_eq!(path_of(&GOOD.replace("\"param\": \"p\"", "\"param\": \"sigma\"")), "sweep.param");
        assert_eq!(path_of(&GOOD.replace("[0.0, 0.1]", "[]")), "sweep.values");
        assert_eq!(path_of(&GOOD.replace("hamming74", "golay")), "stack.layers[0]");
        assert_eq!(path_of(&GOOD.replace("\"seed\"", "\"sede\"")), "sede");
    }
}
