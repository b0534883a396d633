//! Per-dimension reliability classes from observed flip counts.

use serde::{Deserialize, Serialize};

use super::CodespaceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReliabilityClass {
    UnconditionallyReliable,
    ConditionallyReliable,
    ConditionallyUnreliable,
    UnconditionallyUnreliable,
}

/// Upper flip-rate bounds for the first three classes; anything above the
/// last bound is unconditionally unreliable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityThresholds {
    pub reliable: f64,
    pub conditional: f64,
    pub unreliable: f64,
}

impl Default for ReliabilityThresholds {
    fn default() -> Self {
        ReliabilityThresholds {
            reliable: 0.001,
            conditional: 0.1,
            unreliable: 0.4,
        }
    }
}

impl ReliabilityThresholds {
    pub fn classify(&self, rate: f64) -> ReliabilityClass {
        if rate <= self.reliable {
            ReliabilityClass::UnconditionallyReliable
        } else if rate <= self.conditional {
            ReliabilityClass::ConditionallyReliable
        } else if rate <= self.unreliable {
            ReliabilityClass::ConditionallyUnreliable
        } else {
            ReliabilityClass::UnconditionallyUnreliable
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityProfile {
    pub rates: Vec<f64>,
    pub classes: Vec<ReliabilityClass>,
}

pub fn reliability_profile(
    flips: &[u64],
    trials: u64,
    thresholds: ReliabilityThresholds,
) -> Result<ReliabilityProfile, CodespaceError> {
    if trials == 0 {
        return Err(CodespaceError::NoTrials);
    }
    if let Some(&f) = flips.iter().find(|&&f| f > trials) {
        return Err(CodespaceError::FlipsExceedTrials { flips: f, trials });
    }
    let rates: Vec<f64> = flips.iter().map(|&f| f as f64 / trials as f64).collect();
    let classes = rates.iter().map(|&r| thresholds.classify(r)).collect();
    Ok(ReliabilityProfile { rates, classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn extreme_rates() {
        let p = reliability_profile(&[0, 5000], 10_000, Default::default()).unwrap();
        assert_eq!(
            p.classes,
            vec![
                ReliabilityClass::UnconditionallyReliable,
                ReliabilityClass::UnconditionallyUnreliable
            ]
        );
        assert!(matches!(
            reliability_profile(&[0], 0, Default::default()),
            Err(CodespaceError::NoTrials)
        ));
    }

    #[test]
    fn seeded_flips_at_five_percent() {
        let n = 10_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let flips = (0..n).filter(|_| rng.random_bool(0.05)).count() as u64;
        let p = reliability_profile(&[flips], n, Default::default()).unwrap();
        let sigma = (0.05 * 0.95 / n as f64).sqrt();
        assert!((p.rates[0] - 0.05).abs() <= 3.0 * sigma);
        assert_eq!(p.classes[0], ReliabilityClass::ConditionallyReliable);
    }

    #[test]
    fn class_order_follows_rate_order() {
        let t = ReliabilityThresholds::default();
        let mut last = t.classify(0.0);
        for i in 0..=1000 {
            let c = t.classify(i as f64 / 1000.0);
            assert!(c >= last);
            last = c;
        }
    }
}
