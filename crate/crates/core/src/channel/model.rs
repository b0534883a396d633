//! Disturbers: seeded error models that corrupt signal frames.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ChannelError, SignalFrame, TrialRng};

/// A bijection over the symbol alphabet `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, ChannelError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(ChannelError::NotABijection(images));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// `i -> (i + shift) mod n`.
    pub fn cyclic_shift(n: usize, shift: usize) -> Self {
        Permutation((0..n).map(|i| (i + shift) % n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, symbol: usize) -> Option<usize> {
        self.0.get(symbol).copied()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Permutation) -> Self {
        Permutation(first.0.iter().map(|&i| self.0[i]).collect())
    }

    /// All `n!` permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if prefix.len() == used.len() {
                out.push(Permutation(prefix.clone()));
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = ChannelError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// A composable disturber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ErrorModel {
    /// The null disturber.
    None,
    /// Toggles each component (`v -> 1 - v`) with probability `p`.
    RandomFlip { p: f64 },
    /// At each component position a burst starts with probability
    /// `p_start` and flips `length` consecutive components.
    Burst { p_start: f64, length: usize },
    Gaussian { sigma: f64 },
    Offset { b: f64 },
    /// Substitutes integer-valued symbols `s -> mapping[s]`.
    Remap { mapping: Permutation },
    /// Deletes whole vectors.
    Omission { p_drop: f64 },
    /// Marks components erased.
    Erasure { p_erase: f64 },
    /// Stages applied left to right, each on its own sub-stream.
    Compose { models: Vec<ErrorModel> },
}

fn check_probability(path: &str, p: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            path: path.to_string(),
            reason: format!("probability {p} outside [0, 1]"),
        })
    }
}

fn flip(v: f64) -> f64 {
    1.0 - v
}

pub fn compose(models: Vec<ErrorModel>) -> Result<ErrorModel, ChannelError> {
    if models.is_empty() {
        return Err(ChannelError::EmptyCompose);
    }
    Ok(ErrorModel::Compose { models })
}

impl ErrorModel {
    /// Checks parameter ranges; errors carry the offending field path.
    pub fn validate(&self) -> Result<(), ChannelError> {
        self.validate_at("model")
    }

    fn validate_at(&self, path: &str) -> Result<(), ChannelError> {
        let bad = |field: &str, reason: String| ChannelError::InvalidParameter {
            path: format!("{path}.{field}"),
            reason,
        };
        match self {
            ErrorModel::None | ErrorModel::Remap { .. } => Ok(()),
            ErrorModel::RandomFlip { p } => check_probability(&format!("{path}.p"), *p),
            ErrorModel::Burst { p_start, length } => {
                check_probability(&format!("{path}.p_start"), *p_start)?;
                if *length == 0 {
                    return Err(bad("length", "burst length must be positive".into()));
                }
                Ok(())
            }
            ErrorModel::Gaussian { sigma } => {
                if *sigma >= 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(bad("sigma", format!("deviation {sigma} must be finite and >= 0")))
                }
            }
            ErrorModel::Offset { b } => {
                if b.is_finite() {
                    Ok(())
                } else {
                    Err(bad("b", "offset must be finite".into()))
                }
            }
            ErrorModel::Omission { p_drop } => check_probability(&format!("{path}.p_drop"), *p_drop),
            ErrorModel::Erasure { p_erase } => {
                check_probability(&format!("{path}.p_erase"), *p_erase)
            }
            ErrorModel::Compose { models } => {
                if models.is_empty() {
                    return Err(ChannelError::EmptyCompose);
                }
                for (i, m) in models.iter().enumerate() {
                    m.validate_at(&format!("{path}.models[{i}]"))?;
                }
                Ok(())
            }
        }
    }

    /// Sets every parameter named `name` (in nested stages too); returns how
    /// many were set.
    pub fn set_param(&mut self, name: &str, value: f64) -> usize {
        match (self, name) {
            (ErrorModel::RandomFlip { p }, "p")
            | (ErrorModel::Burst { p_start: p, .. }, "p_start")
            | (ErrorModel::Gaussian { sigma: p }, "sigma")
            | (ErrorModel::Offset { b: p }, "b")
            | (ErrorModel::Omission { p_drop: p }, "p_drop")
            | (ErrorModel::Erasure { p_erase: p }, "p_erase") => {
                *p = value;
                1
            }
            (ErrorModel::Burst { length, .. }, "length") => {
                *length = value.max(0.0) as usize;
                1
            }
            (ErrorModel::Compose { models }, _) => {
                models.iter_mut().map(|m| m.set_param(name, value)).sum()
            }
            _ => 0,
        }
    }

    /// Corrupts a copy of `frame`. Pure in `(self, frame, rng)`.
    pub fn apply(&self, frame: &SignalFrame, rng: &TrialRng) -> Result<SignalFrame, ChannelError> {
        let mut out = frame.clone();
        self.apply_in_place(&mut out, rng)?;
        Ok(out)
    }

    fn apply_in_place(&self, frame: &mut SignalFrame, trial: &TrialRng) -> Result<(), ChannelError> {
        let mut rng = trial.rng();
        match self {
            ErrorModel::None => {}
            ErrorModel::RandomFlip { p } => {
                for v in frame.vectors_mut() {
                    for c in v.0.iter_mut() {
                        // draw for every position so erasures don't shift the stream
                        let hit = rng.random_bool(*p);
                        if let (true, Some(x)) = (hit, c.as_mut()) {
                            *x = flip(*x);
                        }
                    }
                }
            }
            ErrorModel::Burst { p_start, length } => {
                let mut remaining = 0usize;
                for v in frame.vectors_mut() {
                    for c in v.0.iter_mut() {
                        if remaining == 0 && rng.random_bool(*p_start) {
                            remaining = *length;
                        }
                        if remaining > 0 {
                            if let Some(x) = c.as_mut() {
                                *x = flip(*x);
                            }
                            remaining -= 1;
                        }
                    }
                }
            }
            ErrorModel::Gaussian { sigma } => {
                let normal = Normal::new(0.0, *sigma).map_err(|e| ChannelError::InvalidParameter {
                    path: "sigma".into(),
                    reason: e.to_string(),
                })?;
                for v in frame.vectors_mut() {
                    for c in v.0.iter_mut() {
                        let n = normal.sample(&mut rng);
                        if let Some(x) = c.as_mut() {
                            *x += n;
                        }
                    }
                }
            }
            ErrorModel::Offset { b } => {
                for v in frame.vectors_mut() {
                    for x in v.0.iter_mut().flatten() {
                        *x += *b;
                    }
                }
            }
            ErrorModel::Remap { mapping } => {
                for v in frame.vectors_mut() {
                    for x in v.0.iter_mut().flatten() {
                        let idx = *x;
                        let image = (idx >= 0.0 && idx.fract() == 0.0)
                            .then(|| mapping.apply(idx as usize))
                            .flatten()
                            .ok_or(ChannelError::OutsideAlphabet {
                                value: idx,
                                size: mapping.len(),
                            })?;
                        *x = image as f64;
                    }
                }
            }
            ErrorModel::Omission { p_drop } => {
                frame.vectors_mut().retain(|_| !rng.random_bool(*p_drop));
            }
            ErrorModel::Erasure { p_erase } => {
                for v in frame.vectors_mut() {
                    for c in v.0.iter_mut() {
                        if rng.random_bool(*p_erase) {
                            *c = None;
                        }
                    }
                }
            }
            ErrorModel::Compose { models } => {
                if models.is_empty() {
                    return Err(ChannelError::EmptyCompose);
                }
                for (i, m) in models.iter().enumerate() {
                    m.apply_in_place(frame, &trial.fork(i as u64))?;
                }
            }
        }
        Ok(())
    }
}
