//! Receiver-side error functions and their identification by probing.

use serde::{Deserialize, Serialize};

use crate::channel::Permutation;

use super::FeedbackError;

/// How the receiver distorts what it is sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ErrorFunction {
    Identity,
    /// `x -> a x + b`
    Affine { a: f64, b: f64 },
    /// Symbol substitution over `0..n`.
    Remap { mapping: Permutation },
}

impl ErrorFunction {
    pub fn apply(&self, x: f64) -> Result<f64, FeedbackError> {
        match self {
            ErrorFunction::Identity => Ok(x),
            ErrorFunction::Affine { a, b } => Ok(a * x + b),
            ErrorFunction::Remap { mapping } => {
                let i = symbol_of(x, mapping.len())?;
                Ok(mapping.apply(i).expect("checked range") as f64)
            }
        }
    }

    pub fn inverse(&self) -> Result<ErrorFunction, FeedbackError> {
        match self {
            ErrorFunction::Identity => Ok(ErrorFunction::Identity),
            ErrorFunction::Affine { a, b } => {
                if *a == 0.0 || !a.is_finite() || !b.is_finite() {
                    return Err(FeedbackError::NonInvertible(format!("affine gain {a}")));
                }
                Ok(ErrorFunction::Affine { a: 1.0 / a, b: -b / a })
            }
            ErrorFunction::Remap { mapping } => Ok(ErrorFunction::Remap { mapping: mapping.inverse() }),
        }
    }
}

fn symbol_of(x: f64, n: usize) -> Result<usize, FeedbackError> {
    if x >= 0.0 && x.fract() == 0.0 && (x as usize) < n {
        Ok(x as usize)
    } else {
        Err(FeedbackError::OutsideAlphabet(x))
    }
}

/// The sender's estimate of the receiver's inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseModel {
    pub function: ErrorFunction,
    pub identified: bool,
}

impl Default for InverseModel {
    fn default() -> Self {
        InverseModel { function: ErrorFunction::Identity, identified: false }
    }
}

impl InverseModel {
    pub fn identified(function: ErrorFunction) -> Self {
        InverseModel { function, identified: true }
    }

    pub fn apply(&self, x: f64) -> Result<f64, FeedbackError> {
        self.function.apply(x)
    }

    /// The error function this inverse undoes.
    pub fn forward(&self) -> Result<ErrorFunction, FeedbackError> {
        self.function.inverse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    Affine,
    Remap { alphabet: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub inverse: InverseModel,
    pub probes: usize,
}

/// Excites a passive receiver (`echo` returns what it made of a value) and
/// solves for the inverse of its error function.
///
/// Affine receivers are probed at 0 and 1; remapping receivers once per
/// alphabet symbol.
pub fn identify_error_model<F>(mut echo: F, family: Family) -> Result<Identification, FeedbackError>
where
    F: FnMut(f64) -> Result<f64, FeedbackError>,
{
    match family {
        Family::Affine => {
            let b = echo(0.0)?;
            let a = echo(1.0)? - b;
            if a == 0.0 {
                return Err(FeedbackError::NonInvertible("e(1) = e(0)".into()));
            }
            let function = if a == 1.0 && b == 0.0 {
                ErrorFunction::Identity
            } else {
                ErrorFunction::Affine { a, b }.inverse()?
            };
            Ok(Identification { inverse: InverseModel::identified(function), probes: 2 })
        }
        Family::Remap { alphabet } => {
            let images = (0..alphabet)
                .map(|s| echo(s as f64).and_then(|y| symbol_of(y, alphabet)))
                .collect::<Result<Vec<_>, _>>()?;
            let mapping = Permutation::new(images)
                .map_err(|e| FeedbackError::NonInvertible(e.to_string()))?;
            let function = ErrorFunction::Remap { mapping: mapping.inverse() };
            Ok(Identification { inverse: InverseModel::identified(function), probes: alphabet })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_receiver_is_undone() {
        let e = ErrorFunction::Affine { a: 1.0, b: 2.0 };
        let id = identify_error_model(|x| e.apply(x), Family::Affine).unwrap();
        assert_eq!(id.probes, 2);
        assert_eq!(id.inverse.function, ErrorFunction::Affine { a: 1.0, b: -2.0 });
        assert!(id.inverse.identified);
        assert_eq!(e.apply(5.0).unwrap(), 7.0);
    }

    #[test]
    fn identity_receiver() {
        let id = identify_error_model(|x| ErrorFunction::Identity.apply(x), Family::Affine).unwrap();
        assert_eq!(id.inverse.function, ErrorFunction::Identity);
    }

    #[test]
    fn flat_receiver_fails_explicitly() {
        let e = ErrorFunction::Affine { a: 0.0, b: 4.0 };
        assert!(matches!(
            identify_error_model(|x| e.apply(x), Family::Affine),
            Err(FeedbackError::NonInvertible(_))
        ));
    }

    #[test]
    fn remap_probes_every_symbol() {
        let e = ErrorFunction::Remap { mapping: Permutation::new(vec![2, 0, 3, 1]).unwrap() };
        let id = identify_error_model(|x| e.apply(x), Family::Remap { alphabet: 4 }).unwrap();
        assert_eq!(id.probes, 4);
        for s in 0..4 {
            assert_eq!(id.inverse.apply(e.apply(s as f64).unwrap()).unwrap(), s as f64);
        }
        assert!(e.apply(4.0).is_err());
        assert!(e.apply(1.5).is_err());
    }
}
