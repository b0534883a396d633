//! Redundancy accounting and length-vs-disturbance recoding.

use serde::{Deserialize, Serialize};

use super::CodespaceError;

/// Net bits diluted into gross bits, and how many of them may be lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyBudget {
    pub net_bits: u64,
    pub gross_bits: u64,
    /// Compensable bits: `gross - net`, i.e. `(x / r) - x`.
    pub compensable: u64,
}

impl RedundancyBudget {
    /// Net information per transmitted technical bit.
    pub fn dilution(&self) -> f64 {
        self.net_bits as f64 / self.gross_bits as f64
    }
}

pub fn redundancy_budget(net_bits: u64, gross_bits: u64) -> Result<RedundancyBudget, CodespaceError> {
    if net_bits == 0 {
        return Err(CodespaceError::ZeroNetBits);
    }
    if gross_bits < net_bits {
        return Err(CodespaceError::GrossBelowNet { net: net_bits, gross: gross_bits });
    }
    Ok(RedundancyBudget {
        net_bits,
        gross_bits,
        compensable: gross_bits - net_bits,
    })
}

/// Upper limit on repetition factors searched by [`adaptive_recode`].
pub const MAX_REPETITION: u32 = 1 << 20;

/// Probability that a majority vote over `k` independent copies, each
/// flipped with probability `p`, comes out wrong. Ties (even `k`) count as
/// errors.
pub fn majority_residual(k: u32, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    // sum over i > k/2 of C(k,i) p^i (1-p)^(k-i), in log space
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let first = k / 2 + if k % 2 == 0 { 0 } else { 1 };
    let mut log_c = ln_choose(k, first);
    let mut total = 0.0;
    for i in first..=k {
        let term = (log_c + f64::from(i) * lp + f64::from(k - i) * lq).exp();
        total += term;
        if i < k {
            log_c += (f64::from(k - i)).ln() - (f64::from(i + 1)).ln();
        }
        if term < total * 1e-18 && i > first + 8 {
            break;
        }
    }
    total.min(1.0)
}

fn ln_choose(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| (f64::from(n - i)).ln() - (f64::from(i + 1)).ln()).sum()
}

/// Per-symbol odd repetition factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecodePlan {
    pub target: f64,
    pub factors: Vec<(String, u32)>,
}

impl RecodePlan {
    pub fn factor(&self, symbol: &str) -> Option<u32> {
        self.factors
            .iter()
            .find(|(s, _)| s == symbol)
            .map(|(_, k)| *k)
    }
}

/// Smallest odd repetition count whose majority residual at `rate` meets `target`.
pub fn repetition_for(rate: f64, target: f64) -> Option<u32> {
    let mut k = 1;
    while k <= MAX_REPETITION {
        if majority_residual(k, rate) <= target {
            return Some(k);
        }
        k += 2;
    }
    None
}

/// Lengthens each symbol's code in proportion to how disturbed it is observed to be.
pub fn adaptive_recode(rates: &[(String, f64)], target: f64) -> Result<RecodePlan, CodespaceError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(CodespaceError::InvalidProbability(target));
    }
    let mut factors = Vec::with_capacity(rates.len());
    for (symbol, rate) in rates {
        if !(*rate >= 0.0 && *rate < 1.0) {
            return Err(CodespaceError::InvalidProbability(*rate));
        }
        if *rate >= 0.5 {
            return Err(CodespaceError::Unprotectable {
                symbol: symbol.clone(),
                rate: *rate,
            });
        }
        let k = repetition_for(*rate, target).ok_or_else(|| CodespaceError::Unprotectable {
            symbol: symbol.clone(),
            rate: *rate,
        })?;
        factors.push((symbol.clone(), k));
    }
    Ok(RecodePlan { target, factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn budget_examples() {
        assert_eq!(redundancy_budget(100, 120).unwrap().compensable, 20);
        assert_eq!(redundancy_budget(4, 7).unwrap().compensable, 3);
        assert_eq!(redundancy_budget(9, 9).unwrap().compensable, 0);
        assert!((redundancy_budget(4, 7).unwrap().dilution() - 4.0 / 7.0).abs() < 1e-15);
        assert!(matches!(
            redundancy_budget(8, 7),
            Err(CodespaceError::GrossBelowNet { .. })
        ));
    }

    /// Direct summation with exact binomial coefficients.
    fn residual_oracle(k: u32, p: f64) -> f64 {
        let mut total = 0.0;
        for i in (k / 2 + 1)..=k {
            let mut c = 1.0f64;
            for j in 0..i {
                c = c * f64::from(k - j) / f64::from(j + 1);
            }
            total += c * p.powi(i as i32) * (1.0 - p).powi((k - i) as i32);
        }
        total
    }

    #[test]
    fn residual_matches_direct_summation() {
        for k in [1u32, 3, 5, 7, 9, 15, 21] {
            for p in [0.001, 0.01, 0.1, 0.3, 0.45] {
                let a = majority_residual(k, p);
                let b = residual_oracle(k, p);
                assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-300, "k={k} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn noisier_symbols_get_longer_codes() {
        let plan = adaptive_recode(&[("A".into(), 0.01), ("B".into(), 0.1)], 1e-3).unwrap();
        let (ka, kb) = (plan.factor("A").unwrap(), plan.factor("B").unwrap());
        assert!(kb > ka);
        // each is the smallest odd k meeting the target
        for (rate, k) in [(0.01, ka), (0.1, kb)] {
            assert!(residual_oracle(k, rate) <= 1e-3);
            if k > 1 {
                assert!(residual_oracle(k - 2, rate) > 1e-3);
            }
        }
        assert_eq!((ka, kb), (3, 9));
    }

    #[test]
    fn recode_edge_cases() {
        let plan = adaptive_recode(&[("z".into(), 0.0)], 1e-6).unwrap();
        assert_eq!(plan.factor("z"), Some(1));
        let uniform = adaptive_recode(
            &[("a".into(), 0.05), ("b".into(), 0.05), ("c".into(), 0.05)],
            1e-4,
        )
        .unwrap();
        assert!(uniform.factors.windows(2).all(|w| w[0].1 == w[1].1));
        assert!(matches!(
            adaptive_recode(&[("x".into(), 0.5)], 1e-3),
            Err(CodespaceError::Unprotectable { .. })
        ));
        assert!(adaptive_recode(&[("x".into(), 0.1)], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn recode_is_monotone(a in 0.0f64..0.45, b in 0.0f64..0.45, target in 1e-6f64..0.1) {
            let plan = adaptive_recode(&[("a".into(), a), ("b".into(), b)], target).unwrap();
            let (ka, kb) = (plan.factor("a").unwrap(), plan.factor("b").unwrap());
            prop_assert!(ka % 2 == 1 && kb % 2 == 1);
            if a <= b { prop_assert!(ka <= kb); } else { prop_assert!(ka >= kb); }
        }

        #[test]
        fn budget_identity(x in 1u64..1_000_000, extra in 0u64..1_000_000) {
            let b = redundancy_budget(x, x + extra).unwrap();
            prop_assert_eq!(b.compensable + x, b.gross_bits);
            prop_assert!(b.dilution() <= 1.0);
        }
    }
}
