//! First-order Markov context pools and the bit priors they cascade down.

use serde::{Deserialize, Serialize};

use super::StackError;

/// Transition counts over a layer alphabet, with add-one smoothed priors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextPool {
    alphabet: Vec<String>,
    /// Bit pattern of each symbol on the layer below, if known.
    encodings: Option<Vec<Vec<u8>>>,
    /// `transitions[prev][next]`
    transitions: Vec<Vec<u64>>,
    /// Occurrences of each symbol, for priors without a context.
    marginal: Vec<u64>,
    previous: Option<usize>,
}

impl ContextPool {
    pub fn new<S: Into<String>>(alphabet: impl IntoIterator<Item = S>) -> Self {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        let n = alphabet.len();
        ContextPool {
            alphabet,
            encodings: None,
            transitions: vec![vec![0; n]; n],
            marginal: vec![0; n],
            previous: None,
        }
    }

    /// Attaches the bit pattern each symbol is sent as on the layer below.
    pub fn with_encodings(mut self, encodings: Vec<Vec<u8>>) -> Result<Self, StackError> {
        if encodings.len() != self.alphabet.len() || encodings.iter().flatten().any(|&b| b > 1) {
            return Err(StackError::Config("one 0/1 pattern per symbol expected".into()));
        }
        self.encodings = Some(encodings);
        Ok(self)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn index(&self, symbol: &str) -> Result<usize, StackError> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| StackError::UnknownSymbol(symbol.to_string()))
    }

    pub fn observations(&self) -> u64 {
        self.marginal.iter().sum()
    }

    pub fn previous(&self) -> Option<usize> {
        self.previous
    }

    /// Forgets the running context without touching the counts.
    pub fn reset_context(&mut self) {
        self.previous = None;
    }

    pub fn observe_index(&mut self, symbol: usize) {
        if let Some(prev) = self.previous {
            self.transitions[prev][symbol] += 1;
        }
        self.marginal[symbol] += 1;
        self.previous = Some(symbol);
    }

    pub fn observe(&mut self, symbol: &str) -> Result<(), StackError> {
        let i = self.index(symbol)?;
        self.observe_index(i);
        Ok(())
    }

    /// Smoothed distribution of the next symbol given `context` (or the
    /// marginal distribution without one). Sums to 1.
    pub fn priors(&self, context: Option<usize>) -> Vec<f64> {
        let counts = match context {
            Some(prev) => &self.transitions[prev],
            None => &self.marginal,
        };
        let total: u64 = counts.iter().sum::<u64>() + counts.len() as u64;
        counts.iter().map(|&c| (c + 1) as f64 / total as f64).collect()
    }

    /// `[P(next bit = 0), P(next bit = 1)]` for the bit after `prefix`
    /// within the symbol that follows `context`.
    ///
    /// Symbols whose encoding does not extend `prefix` drop out; the rest
    /// keep their pool priors. With no observations, or no symbol left,
    /// both bits are equally likely.
    pub fn cascade_priors(&self, context: Option<usize>, prefix: &[u8]) -> Result<[f64; 2], StackError> {
        if self.observations() == 0 {
            self.encodings()?;
            return Ok([0.5, 0.5]);
        }
        self.cascade_over(&self.priors(context), prefix)
    }

    /// Next-symbol distribution when the previous symbol is only known as a
    /// belief (one weight per symbol, summing to 1).
    pub fn predictive(&self, belief: &[f64]) -> Result<Vec<f64>, StackError> {
        if belief.len() != self.alphabet.len() {
            return Err(StackError::Config(format!("belief over {} symbols, pool has {}", belief.len(), self.alphabet.len())));
        }
        let mut out = vec![0.0; self.alphabet.len()];
        for (j, &w) in belief.iter().enumerate() {
            if w > 0.0 {
                for (o, p) in out.iter_mut().zip(self.priors(Some(j))) {
                    *o += w * p;
                }
            }
        }
        Ok(out)
    }

    /// Like [`cascade_priors`](Self::cascade_priors), for an arbitrary
    /// distribution over the next symbol.
    pub fn cascade_over(&self, next: &[f64], prefix: &[u8]) -> Result<[f64; 2], StackError> {
        let encodings = self.encodings()?;
        let mut mass = [0.0; 2];
        for (p, code) in next.iter().zip(encodings) {
            if code.len() > prefix.len() && code.starts_with(prefix) {
                mass[code[prefix.len()] as usize] += p;
            }
        }
        let total = mass[0] + mass[1];
        if total == 0.0 {
            return Ok([0.5, 0.5]);
        }
        Ok([mass[0] / total, mass[1] / total])
    }

    fn encodings(&self) -> Result<&[Vec<u8>], StackError> {
        self.encodings.as_deref().ok_or_else(|| StackError::Config("pool has no symbol encodings".into()))
    }

    /// Adds another pool's counts; the running context is kept.
    pub fn merge(&mut self, other: &ContextPool) -> Result<(), StackError> {
        if self.alphabet != other.alphabet {
            return Err(StackError::AlphabetMismatch);
        }
        for (mine, theirs) in self.transitions.iter_mut().zip(&other.transitions) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        for (a, b) in self.marginal.iter_mut().zip(&other.marginal) {
            *a += b;
        }
        Ok(())
    }
}

/// Records `symbol` as following the previously observed one.
pub fn update_pool(mut pool: ContextPool, symbol: &str) -> Result<ContextPool, StackError> {
    pool.observe(symbol)?;
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alternating_stream_priors() {
        let mut pool = ContextPool::new(["A", "B"]);
        for s in ["A", "B", "A", "B", "A"] {
            pool = update_pool(pool, s).unwrap();
        }
        let a = pool.index("A").unwrap();
        let p = pool.priors(Some(a));
        assert_eq!(p, vec![0.25, 0.75]);
        assert!(update_pool(pool, "C").is_err());
    }

    #[test]
    fn empty_pool_is_uniform() {
        let pool = ContextPool::new(["A", "B", "C", "D"]);
        assert_eq!(pool.priors(Some(1)), vec![0.25; 4]);
        assert_eq!(pool.priors(None), vec![0.25; 4]);
        let pool = pool.with_encodings(vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(pool.cascade_priors(None, &[1]).unwrap(), [0.5, 0.5]);
    }

    #[test]
    fn expected_next_bit() {
        let mut pool = ContextPool::new(["A", "B"]).with_encodings(vec![vec![0, 1, 0], vec![1, 0, 1]]).unwrap();
        for _ in 0..50 {
            pool.observe("A").unwrap();
            pool.observe("B").unwrap();
        }
        let a = pool.index("A").unwrap();
        assert_eq!(pool.cascade_priors(Some(a), &[1, 0]).unwrap(), [0.0, 1.0]);
        // no symbol starts with 11
        assert_eq!(pool.cascade_priors(Some(a), &[1, 1]).unwrap(), [0.5, 0.5]);
    }

    #[test]
    fn symmetric_successors_split_evenly() {
        let mut pool = ContextPool::new(["A", "B", "C"])
            .with_encodings(vec![vec![0, 0, 0], vec![1, 0, 1], vec![1, 0, 0]])
            .unwrap();
        for s in ["A", "B", "A", "C", "A", "B", "A", "C"] {
            pool.observe(s).unwrap();
        }
        let a = pool.index("A").unwrap();
        let [p0, p1] = pool.cascade_priors(Some(a), &[1, 0]).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn merge_is_count_addition() {
        let mut x = ContextPool::new(["A", "B"]);
        let mut y = ContextPool::new(["A", "B"]);
        for s in ["A", "B", "B"] {
            x.observe(s).unwrap();
        }
        for s in ["B", "A", "A"] {
            y.observe(s).unwrap();
        }
        let mut xy = x.clone();
        xy.merge(&y).unwrap();
        let mut yx = y.clone();
        yx.merge(&x).unwrap();
        assert_eq!(xy.priors(Some(0)), yx.priors(Some(0)));
        assert_eq!(xy.observations(), 6);
        assert!(xy.merge(&ContextPool::new(["Z"])).is_err());
    }

    #[test]
    fn learned_priors_approach_the_generating_chain() {
        let truth = [[0.7, 0.2, 0.1], [0.1, 0.1, 0.8], [0.5, 0.25, 0.25]];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut pool = ContextPool::new(["A", "B", "C"]);
        let mut state = 0usize;
        for _ in 0..100_000 {
            pool.observe_index(state);
            let u: f64 = rng.random();
            let row = truth[state];
            state = if u < row[0] { 0 } else if u < row[0] + row[1] { 1 } else { 2 };
        }
        for (s, row) in truth.iter().enumerate() {
            let p = pool.priors(Some(s));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (a, b) in p.iter().zip(row) {
                assert!((a - b).abs() < 0.02, "{p:?} vs {row:?}");
            }
        }
    }
}
