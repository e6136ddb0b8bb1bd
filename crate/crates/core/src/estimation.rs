//! Empirical price store and the confidence-biased reward/cost estimates.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Multiset of observed competing prices.
///
/// Samples are aggregated per distinct price and always summed in ascending
/// price order, so every estimate is a function of the multiset alone and is
/// bit-identical under any insertion order.
#[derive(Debug, Clone, Default)]
pub struct SampleStore {
    // key: bit pattern of a non-negative f64, which orders like the value
    counts: BTreeMap<u64, u64>,
    count: usize,
}

impl SampleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, price: f64) {
        debug_assert!(price >= 0.0 && price.is_finite());
        let price = if price == 0.0 { 0.0 } else { price };
        *self.counts.entry(price.to_bits()).or_insert(0) += 1;
        self.count += 1;
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Number of samples `<= v` and their sum.
    fn below(&self, v: f64) -> (f64, f64) {
        let mut n = 0u64;
        let mut sum = 0.0;
        for (&bits, &k) in self.counts.range(..=v.max(0.0).to_bits()) {
            n += k;
            sum += k as f64 * f64::from_bits(bits);
        }
        (n as f64, sum)
    }

    /// `(1/n) * sum (v - p)^+`
    pub fn empirical_reward(&self, v: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyStore);
        }
        let (n, sum) = self.below(v);
        Ok((v * n - sum) / self.count as f64)
    }

    /// `(1/n) * sum p * 1[v >= p]`
    pub fn empirical_cost(&self, v: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyStore);
        }
        let (_, sum) = self.below(v);
        Ok(sum / self.count as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.counts
            .iter()
            .flat_map(|(&b, &k)| std::iter::repeat_n(f64::from_bits(b), k as usize))
    }
}

impl FromIterator<f64> for SampleStore {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for p in iter {
            s.push(p);
        }
        s
    }
}

/// DKW confidence radius `sqrt((ln 2 + 2 ln T) / (2 n))`.
pub fn dkw_epsilon(sample_count: usize, horizon: usize) -> Result<f64> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
    }
    if horizon < 2 {
        return Err(Error::InvalidArgument("horizon must be >= 2".into()));
    }
    let num = std::f64::consts::LN_2 + 2.0 * (horizon as f64).ln();
    Ok((num / (2.0 * sample_count as f64)).sqrt())
}

/// Upward-biased reward estimate: empirical mean of `(v - p)^+` plus `eps * v`.
pub fn estimate_reward(v: f64, store: &SampleStore, eps: f64) -> Result<f64> {
    Ok(store.empirical_reward(v)? + eps * v)
}

/// Downward-biased cost estimate: empirical mean of `p * 1[v >= p]` minus
/// `2 * eps * v`. Negative results are returned unclipped.
pub fn estimate_cost(v: f64, store: &SampleStore, eps: f64) -> Result<f64> {
    Ok(store.empirical_cost(v)? - 2.0 * eps * v)
}
