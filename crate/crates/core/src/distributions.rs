//! Finite-support distributions over values and competing prices.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

/// A probability distribution with finitely many atoms on `[0, ceiling]`.
///
/// Atoms are kept sorted ascending with distinct points. Duplicate points
/// passed to the constructor are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    ceiling: f64,
}

impl DiscreteDistribution {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>, ceiling: f64) -> Result<Self> {
        if !(ceiling.is_finite() && ceiling > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "ceiling must be positive, got {ceiling}"
            )));
        }
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for &(point, weight) in &atoms {
            if !(point.is_finite() && (0.0..=ceiling).contains(&point)) {
                return Err(Error::OutOfRange {
                    what: "atom",
                    value: point,
                    ceiling,
                });
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "negative or non-finite weight {weight}"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (point, weight) in atoms {
            // -0.0 and 0.0 are the same atom
            let point = if point == 0.0 { 0.0 } else { point };
            match merged.last_mut() {
                Some(last) if last.0 == point => last.1 += weight,
                _ => merged.push((point, weight)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let mut acc = 0.0;
        let cumulative = merged
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        Ok(Self {
            atoms: merged,
            cumulative,
            ceiling,
        })
    }

    /// Equal weight on every point.
    pub fn uniform(points: &[f64], ceiling: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let w = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|&p| (p, w)), ceiling)
    }

    pub fn point_mass(point: f64, ceiling: f64) -> Result<Self> {
        Self::new([(point, 1.0)], ceiling)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(p, w)| p * w).sum()
    }

    /// `Pr[X <= x]` (right-continuous).
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.0 <= x)
            .map(|a| a.1)
            .sum()
    }

    /// Draws one atom. Consumes exactly one `f64` from the stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[idx.min(self.atoms.len() - 1)].0
    }

    /// Serializes as one `point weight` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(p, w) in &self.atoms {
            let _ = writeln!(out, "{p} {w}");
        }
        out
    }

    /// Parses `point weight` lines. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str, ceiling: f64) -> Result<Self> {
        let mut atoms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            atoms.push(parse_atom(line, i + 1)?);
        }
        Self::new(atoms, ceiling)
    }
}

pub(crate) fn parse_atom(line: &str, lineno: usize) -> Result<(f64, f64)> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<f64> {
        tok.ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "expected `point weight`".into(),
        })?
        .parse::<f64>()
        .map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })
    };
    let point = parse(it.next())?;
    let weight = parse(it.next())?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line: lineno,
            msg: "trailing tokens after `point weight`".into(),
        });
    }
    Ok((point, weight))
}

/// Expected per-round reward `r(v)` and cost `c(v)` of truthful entry at value
/// `v` against a price distribution. A tie `v == p` wins and pays `p`.
#[derive(Debug, Clone)]
pub struct InterimCurves {
    prices: Vec<(f64, f64)>,
}

impl InterimCurves {
    /// `E[(v - p)^+]`
    pub fn reward(&self, v: f64) -> f64 {
        self.prices
            .iter()
            .take_while(|a| a.0 <= v)
            .map(|&(p, w)| w * (v - p))
            .sum()
    }

    /// `E[p * 1[v >= p]]`
    pub fn cost(&self, v: f64) -> f64 {
        self.prices
            .iter()
            .take_while(|a| a.0 <= v)
            .map(|&(p, w)| w * p)
            .sum()
    }

    /// `Pr[p <= v]`
    pub fn win_probability(&self, v: f64) -> f64 {
        self.prices
            .iter()
            .take_while(|a| a.0 <= v)
            .map(|a| a.1)
            .sum()
    }
}

pub fn interim_curves(prices: &DiscreteDistribution) -> InterimCurves {
    InterimCurves {
        prices: prices.atoms.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn thirds() -> DiscreteDistribution {
        DiscreteDistribution::uniform(&[1.0 / 3.0, 2.0 / 3.0], 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_weights_and_points() {
        assert!(DiscreteDistribution::new([(0.5, 0.4)], 1.0).is_err());
        assert!(DiscreteDistribution::new([(1.5, 1.0)], 1.0).is_err());
        assert!(DiscreteDistribution::new([(0.5, -0.5), (0.2, 1.5)], 1.0).is_err());
        assert!(DiscreteDistribution::new(Vec::new(), 1.0).is_err());
    }

    #[test]
    fn merges_and_sorts() {
        let d = DiscreteDistribution::new([(0.7, 0.25), (0.2, 0.5), (0.7, 0.25)], 1.0).unwrap();
        assert_eq!(d.atoms(), &[(0.2, 0.5), (0.7, 0.5)]);
    }

    #[test]
    fn two_point_sampling_frequency() {
        let d = thirds();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let low = (0..n).filter(|_| d.sample(&mut rng) < 0.5).count() as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((low - 0.5).abs() < 3.0 * sigma, "frequency {low}");
    }

    #[test]
    fn degenerate_sampling() {
        let d = DiscreteDistribution::point_mass(0.7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| d.sample(&mut rng) == 0.7));
    }

    #[test]
    fn sampling_replays() {
        let d = DiscreteDistribution::uniform(&[0.1, 0.4, 0.9], 1.0).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn interim_curves_on_thirds() {
        let c = interim_curves(&thirds());
        assert!((c.reward(1.0) - 0.5).abs() < 1e-15);
        assert!((c.cost(1.0) - 0.5).abs() < 1e-15);
        assert!((c.reward(0.5) - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.cost(0.5) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.reward(0.0), 0.0);
        assert_eq!(c.cost(0.0), 0.0);
    }

    #[test]
    fn atom_at_zero_costs_nothing() {
        let d = DiscreteDistribution::uniform(&[0.0, 0.5], 1.0).unwrap();
        let c = interim_curves(&d);
        assert_eq!(c.cost(0.0), 0.0);
        assert_eq!(c.reward(0.0), 0.0);
        assert_eq!(c.win_probability(0.0), 0.5);
    }

    #[test]
    fn monte_carlo_reward_within_four_standard_errors() {
        let d = DiscreteDistribution::new([(0.1, 0.2), (0.35, 0.3), (0.6, 0.4), (0.95, 0.1)], 1.0)
            .unwrap();
        let curves = interim_curves(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        for v in [0.3, 0.7, 1.0] {
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let x = (v - d.sample(&mut rng)).max(0.0);
                s += x;
                s2 += x * x;
            }
            let mean = s / n as f64;
            let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
            assert!(
                (mean - curves.reward(v)).abs() <= 4.0 * se,
                "v={v}: mc {mean} vs exact {}",
                curves.reward(v)
            );
        }
    }

    #[test]
    fn text_round_trip() {
        let d = DiscreteDistribution::new([(0.1, 0.3), (2.0 / 3.0, 0.7)], 1.0).unwrap();
        let back = DiscreteDistribution::from_text(&d.to_text(), 1.0).unwrap();
        assert_eq!(d, back);
        assert!(DiscreteDistribution::from_text("0.5", 1.0).is_err());
    }

    fn arb_dist() -> impl Strategy<Value = DiscreteDistribution> {
        prop::collection::vec((0.0f64..=1.0, 0.01f64..1.0), 1..6).prop_map(|raw| {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            DiscreteDistribution::new(raw.into_iter().map(|(p, w)| (p, w / total)), 1.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn reward_plus_cost_is_v_times_cdf(d in arb_dist(), v in 0.0f64..=1.0) {
            let c = interim_curves(&d);
            prop_assert!((c.reward(v) + c.cost(v) - v * d.cdf(v)).abs() < 1e-12);
        }

        #[test]
        fn curves_monotone_and_reward_convex(d in arb_dist()) {
            let c = interim_curves(&d);
            let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
            for w in grid.windows(3) {
                prop_assert!(c.reward(w[1]) + 1e-12 >= c.reward(w[0]));
                prop_assert!(c.cost(w[1]) + 1e-12 >= c.cost(w[0]));
                let mid = c.reward(w[1]);
                prop_assert!(mid <= 0.5 * (c.reward(w[0]) + c.reward(w[2])) + 1e-12);
            }
        }
    }
}
