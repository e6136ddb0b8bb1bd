//! Self-checks behind the `validate` and `identity-check` subcommands.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use throttle_core::benchmarks::{dlp_opt, fluid_opt, hindsight_opt, thm1_regret_lower_bound, thm1_revenue_bound};
use throttle_core::distributions::{interim_curves, DiscreteDistribution};
use throttle_core::estimation::{dkw_epsilon, estimate_cost, estimate_reward, SampleStore};
use throttle_core::instances::{make_gap_instance, make_random_instance, make_thm1_instance, Instance};
use throttle_core::invariants::check_ogd_trajectory;
use throttle_core::model::{run_episode, EpisodeConfig, InfoMode};
use throttle_core::strategies::OgdCb;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityRow {
    pub horizon: usize,
    pub sum: BigUint,
    pub closed_form: BigUint,
}

impl IdentityRow {
    pub fn holds(&self) -> bool {
        self.sum == self.closed_form
    }
}

/// Evaluates both sides of the lower-bound identity for every multiple of 4
/// up to `max_horizon`.
pub fn identity_sweep(max_horizon: usize) -> Vec<IdentityRow> {
    (1..=max_horizon / 4)
        .map(|k| {
            let b = thm1_regret_lower_bound(4 * k).expect("multiple of 4");
            IdentityRow {
                horizon: 4 * k,
                sum: b.sum,
                closed_form: b.closed_form,
            }
        })
        .collect()
}

/// Exhaustive check of the revenue bound on the two-price instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceOutcome {
    pub horizon: usize,
    pub realizations: usize,
    /// Realizations where some feasible decision sequence beat the bound.
    pub violations: usize,
    /// Realizations where the best sequence meets the bound exactly.
    pub tight: usize,
}

/// For every price realization (bit set = price 1/3) and every decision
/// sequence within budget `T/2`, compares revenue with the bound. Everything
/// is counted in thirds, so the comparison is exact.
pub fn revenue_bound_dominance(horizon: usize) -> DominanceOutcome {
    assert!(horizon.is_multiple_of(4) && horizon <= 20, "horizon must be a multiple of 4 and at most 20");
    let full: u32 = (1u32 << horizon) - 1;
    let budget_thirds = 3 * horizon as u32 / 2;
    let mut violations = 0;
    let mut tight = 0;
    for cheap in 0..=full {
        let s = cheap.count_ones() as usize;
        let bound = thm1_revenue_bound(s, horizon).expect("valid s") * BigRational::from_integer(BigInt::from(3));
        let bound: u32 = bound.to_integer().try_into().expect("small");
        let mut best = 0u32;
        for d in 0..=full {
            let c = (d & cheap).count_ones();
            let e = (d & !cheap).count_ones();
            if c + 2 * e <= budget_thirds {
                best = best.max(2 * c + e);
            }
        }
        if best > bound {
            violations += 1;
        }
        if best == bound {
            tight += 1;
        }
    }
    DominanceOutcome {
        horizon,
        realizations: full as usize + 1,
        violations,
        tight,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DkwOutcome {
    pub samples: usize,
    pub horizon: usize,
    pub trials: usize,
    pub failures: usize,
    /// `2 exp(-2 n eps^2)`
    pub bound: f64,
}

impl DkwOutcome {
    pub fn frequency(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

/// Draws `n` prices from `prices` per trial and counts trials where, at any of
/// `values`, the estimates leave `r <= r~ <= r + 2 eps v` or
/// `c - 4 eps v <= c~ <= c`.
pub fn dkw_sandwich(
    prices: &DiscreteDistribution,
    samples: usize,
    horizon: usize,
    values: &[f64],
    trials: usize,
    seed: u64,
) -> DkwOutcome {
    let eps = dkw_epsilon(samples, horizon).expect("valid sample count and horizon");
    let curves = interim_curves(prices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-12;
    let mut failures = 0;
    for _ in 0..trials {
        let store: SampleStore = (0..samples).map(|_| prices.sample(&mut rng)).collect();
        let bad = values.iter().any(|&v| {
            let (r, c) = (curves.reward(v), curves.cost(v));
            let rt = estimate_reward(v, &store, eps).expect("non-empty");
            let ct = estimate_cost(v, &store, eps).expect("non-empty");
            !(r <= rt + tol && rt <= r + 2.0 * eps * v + tol && c - 4.0 * eps * v <= ct + tol && ct <= c + tol)
        });
        failures += bad as usize;
    }
    DkwOutcome {
        samples,
        horizon,
        trials,
        failures,
        bound: 2.0 * (-2.0 * samples as f64 * eps * eps).exp(),
    }
}

/// Grid LP over acceptance levels `k / steps` with one free coordinate set to
/// the largest level the residual budget allows. Exact whenever the optimum
/// has at most one fractional coordinate, which fractional knapsacks do.
pub fn grid_lp(items: &[(f64, f64)], capacity: f64, steps: usize) -> f64 {
    let n = items.len();
    let mut best = 0.0f64;
    for free in 0..n {
        let others: Vec<usize> = (0..n).filter(|&i| i != free).collect();
        let mut idx = vec![0usize; others.len()];
        loop {
            let (mut r, mut w) = (0.0, 0.0);
            for (k, &i) in others.iter().enumerate() {
                let level = idx[k] as f64 / steps as f64;
                r += level * items[i].0;
                w += level * items[i].1;
            }
            if w <= capacity + 1e-12 {
                let (fr, fw) = items[free];
                let level = if fw == 0.0 {
                    1.0
                } else {
                    ((capacity - w) / fw).clamp(0.0, 1.0)
                };
                best = best.max(r + level * fr);
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] <= steps {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    best
}

fn fluid_items(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Vec<(f64, f64)> {
    let c = interim_curves(g);
    f.atoms()
        .iter()
        .map(|&(v, w)| (w * c.reward(v), w * c.cost(v)))
        .collect()
}

fn dlp_items(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(v, a) in f.atoms() {
        for &(p, b) in g.atoms() {
            if v >= p {
                out.push((a * b * (v - p), a * b * p));
            }
        }
    }
    out
}

/// Compares both LP benchmarks with [`grid_lp`] on random instances with
/// supports of size at most 4. The fluid LP is gridded at step 0.01; the
/// deterministic LP, which can have 16 coordinates, is enumerated over
/// vertices (`{0, 1}` on all but the free coordinate). Returns the largest
/// absolute error of each.
pub fn lp_oracle_errors(instances: usize, seed: u64) -> (f64, f64) {
    let mut meta = ChaCha8Rng::seed_from_u64(seed);
    let (mut fluid_err, mut dlp_err) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let fs = meta.gen_range(1..=4);
        let gs = meta.gen_range(1..=4);
        let rho = meta.gen_range(1..=60) as f64 / 120.0;
        let inst = make_random_instance(meta.gen(), fs, gs, rho, 100).expect("valid random instance");
        let (f, g) = inst.iid_pair().expect("iid");
        let fl = fluid_opt(f, g, rho).per_round_value;
        fluid_err = fluid_err.max((fl - grid_lp(&fluid_items(f, g), rho, 100)).abs());
        let dl = dlp_opt(f, g, rho).per_round_value;
        dlp_err = dlp_err.max((dl - grid_lp(&dlp_items(f, g), rho, 1)).abs());
    }
    (fluid_err, dlp_err)
}

fn brute_hindsight(values: &[f64], prices: &[f64], budget: f64) -> f64 {
    let n = values.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let (mut r, mut c) = (0.0, 0.0);
        for t in 0..n {
            if mask >> t & 1 == 1 && values[t] >= prices[t] {
                r += values[t] - prices[t];
                c += prices[t];
            }
        }
        if c <= budget + 1e-9 {
            best = best.max(r);
        }
    }
    best
}

/// Hindsight solver against subset enumeration on random traces with
/// `T <= 16`. Returns the number of mismatches and of non-exact solves.
pub fn hindsight_oracle_mismatches(instances: usize, seed: u64) -> (usize, usize) {
    let mut meta = ChaCha8Rng::seed_from_u64(seed);
    let (mut mismatches, mut inexact) = (0, 0);
    for _ in 0..instances {
        let t = meta.gen_range(1..=16);
        let rho = meta.gen_range(1..=120) as f64 / 120.0;
        let inst = make_random_instance(meta.gen(), meta.gen_range(1..=4), meta.gen_range(1..=6), rho, t)
            .expect("valid random instance");
        let (f, g) = inst.iid_pair().expect("iid");
        let v: Vec<f64> = (0..t).map(|_| f.sample(&mut meta)).collect();
        let p: Vec<f64> = (0..t).map(|_| g.sample(&mut meta)).collect();
        let budget = rho * t as f64;
        let h = hindsight_opt(&v, &p, budget, None).expect("valid input");
        inexact += !h.exact as usize;
        if (h.value - brute_hindsight(&v, &p, budget)).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    (mismatches, inexact)
}

fn ogd_sweep(instance: &Instance, mode: InfoMode, seeds: u64) -> Vec<String> {
    let mut out = Vec::new();
    for seed in 0..seeds {
        let cfg = EpisodeConfig::for_instance(instance, mode, seed);
        let mut s = OgdCb::new(instance.horizon, instance.budget_rate, instance.value_ceiling);
        match run_episode(&mut s, instance, &cfg) {
            Ok(tr) => {
                let rep = check_ogd_trajectory(&tr, instance.budget_rate, instance.value_ceiling, mode);
                out.extend(
                    rep.violations
                        .into_iter()
                        .map(|v| format!("{} {mode} seed {seed}: {} at round {}", instance.name, v.check, v.round)),
                );
            }
            Err(e) => out.push(format!("{} {mode} seed {seed}: {e}", instance.name)),
        }
    }
    out
}

/// The full self-check suite. `thorough` adds the `T = 12` exhaustive search
/// and larger samples.
pub fn run_validation(thorough: bool) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    let rows = identity_sweep(128);
    let bad: Vec<usize> = rows.iter().filter(|r| !r.holds()).map(|r| r.horizon).collect();
    out.push(CheckOutcome::new(
        "lower-bound identity (T = 4..128)",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} horizons exact", rows.len())
        } else {
            format!("fails at {bad:?}")
        },
    ));

    let horizons: &[usize] = if thorough { &[4, 8, 12] } else { &[4, 8] };
    for &t in horizons {
        let d = revenue_bound_dominance(t);
        out.push(CheckOutcome::new(
            format!("revenue bound dominance (T = {t})"),
            d.violations == 0,
            format!("{} realizations, {} violations, {} tight", d.realizations, d.violations, d.tight),
        ));
    }

    let n = if thorough { 50 } else { 20 };
    let (fe, de) = lp_oracle_errors(n, 11);
    out.push(CheckOutcome::new(
        "LP benchmarks vs grid oracle",
        fe < 1e-6 && de < 1e-6,
        format!("max error fluid {fe:.2e}, deterministic {de:.2e} over {n} instances"),
    ));

    let n = if thorough { 100 } else { 40 };
    let (mm, inexact) = hindsight_oracle_mismatches(n, 12);
    out.push(CheckOutcome::new(
        "hindsight vs subset enumeration",
        mm == 0 && inexact == 0,
        format!("{mm} mismatches, {inexact} inexact over {n} traces"),
    ));

    let g = DiscreteDistribution::uniform(&[1.0 / 3.0, 2.0 / 3.0], 1.0).expect("valid");
    let trials = if thorough { 10_000 } else { 2_000 };
    for (n, t) in [(16, 100), (64, 1000)] {
        let d = dkw_sandwich(&g, n, t, &[0.1, 0.5, 1.0], trials, 13);
        out.push(CheckOutcome::new(
            format!("confidence sandwich (n = {n}, T = {t})"),
            d.frequency() <= d.bound + 0.01,
            format!("{} / {} failures, allowance {:.2e} + 0.01", d.failures, d.trials, d.bound),
        ));
    }

    let seeds = if thorough { 50 } else { 10 };
    let mut violations = Vec::new();
    for mode in [InfoMode::Full, InfoMode::Partial] {
        violations.extend(ogd_sweep(&make_thm1_instance(4096).expect("valid"), mode, seeds));
        violations.extend(ogd_sweep(&make_gap_instance(4000).expect("valid"), mode, seeds));
        for k in 0..seeds {
            let inst = make_random_instance(k, 3, 3, 0.1 + 0.05 * (k % 5) as f64, 1500).expect("valid");
            violations.extend(ogd_sweep(&inst, mode, 1));
        }
    }
    out.push(CheckOutcome::new(
        "OGD-CB path invariants",
        violations.is_empty(),
        if violations.is_empty() {
            "no violations".to_string()
        } else {
            violations[..violations.len().min(5)].join("; ")
        },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dominance_is_tight_somewhere() {
        let d = revenue_bound_dominance(4);
        assert_eq!(d.realizations, 16);
        assert_eq!(d.violations, 0);
        assert!(d.tight > 0);
    }

    #[test]
    fn identity_rows() {
        let rows = identity_sweep(16);
        assert_eq!(rows.iter().map(|r| r.horizon).collect::<Vec<_>>(), vec![4, 8, 12, 16]);
        assert!(rows.iter().all(IdentityRow::holds));
    }

    #[test]
    fn grid_lp_single_item() {
        assert!((grid_lp(&[(1.0, 2.0)], 1.0, 100) - 0.5).abs() < 1e-15);
        assert_eq!(grid_lp(&[(1.0, 0.0)], 0.0, 1), 1.0);
    }
}
