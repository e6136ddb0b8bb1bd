//! Benchmarks checked against brute-force oracles.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use throttle_core::benchmarks::{dlp_opt, fluid_opt, hindsight_opt, thm1_regret_lower_bound};
use throttle_core::distributions::{interim_curves, DiscreteDistribution};
use throttle_core::instances::make_random_instance;

/// Grid LP over participation levels in steps of `1/steps`, with one
/// coordinate left free and set to the largest level the residual budget
/// allows. Exact for LPs whose optimum has at most one fractional coordinate.
fn grid_lp(items: &[(f64, f64)], cap: f64, steps: usize) -> f64 {
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
            if w <= cap + 1e-12 {
                let (fr, fw) = items[free];
                let level = if fw == 0.0 { 1.0 } else { ((cap - w) / fw).clamp(0.0, 1.0) };
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
    f.atoms().iter().map(|&(v, w)| (w * c.reward(v), w * c.cost(v))).collect()
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

#[test]
fn lp_benchmarks_match_grid_oracle() {
    let mut meta = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..50 {
        let fs = meta.gen_range(1..=4);
        let gs = meta.gen_range(1..=4);
        let rho = meta.gen_range(1..=60) as f64 / 120.0;
        let inst = make_random_instance(1000 + k, fs, gs, rho, 100).unwrap();
        let (f, g) = inst.iid_pair().unwrap();

        let fl = fluid_opt(f, g, rho);
        let oracle = grid_lp(&fluid_items(f, g), rho, 100);
        assert!((fl.per_round_value - oracle).abs() < 1e-6, "fluid #{k}: {} vs {oracle}", fl.per_round_value);
        assert!(fl.expected_spend <= rho + 1e-12);
        assert!(fl.policy.iter().all(|a| (0.0..=1.0).contains(&a.1)));
        assert!(fl.policy.iter().filter(|a| a.1 > 0.0 && a.1 < 1.0).count() <= 1);

        // product atoms can reach 16; {0, 1} on the fixed coordinates
        let dl = dlp_opt(f, g, rho);
        let oracle = grid_lp(&dlp_items(f, g), rho, 1);
        assert!((dl.per_round_value - oracle).abs() < 1e-6, "dlp #{k}: {} vs {oracle}", dl.per_round_value);
        assert!(dl.expected_spend <= rho + 1e-12);
        assert!(dl.per_round_value >= fl.per_round_value - 1e-12);
    }
}

#[test]
fn grid_oracle_agrees_at_full_resolution_on_small_products() {
    let mut meta = ChaCha8Rng::seed_from_u64(7);
    for k in 0..10 {
        let inst = make_random_instance(500 + k, 2, 2, 0.1, 100).unwrap();
        let (f, g) = inst.iid_pair().unwrap();
        let items = dlp_items(f, g);
        if items.len() > 3 {
            continue;
        }
        let rho = meta.gen_range(0.01..0.5);
        let coarse = grid_lp(&items, rho, 1);
        let fine = grid_lp(&items, rho, 100);
        assert!((coarse - fine).abs() < 1e-9);
        assert!((dlp_opt(f, g, rho).per_round_value - fine).abs() < 1e-6);
    }
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

#[test]
fn hindsight_matches_exhaustive_enumeration() {
    let mut meta = ChaCha8Rng::seed_from_u64(99);
    for k in 0..100 {
        let t = meta.gen_range(1..=16);
        let rho = meta.gen_range(1..=120) as f64 / 120.0;
        let fs = meta.gen_range(1..=4);
        let gs = meta.gen_range(1..=6);
        let inst = make_random_instance(7000 + k, fs, gs, rho, t).unwrap();
        let (f, g) = inst.iid_pair().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let v: Vec<f64> = (0..t).map(|_| f.sample(&mut rng)).collect();
        let p: Vec<f64> = (0..t).map(|_| g.sample(&mut rng)).collect();
        let budget = rho * t as f64;
        let h = hindsight_opt(&v, &p, budget, None).unwrap();
        assert!(h.exact, "#{k}");
        let brute = brute_hindsight(&v, &p, budget);
        assert!((h.value - brute).abs() < 1e-9, "#{k}: {} vs {brute}", h.value);
        let (mut r, mut c) = (0.0, 0.0);
        for i in 0..t {
            if h.selection[i] {
                r += (v[i] - p[i]).max(0.0);
                c += p[i];
            }
        }
        assert!(c <= budget + 1e-9);
        assert!((r - h.value).abs() < 1e-9);
    }
}

#[test]
fn lower_bound_identity_holds_exactly() {
    for t in [4usize, 8, 16, 32, 64, 128] {
        let b = thm1_regret_lower_bound(t).unwrap();
        assert_eq!(b.sum, b.closed_form, "T={t}");
    }
    let b = thm1_regret_lower_bound(64).unwrap();
    let half = BigUint::one() << 63u32;
    assert!(b.sum > half);
    assert!((b.approx - 0.3066).abs() < 1e-3, "{}", b.approx);
}
