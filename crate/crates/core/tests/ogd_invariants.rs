use proptest::prelude::*;

use throttle_core::instances::{make_gap_instance, make_random_instance, make_thm1_instance, make_thm3_adversary};
use throttle_core::invariants::check_ogd_trajectory;
use throttle_core::model::{run_episode, EpisodeConfig, InfoMode};
use throttle_core::strategies::OgdCb;

fn run_and_check(inst: &throttle_core::instances::Instance, mode: InfoMode, seed: u64) {
    let cfg = EpisodeConfig::for_instance(inst, mode, seed);
    let mut s = OgdCb::new(inst.horizon, inst.budget_rate, inst.value_ceiling);
    let tr = run_episode(&mut s, inst, &cfg).unwrap();
    let report = check_ogd_trajectory(&tr, inst.budget_rate, inst.value_ceiling, mode);
    assert!(report.is_clean(), "{} {mode} seed {seed}: {:?}", inst.name, report.violations);
}

#[test]
fn named_instances_satisfy_invariants() {
    for mode in [InfoMode::Full, InfoMode::Partial] {
        for seed in 0..20 {
            run_and_check(&make_thm1_instance(2048).unwrap(), mode, seed);
            run_and_check(&make_gap_instance(2000).unwrap(), mode, seed);
            run_and_check(&make_thm3_adversary(1.0, 1000).unwrap(), mode, seed);
        }
    }
}

#[test]
fn thm3_adversary_emits_two_prices() {
    let inst = make_thm3_adversary(1.0, 500).unwrap();
    let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 1);
    let mut s = OgdCb::new(inst.horizon, inst.budget_rate, inst.value_ceiling);
    let tr = run_episode(&mut s, &inst, &cfg).unwrap();
    let mut prices: Vec<u64> = tr.prices().iter().map(|p| p.to_bits()).collect();
    prices.sort_unstable();
    prices.dedup();
    assert_eq!(prices.len(), 2);
    for r in tr.rounds.iter().filter(|r| r.decision) {
        assert!((r.reward - 1.0 / 9.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn random_instances_satisfy_invariants(
        inst_seed in 0u64..10_000,
        fs in 1usize..=4,
        gs in 1usize..=4,
        rho_k in 6u32..=120,
        horizon in 10usize..600,
        partial in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let inst = make_random_instance(inst_seed, fs, gs, rho_k as f64 / 120.0, horizon).unwrap();
        prop_assume!(inst.budget() >= inst.value_ceiling);
        let mode = if partial { InfoMode::Partial } else { InfoMode::Full };
        run_and_check(&inst, mode, seed);
    }
}
