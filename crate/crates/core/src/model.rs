//! Round settlement, budget accounting and the episode loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::strategies::{Action, EstimateRecord, Feedback, RoundContext, Strategy};

/// Which prices the bidder gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InfoMode {
    /// The competing price is revealed after every round.
    Full,
    /// The competing price is revealed only in rounds the bidder entered.
    Partial,
}

impl InfoMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InfoMode::Full => "full",
            InfoMode::Partial => "partial",
        }
    }
}

impl std::str::FromStr for InfoMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(InfoMode::Full),
            "partial" => Ok(InfoMode::Partial),
            other => Err(Error::InvalidArgument(format!("unknown info mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for InfoMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub horizon: usize,
    pub budget_rate: f64,
    pub value_ceiling: f64,
    pub info_mode: InfoMode,
    pub seed: u64,
}

impl EpisodeConfig {
    /// Config matching an instance's horizon, budget rate and ceiling.
    pub fn for_instance(instance: &Instance, info_mode: InfoMode, seed: u64) -> Self {
        Self {
            horizon: instance.horizon,
            budget_rate: instance.budget_rate,
            value_ceiling: instance.value_ceiling,
            info_mode,
            seed,
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget_rate * self.horizon as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be >= 1".into()));
        }
        if !(self.value_ceiling.is_finite() && self.value_ceiling > 0.0) {
            return Err(Error::InvalidConfig("value ceiling must be positive".into()));
        }
        if !(self.budget_rate > 0.0 && self.budget_rate <= self.value_ceiling) {
            return Err(Error::InvalidConfig(format!(
                "budget rate {} must lie in (0, {}]",
                self.budget_rate, self.value_ceiling
            )));
        }
        if self.budget() < self.value_ceiling {
            return Err(Error::InvalidConfig(format!(
                "total budget {} is below the value ceiling {}",
                self.budget(),
                self.value_ceiling
            )));
        }
        Ok(())
    }
}

/// One settled auction from the bidder's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub value: f64,
    pub price: f64,
    /// Whether the bidder entered the auction (`x_t`).
    pub decision: bool,
    /// Submitted bid; `0` when not entered, `value` for truthful entry.
    pub bid: f64,
    pub won: bool,
    pub reward: f64,
    pub cost: f64,
}

fn check_money(what: &'static str, x: f64, ceiling: f64) -> Result<()> {
    if x.is_finite() && (0.0..=ceiling).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: x,
            ceiling,
        })
    }
}

/// Settles a throttling round: entering means bidding the value truthfully.
pub fn settle_round(value: f64, price: f64, decision: bool, ceiling: f64) -> Result<RoundOutcome> {
    settle_bid(value, price, decision.then_some(value), ceiling)
}

/// Settles a second-price round for an arbitrary bid. `None` means the bidder
/// stayed out. The bidder wins iff `bid >= price` and then pays `price`.
pub fn settle_bid(value: f64, price: f64, bid: Option<f64>, ceiling: f64) -> Result<RoundOutcome> {
    check_money("value", value, ceiling)?;
    check_money("price", price, ceiling)?;
    if let Some(b) = bid {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidArgument(format!("bid {b} is not a valid amount")));
        }
    }
    let won = bid.is_some_and(|b| b >= price);
    let (reward, cost) = if won {
        ((value - price).max(0.0), price)
    } else {
        (0.0, 0.0)
    };
    Ok(RoundOutcome {
        value,
        price,
        decision: bid.is_some(),
        bid: bid.unwrap_or(0.0),
        won,
        reward,
        cost,
    })
}

/// Per-episode record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rounds: Vec<RoundOutcome>,
    /// Last round (1-based) with `decision == 1`; `0` if the bidder never entered.
    pub stop_round: usize,
    /// Round (1-based) after which the budget check halted participation.
    pub break_round: Option<usize>,
    pub total_reward: f64,
    pub total_cost: f64,
    /// `lambda_1, lambda_2, ...` up to one past the last executed round.
    /// Empty for strategies without a dual variable.
    pub dual_path: Vec<f64>,
    /// Estimator state the strategy reported for each round, if any.
    pub estimates: Vec<Option<EstimateRecord>>,
    pub budget: f64,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.value).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.price).collect()
    }

    pub fn entered_count(&self) -> usize {
        self.rounds.iter().filter(|r| r.decision).count()
    }

    /// Last round the strategy was consulted in.
    pub fn active_rounds(&self) -> usize {
        self.break_round.unwrap_or(self.rounds.len())
    }
}

/// Independent random streams for one episode: values, prices and the
/// strategy's private randomness. Prices and values therefore do not depend
/// on which strategy is being run (except through adaptive price rules).
pub struct EpisodeRng {
    pub values: ChaCha8Rng,
    pub prices: ChaCha8Rng,
    pub strategy: ChaCha8Rng,
}

impl EpisodeRng {
    pub fn new(seed: u64) -> Self {
        let stream = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            rng
        };
        Self {
            values: stream(1),
            prices: stream(2),
            strategy: stream(3),
        }
    }
}

/// Runs one episode.
///
/// After every executed round the realized cost is deducted; once the
/// remaining budget drops below the value ceiling, participation stops for
/// good and the remaining rounds are recorded with decision 0. Under partial
/// feedback the strategy observes the price only in rounds it entered.
pub fn run_episode(
    strategy: &mut dyn Strategy,
    instance: &Instance,
    config: &EpisodeConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if config.horizon != instance.horizon
        || config.value_ceiling != instance.value_ceiling
        || (config.budget_rate - instance.budget_rate).abs() > 1e-12
    {
        return Err(Error::InvalidConfig(format!(
            "config (T={}, rho={}, vmax={}) does not match instance `{}` (T={}, rho={}, vmax={})",
            config.horizon,
            config.budget_rate,
            config.value_ceiling,
            instance.name,
            instance.horizon,
            instance.budget_rate,
            instance.value_ceiling
        )));
    }
    let horizon = config.horizon;
    let ceiling = config.value_ceiling;
    let mut rng = EpisodeRng::new(config.seed);
    let values = instance.values.realize(horizon, &mut rng.values)?;
    let mut prices = instance.prices.process();

    let mut rounds = Vec::with_capacity(horizon);
    let mut estimates = Vec::with_capacity(horizon);
    let mut dual_path = Vec::new();
    if let Some(d) = strategy.dual() {
        dual_path.push(d);
    }
    let mut remaining = config.budget();
    let mut active = true;
    let mut break_round = None;
    let (mut total_reward, mut total_cost) = (0.0, 0.0);
    let mut stop_round = 0;

    for t in 1..=horizon {
        let value = values[t - 1];
        let bid = if active {
            let ctx = RoundContext {
                round: t,
                value,
                remaining_budget: remaining,
            };
            match strategy.decide(&ctx, &mut rng.strategy)? {
                Action::Skip => None,
                Action::Enter => Some(value),
                Action::Bid(b) => Some(b),
            }
        } else {
            None
        };
        let price = prices.next_price(&mut rng.prices, bid.is_some())?;
        let outcome = settle_bid(value, price, bid, ceiling)?;

        if active {
            estimates.push(strategy.last_estimate());
            let revealed = match config.info_mode {
                InfoMode::Full => true,
                InfoMode::Partial => outcome.decision,
            };
            strategy.observe(&Feedback {
                round: t,
                value,
                entered: outcome.decision,
                won: outcome.won,
                cost: outcome.cost,
                price: revealed.then_some(price),
            });
            if let Some(d) = strategy.dual() {
                dual_path.push(d);
            }
            remaining -= outcome.cost;
            if remaining < ceiling {
                active = false;
                break_round = Some(t);
            }
        } else {
            estimates.push(None);
            if config.info_mode == InfoMode::Full {
                strategy.observe(&Feedback {
                    round: t,
                    value,
                    entered: false,
                    won: false,
                    cost: 0.0,
                    price: Some(price),
                });
            }
        }

        if outcome.decision {
            stop_round = t;
        }
        total_reward += outcome.reward;
        total_cost += outcome.cost;
        rounds.push(outcome);
    }

    Ok(Trajectory {
        rounds,
        stop_round,
        break_round,
        total_reward,
        total_cost,
        dual_path,
        estimates,
        budget: config.budget(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DiscreteDistribution;
    use crate::instances::{make_thm1_instance, PriceSource, ValueSource};
    use crate::strategies::{AlwaysEnter, AlwaysSkip, OgdCb};

    fn fixed_instance(v: f64, p: f64, rho: f64, t: usize) -> Instance {
        Instance {
            name: "fixed".into(),
            horizon: t,
            budget_rate: rho,
            value_ceiling: 1.0,
            info_mode: InfoMode::Full,
            values: ValueSource::Fixed(vec![v; t]),
            prices: PriceSource::Fixed(vec![p; t]),
        }
    }

    #[test]
    fn settle_examples() {
        let win = settle_round(1.0, 1.0 / 3.0, true, 1.0).unwrap();
        assert!((win.reward - 2.0 / 3.0).abs() < 1e-15);
        assert!((win.cost - 1.0 / 3.0).abs() < 1e-15);
        let lose = settle_round(0.5, 0.7, true, 1.0).unwrap();
        assert_eq!((lose.reward, lose.cost, lose.won), (0.0, 0.0, false));
        let skip = settle_round(1.0, 0.4, false, 1.0).unwrap();
        assert_eq!((skip.reward, skip.cost), (0.0, 0.0));
        let tie = settle_round(0.6, 0.6, true, 1.0).unwrap();
        assert!(tie.won);
        assert_eq!((tie.reward, tie.cost), (0.0, 0.6));
    }

    #[test]
    fn settle_rejects_out_of_range() {
        assert!(settle_round(1.2, 0.3, true, 1.0).is_err());
        assert!(settle_round(0.5, -0.1, true, 1.0).is_err());
        assert!(settle_round(f64::NAN, 0.1, false, 1.0).is_err());
    }

    #[test]
    fn always_skip_earns_nothing() {
        let inst = make_thm1_instance(16).unwrap();
        let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 3);
        let tr = run_episode(&mut AlwaysSkip, &inst, &cfg).unwrap();
        assert_eq!(tr.total_reward, 0.0);
        assert_eq!(tr.total_cost, 0.0);
        assert!(tr.rounds.iter().all(|r| !r.decision));
        assert_eq!(tr.stop_round, 0);
        assert!(tr.dual_path.is_empty());
    }

    #[test]
    fn always_enter_within_budget() {
        // B = 2, each round costs 1/3; remaining after 4 rounds is 2/3 < 1.
        let inst = fixed_instance(1.0, 1.0 / 3.0, 0.5, 4);
        let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 0);
        let tr = run_episode(&mut AlwaysEnter, &inst, &cfg).unwrap();
        assert!((tr.total_cost - 4.0 / 3.0).abs() < 1e-12);
        assert!((tr.total_reward - 8.0 / 3.0).abs() < 1e-12);
        assert_eq!(tr.stop_round, 4);
        assert_eq!(tr.break_round, Some(4));
    }

    #[test]
    fn break_is_checked_after_deduction() {
        // B = 3, each entered round costs 1: 3 -> 2 -> 1 -> 0. The check after
        // round 2 leaves exactly 1 = vmax (no break); after round 3 it is 0.
        let inst = fixed_instance(1.0, 1.0, 1.0, 3);
        let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 0);
        let tr = run_episode(&mut AlwaysEnter, &inst, &cfg).unwrap();
        let decisions: Vec<bool> = tr.rounds.iter().map(|r| r.decision).collect();
        assert_eq!(decisions, vec![true, true, true]);
        assert_eq!(tr.stop_round, 3);
        assert_eq!(tr.break_round, Some(3));
        assert_eq!(tr.total_cost, 3.0);

        // With one more round available it must be forced to 0.
        let inst = Instance {
            horizon: 4,
            budget_rate: 0.75,
            values: ValueSource::Fixed(vec![1.0; 4]),
            prices: PriceSource::Fixed(vec![1.0; 4]),
            ..inst
        };
        let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 0);
        let tr = run_episode(&mut AlwaysEnter, &inst, &cfg).unwrap();
        let decisions: Vec<bool> = tr.rounds.iter().map(|r| r.decision).collect();
        assert_eq!(decisions, vec![true, true, true, false]);
        assert_eq!(tr.stop_round, 3);
    }

    #[test]
    fn rejects_mismatched_config() {
        let inst = make_thm1_instance(8).unwrap();
        let mut cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 0);
        cfg.horizon = 12;
        assert!(run_episode(&mut AlwaysEnter, &inst, &cfg).is_err());
        let mut cfg = EpisodeConfig::for_instance(&inst, InfoMode::Full, 0);
        cfg.budget_rate = 0.05; // B < vmax
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_feedback_counts_only_entered_rounds() {
        let inst = Instance {
            name: "iid".into(),
            horizon: 400,
            budget_rate: 0.05,
            value_ceiling: 1.0,
            info_mode: InfoMode::Partial,
            values: ValueSource::Iid(DiscreteDistribution::uniform(&[0.3, 0.8], 1.0).unwrap()),
            prices: PriceSource::Iid(
                DiscreteDistribution::uniform(&[0.1, 0.5, 0.9], 1.0).unwrap(),
            ),
        };
        let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Partial, 99);
        let mut s = OgdCb::new(inst.horizon, inst.budget_rate, inst.value_ceiling);
        let tr = run_episode(&mut s, &inst, &cfg).unwrap();
        let mut entered = 0;
        for (t, (r, e)) in tr.rounds.iter().zip(&tr.estimates).enumerate() {
            if t >= 1 && t < tr.active_rounds() {
                assert_eq!(e.unwrap().sample_count, entered);
            }
            entered += r.decision as usize;
        }
        assert!(tr.rounds.iter().any(|r| !r.decision));
    }

    #[test]
    fn replay_is_bit_identical() {
        let inst = make_thm1_instance(256).unwrap();
        let cfg = EpisodeConfig::for_instance(&inst, InfoMode::Partial, 1234);
        let run = || {
            let mut s = OgdCb::new(256, 0.5, 1.0);
            run_episode(&mut s, &inst, &cfg).unwrap()
        };
        assert_eq!(run(), run());
    }
}
