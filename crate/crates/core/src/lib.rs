//! Budget-constrained bidding in repeated second-price auctions.
//!
//! Modules, bottom-up:
//!
//! * [`distributions`]: finite-support value and price distributions and the
//!   interim reward/cost curves they induce.
//! * [`model`]: round settlement, episode execution and feedback gating.
//! * [`estimation`]: the empirical price store and confidence-biased
//!   reward/cost estimates.
//! * [`strategies`]: the [`Strategy`](strategies::Strategy) trait, throttling
//!   and pacing strategies, and a name-keyed registry.
//! * [`benchmarks`]: fluid LP, deterministic LP, hindsight knapsack and exact
//!   lower-bound combinatorics for the two-price instance.
//! * [`instances`]: hard-instance and random-instance generators plus a
//!   plain-text instance format.
//! * [`invariants`]: path-wise checks on recorded OGD-CB episodes.

pub mod benchmarks;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod instances;
pub mod invariants;
pub mod model;
pub mod strategies;

pub use error::{Error, Result};
