//! Replicated episode execution and per-cell aggregation.

use rayon::prelude::*;

use throttle_core::benchmarks::{dlp_opt, fluid_opt, hindsight_opt};
use throttle_core::instances::Instance;
use throttle_core::invariants::{check_ogd_trajectory, min_entering_ratio};
use throttle_core::model::{run_episode, EpisodeConfig, InfoMode};
use throttle_core::strategies::{BuildContext, StrategyRegistry, StrategySpec};

use crate::config::{ConfigError, ExperimentConfig};
use crate::stats::{competitive_ratio_cell, fit_slope, mean_se, FitError, RatioStats, SlopeFit};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one episode, a hash of `(base, T, strategy index, replication)`.
pub fn episode_seed(base: u64, horizon: usize, strategy: usize, replication: usize) -> u64 {
    [horizon as u64, strategy as u64, replication as u64]
        .into_iter()
        .fold(splitmix64(base), |h, x| splitmix64(h ^ x))
}

/// What is kept from one episode after its trajectory is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub reward: f64,
    pub cost: f64,
    pub hindsight: Option<f64>,
    pub hindsight_exact: bool,
    pub stop_round: usize,
    pub min_entering_ratio: Option<f64>,
    /// Invariant violations found (OGD-CB episodes only).
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub mean_reward: f64,
    pub se_reward: f64,
    pub mean_hindsight: Option<f64>,
    pub mean_regret: Option<f64>,
    pub se_regret: Option<f64>,
    pub ratio: Option<RatioStats>,
    pub min_entering_ratio: Option<f64>,
    pub mean_stop_round: f64,
    pub invariant_violations: usize,
}

/// One (horizon, strategy) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub strategy: String,
    pub horizon: usize,
    pub info_mode: InfoMode,
    pub opt_fluid: Option<f64>,
    pub opt_dlp: Option<f64>,
    pub mu: f64,
    pub episodes: Vec<EpisodeSummary>,
    pub stats: CellStats,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment_id: String,
    pub instance: String,
    pub cells: Vec<CellResult>,
    /// Log-log regret slope per strategy, when enough horizons were run.
    pub slopes: Vec<(String, Result<SlopeFit, FitError>)>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { parallel: true }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Episode(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Episode(e) => write!(f, "episode failed: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// Everything needed to run the episodes of one cell.
pub struct Cell<'a> {
    pub instance: &'a Instance,
    pub spec: &'a StrategySpec,
    pub strategy_index: usize,
    pub info_mode: InfoMode,
    pub base_seed: u64,
    pub replications: usize,
    pub hindsight: bool,
}

pub fn run_episode_summary(
    cell: &Cell<'_>,
    registry: &StrategyRegistry,
    replication: usize,
) -> Result<EpisodeSummary, RunError> {
    let inst = cell.instance;
    let seed = episode_seed(cell.base_seed, inst.horizon, cell.strategy_index, replication);
    let ctx = BuildContext { instance: inst };
    let mut strategy = registry
        .build(cell.spec, &ctx)
        .map_err(|e| RunError::Config(ConfigError(e.to_string())))?;
    let cfg = EpisodeConfig::for_instance(inst, cell.info_mode, seed);
    let tr = run_episode(strategy.as_mut(), inst, &cfg).map_err(|e| RunError::Episode(e.to_string()))?;
    let (hindsight, hindsight_exact) = if cell.hindsight {
        let h = hindsight_opt(&tr.values(), &tr.prices(), tr.budget, None)
            .map_err(|e| RunError::Episode(e.to_string()))?;
        (Some(h.value), h.exact)
    } else {
        (None, false)
    };
    let violations = if strategy.name() == "ogd-cb" {
        check_ogd_trajectory(&tr, inst.budget_rate, inst.value_ceiling, cell.info_mode)
            .violations
            .into_iter()
            .map(|v| format!("{} at round {}: {}", v.check, v.round, v.detail))
            .collect()
    } else {
        Vec::new()
    };
    Ok(EpisodeSummary {
        seed,
        reward: tr.total_reward,
        cost: tr.total_cost,
        hindsight,
        hindsight_exact,
        stop_round: tr.stop_round,
        min_entering_ratio: min_entering_ratio(&tr, cell.info_mode),
        violations,
    })
}

/// Runs every replication of a cell. Results are in replication order
/// whether or not the work is spread over threads.
pub fn run_cell(cell: &Cell<'_>, registry: &StrategyRegistry, opts: RunOptions) -> Result<Vec<EpisodeSummary>, RunError> {
    if opts.parallel {
        (0..cell.replications)
            .into_par_iter()
            .map(|r| run_episode_summary(cell, registry, r))
            .collect()
    } else {
        (0..cell.replications)
            .map(|r| run_episode_summary(cell, registry, r))
            .collect()
    }
}

/// Folds episode summaries into cell statistics. Regret is measured against
/// the fluid optimum when the instance is i.i.d., otherwise against the
/// per-episode hindsight value.
pub fn summarize(episodes: &[EpisodeSummary], horizon: usize, opt_fluid: Option<f64>, mu: f64) -> CellStats {
    let rewards: Vec<f64> = episodes.iter().map(|e| e.reward).collect();
    let (mean_reward, se_reward) = mean_se(&rewards);
    let hindsight: Option<Vec<f64>> = episodes.iter().map(|e| e.hindsight).collect();
    let regrets: Option<Vec<f64>> = match (opt_fluid, &hindsight) {
        (Some(opt), _) => Some(rewards.iter().map(|r| horizon as f64 * opt - r).collect()),
        (None, Some(h)) => Some(h.iter().zip(&rewards).map(|(h, r)| h - r).collect()),
        (None, None) => None,
    };
    let (mean_regret, se_regret) = match regrets {
        Some(r) => {
            let (m, s) = mean_se(&r);
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    let stops: Vec<f64> = episodes.iter().map(|e| e.stop_round as f64).collect();
    CellStats {
        mean_reward,
        se_reward,
        mean_hindsight: hindsight.as_ref().map(|h| mean_se(h).0),
        mean_regret,
        se_regret,
        ratio: hindsight
            .as_ref()
            .map(|h| competitive_ratio_cell(&rewards, h, horizon, mu)),
        min_entering_ratio: episodes
            .iter()
            .filter_map(|e| e.min_entering_ratio)
            .min_by(f64::total_cmp),
        mean_stop_round: mean_se(&stops).0,
        invariant_violations: episodes.iter().map(|e| e.violations.len()).sum(),
    }
}

pub fn run_experiment(config: &ExperimentConfig, registry: &StrategyRegistry, opts: RunOptions) -> Result<Report, RunError> {
    config.validate(registry)?;
    let mut cells = Vec::new();
    for &horizon in &config.horizons {
        let instance = config.instance.build(horizon)?;
        let (opt_fluid, opt_dlp) = match instance.iid_pair() {
            Some((f, g)) => (
                Some(fluid_opt(f, g, instance.budget_rate).per_round_value),
                Some(dlp_opt(f, g, instance.budget_rate).per_round_value),
            ),
            None => (None, None),
        };
        let mu = config.mu.unwrap_or(instance.budget_rate / instance.value_ceiling);
        for (si, spec) in config.strategies.iter().enumerate() {
            let cell = Cell {
                instance: &instance,
                spec,
                strategy_index: si,
                info_mode: config.info_mode,
                base_seed: config.seed,
                replications: config.replications,
                hindsight: config.hindsight,
            };
            let episodes = run_cell(&cell, registry, opts)?;
            let stats = summarize(&episodes, horizon, opt_fluid, mu);
            cells.push(CellResult {
                strategy: spec.label(),
                horizon,
                info_mode: config.info_mode,
                opt_fluid,
                opt_dlp,
                mu,
                episodes,
                stats,
            });
        }
    }
    let slopes = if config.horizons.len() >= 4 {
        config
            .strategies
            .iter()
            .map(|spec| {
                let label = spec.label();
                let pts: Vec<(f64, f64)> = cells
                    .iter()
                    .filter(|c| c.strategy == label)
                    .filter_map(|c| c.stats.mean_regret.map(|r| (c.horizon as f64, r)))
                    .collect();
                (label, fit_slope(&pts, config.seed))
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Report {
        experiment_id: config.experiment_id.clone(),
        instance: config.instance.label(),
        cells,
        slopes,
    })
}
