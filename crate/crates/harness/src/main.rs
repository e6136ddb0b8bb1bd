use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use throttle_core::benchmarks::{dlp_opt, fluid_opt, hindsight_opt};
use throttle_core::instances::{make_named_instance, Instance};
use throttle_core::model::{run_episode, EpisodeConfig, InfoMode};
use throttle_core::strategies::{BuildContext, StrategyRegistry, StrategySpec};
use throttle_harness::config::{ConfigError, ExperimentConfig};
use throttle_harness::report::{render_svg, render_table, write_csv_file};
use throttle_harness::runner::{run_experiment, RunError, RunOptions};
use throttle_harness::validate::{identity_sweep, run_validation};

const EXIT_CONFIG: u8 = 1;
const EXIT_INVARIANT: u8 = 2;

#[derive(Parser)]
#[command(name = "throttle", version, about = "Budget-throttling auction simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config and write its CSV report.
    Run {
        config: PathBuf,
        /// Run replications on one thread.
        #[arg(long)]
        serial: bool,
        /// Override the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the LP benchmarks and one simulated episode with its hindsight value.
    Bench {
        /// Generator name (thm1, thm2, thm3, gap, singleton, random) or an instance file.
        instance: String,
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "ogd-cb")]
        strategy: String,
        #[arg(long, default_value = "full")]
        mode: String,
    },
    /// Check the lower-bound sum against its closed form for T = 4, 8, ..., TMAX.
    IdentityCheck {
        #[arg(value_name = "TMAX")]
        max_horizon: usize,
    },
    /// Run the invariant and oracle self-checks.
    Validate {
        /// Include the T = 12 exhaustive search and larger samples.
        #[arg(long)]
        thorough: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, serial, output } => cmd_run(&config, serial, output),
        Command::Bench {
            instance,
            horizon,
            seed,
            strategy,
            mode,
        } => cmd_bench(&instance, horizon, seed, &strategy, &mode),
        Command::IdentityCheck { max_horizon } => cmd_identity(max_horizon),
        Command::Validate { thorough } => cmd_validate(thorough),
    }
}

fn config_failure(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(EXIT_CONFIG)
}

fn cmd_run(path: &Path, serial: bool, output: Option<PathBuf>) -> ExitCode {
    let mut config = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return config_failure(e),
    };
    if output.is_some() {
        config.output = output;
    }
    let registry = StrategyRegistry::with_builtins();
    let report = match run_experiment(&config, &registry, RunOptions { parallel: !serial }) {
        Ok(r) => r,
        Err(RunError::Config(e)) => return config_failure(e),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    print!("{}", render_table(&report));
    let out = config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.experiment_id)));
    if let Err(e) = write_csv_file(&report, &out) {
        eprintln!("writing {}: {e}", out.display());
        return ExitCode::FAILURE;
    }
    println!("wrote {}", out.display());
    if let Some(svg) = &config.svg {
        if let Err(e) = std::fs::write(svg, render_svg(&report)) {
            eprintln!("writing {}: {e}", svg.display());
            return ExitCode::FAILURE;
        }
        println!("wrote {}", svg.display());
    }
    ExitCode::SUCCESS
}

fn load_instance(arg: &str, horizon: usize) -> Result<Instance, ConfigError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{arg}: {e}")))?;
        Instance::from_text(&text)
            .and_then(|i| i.with_horizon(horizon))
            .map_err(|e| ConfigError(format!("{arg}: {e}")))
    } else {
        make_named_instance(arg, horizon, &|_| None).map_err(|e| ConfigError(e.to_string()))
    }
}

fn cmd_bench(instance: &str, horizon: usize, seed: u64, strategy: &str, mode: &str) -> ExitCode {
    let inst = match load_instance(instance, horizon) {
        Ok(i) => i,
        Err(e) => return config_failure(e),
    };
    let mode: InfoMode = match mode.parse() {
        Ok(m) => m,
        Err(e) => return config_failure(e),
    };
    println!(
        "instance {} T={} rho={} vmax={}",
        inst.name, inst.horizon, inst.budget_rate, inst.value_ceiling
    );
    if let Some((f, g)) = inst.iid_pair() {
        let fl = fluid_opt(f, g, inst.budget_rate);
        let dl = dlp_opt(f, g, inst.budget_rate);
        println!(
            "fluid OPT/T          {:.6}  (threshold {:.6}, binding {})",
            fl.per_round_value, fl.threshold_ratio, fl.binding
        );
        for (v, pi) in &fl.policy {
            println!("  participation({v}) = {pi:.6}");
        }
        println!(
            "deterministic OPT*/T {:.6}  (shading threshold {:.6})",
            dl.per_round_value, dl.shading_threshold
        );
    } else {
        println!("LP benchmarks need i.i.d. values and prices; skipped");
    }
    let registry = StrategyRegistry::with_builtins();
    let mut s = match registry.build(&StrategySpec::new(strategy), &BuildContext { instance: &inst }) {
        Ok(s) => s,
        Err(e) => return config_failure(e),
    };
    let cfg = EpisodeConfig::for_instance(&inst, mode, seed);
    let tr = match run_episode(s.as_mut(), &inst, &cfg) {
        Ok(t) => t,
        Err(e) => return config_failure(e),
    };
    match hindsight_opt(&tr.values(), &tr.prices(), tr.budget, None) {
        Ok(h) => {
            println!("episode seed {seed} ({strategy}, {mode}): reward {:.6}, spend {:.6}", tr.total_reward, tr.total_cost);
            println!(
                "hindsight R^H        {:.6}{}",
                h.value,
                if h.exact {
                    String::new()
                } else {
                    format!(" (greedy; relaxation bound {:.6})", h.upper_bound)
                }
            );
            ExitCode::SUCCESS
        }
        Err(e) => config_failure(e),
    }
}

fn cmd_identity(max_horizon: usize) -> ExitCode {
    if max_horizon < 4 {
        return config_failure("TMAX must be at least 4");
    }
    let rows = identity_sweep(max_horizon);
    let mut ok = true;
    for r in &rows {
        let holds = r.holds();
        ok &= holds;
        println!("T={:<5} {} {}", r.horizon, if holds { "ok  " } else { "FAIL" }, r.sum);
    }
    println!("{} of {} horizons match exactly", rows.iter().filter(|r| r.holds()).count(), rows.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVARIANT)
    }
}

fn cmd_validate(thorough: bool) -> ExitCode {
    let results = run_validation(thorough);
    let mut ok = true;
    for c in &results {
        ok &= c.passed;
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVARIANT)
    }
}
