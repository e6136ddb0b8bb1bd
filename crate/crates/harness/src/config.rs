//! Experiment configuration files (TOML).
//!
//! ```toml
//! experiment_id = "thm1-scaling"
//! horizons = [1024, 2048, 4096, 8192]
//! replications = 200
//! seed = 7
//! info_mode = "partial"        # default "full"
//! mu = 0.5                     # default rho / vmax
//! hindsight = true             # solve the hindsight knapsack per episode
//! output = "thm1.csv"          # relative to the config file
//! svg = "thm1.svg"             # optional log-log regret chart
//!
//! [instance]
//! kind = "thm1"                # or: file = "my_instance.txt"
//! params = { }                 # generator parameters, e.g. { mu = 1.0 }
//!
//! [[strategy]]
//! name = "ogd-cb"
//!
//! [[strategy]]
//! name = "pacing"
//! params = { step = 0.01 }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use throttle_core::instances::{make_named_instance, Instance};
use throttle_core::model::InfoMode;
use throttle_core::strategies::{StrategyRegistry, StrategySpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment_id: String,
    instance: RawInstance,
    #[serde(rename = "strategy")]
    strategies: Vec<RawStrategy>,
    horizons: Vec<usize>,
    #[serde(default = "default_replications")]
    replications: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    info_mode: Option<String>,
    #[serde(default)]
    mu: Option<f64>,
    #[serde(default = "default_true")]
    hindsight: bool,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    svg: Option<PathBuf>,
}

fn default_replications() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    kind: Option<String>,
    file: Option<PathBuf>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    name: String,
    #[serde(default)]
    params: BTreeMap<String, toml::Value>,
}

/// Where an experiment's instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    /// A built-in generator, re-run for every horizon.
    Generator {
        kind: String,
        params: BTreeMap<String, f64>,
    },
    /// An instance file, resized to every horizon.
    File(PathBuf),
}

impl InstanceSpec {
    pub fn build(&self, horizon: usize) -> Result<Instance, ConfigError> {
        match self {
            InstanceSpec::Generator { kind, params } => {
                make_named_instance(kind, horizon, &|k| params.get(k).copied())
                    .map_err(|e| bad(format!("instance `{kind}` at T={horizon}: {e}")))
            }
            InstanceSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
                let inst = Instance::from_text(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
                inst.with_horizon(horizon)
                    .map_err(|e| bad(format!("{} at T={horizon}: {e}", path.display())))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InstanceSpec::Generator { kind, params } if params.is_empty() => kind.clone(),
            InstanceSpec::Generator { kind, params } => {
                let kv: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{kind}({})", kv.join(","))
            }
            InstanceSpec::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub instance: InstanceSpec,
    pub strategies: Vec<StrategySpec>,
    /// Strictly increasing.
    pub horizons: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub info_mode: InfoMode,
    /// Competitiveness factor for the gap statistic; `None` means `rho/vmax`.
    pub mu: Option<f64>,
    pub hindsight: bool,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let instance = match (raw.instance.kind, raw.instance.file) {
            (Some(kind), None) => InstanceSpec::Generator {
                kind,
                params: raw.instance.params,
            },
            (None, Some(file)) => InstanceSpec::File(base_dir.join(file)),
            _ => return Err(bad("[instance] needs exactly one of `kind` or `file`")),
        };
        let strategies = raw
            .strategies
            .into_iter()
            .map(|s| {
                let params = s
                    .params
                    .into_iter()
                    .map(|(k, v)| {
                        let v = match v {
                            toml::Value::String(s) => s,
                            toml::Value::Integer(i) => i.to_string(),
                            toml::Value::Float(f) => f.to_string(),
                            toml::Value::Boolean(b) => b.to_string(),
                            other => return Err(bad(format!("strategy param `{k}` = {other} is not a scalar"))),
                        };
                        Ok((k, v))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(StrategySpec { name: s.name, params })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let info_mode = match raw.info_mode {
            None => InfoMode::Full,
            Some(s) => s.parse().map_err(|_| bad(format!("unknown info_mode `{s}`")))?,
        };
        let cfg = Self {
            experiment_id: raw.experiment_id,
            instance,
            strategies,
            horizons: raw.horizons,
            replications: raw.replications,
            seed: raw.seed,
            info_mode,
            mu: raw.mu,
            hindsight: raw.hindsight,
            output: raw.output.map(|p| base_dir.join(p)),
            svg: raw.svg.map(|p| base_dir.join(p)),
        };
        cfg.validate(&StrategyRegistry::with_builtins())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, dir)
    }

    pub fn validate(&self, registry: &StrategyRegistry) -> Result<(), ConfigError> {
        if self.replications == 0 {
            return Err(bad("replications must be >= 1"));
        }
        if self.horizons.is_empty() {
            return Err(bad("horizons must not be empty"));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("horizons must be strictly increasing"));
        }
        if self.strategies.is_empty() {
            return Err(bad("at least one [[strategy]] is required"));
        }
        for s in &self.strategies {
            if !registry.contains(&s.name) {
                let known: Vec<&str> = registry.names().collect();
                return Err(bad(format!("unknown strategy `{}` (known: {})", s.name, known.join(", "))));
            }
        }
        if let Some(mu) = self.mu {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(bad(format!("mu = {mu} must be a non-negative number")));
            }
        }
        // Surface instance errors before any episode runs.
        self.instance.build(self.horizons[0])?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        experiment_id = "t"
        horizons = [16, 32]
        replications = 3
        [instance]
        kind = "thm1"
        [[strategy]]
        name = "ogd-cb"
        [[strategy]]
        name = "pacing"
        params = { step = 0.05, mu0 = "0.1" }
    "#;

    #[test]
    fn parses_basic_config() {
        let c = ExperimentConfig::from_toml(BASIC, Path::new("/tmp")).unwrap();
        assert_eq!(c.horizons, vec![16, 32]);
        assert_eq!(c.info_mode, InfoMode::Full);
        assert!(c.hindsight);
        assert_eq!(c.strategies[1].params["step"], "0.05");
        assert_eq!(c.strategies[1].params["mu0"], "0.1");
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            BASIC.replace("replications = 3", "replications = 0"),
            BASIC.replace("[16, 32]", "[32, 16]"),
            BASIC.replace("\"ogd-cb\"", "\"nope\""),
            BASIC.replace("kind = \"thm1\"", "kind = \"thm1\"\nfile = \"x\""),
            BASIC.replace("[16, 32]", "[18, 32]"),
            BASIC.replace("experiment_id", "experiment"),
        ];
        for text in cases {
            assert!(ExperimentConfig::from_toml(&text, Path::new("/tmp")).is_err(), "{text}");
        }
    }
}
