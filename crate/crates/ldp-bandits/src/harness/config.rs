//! Experiment configuration: a flat key-value TOML document plus the arms
//! list, round-trippable so a manifest can echo the effective config exactly.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::environments::{ArmDistribution, BanditEnvironment, EnvironmentError};
use crate::mechanisms::{Mechanism, MechanismError, PrivacyBudget};

/// Number of geometrically spaced checkpoints when none are given.
pub const DEFAULT_CHECKPOINT_COUNT: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unknown mechanism {0:?}; expected linear, quadratic, or exponential")]
    UnknownMechanism(String),
    #[error("unknown agent {0:?}; expected ts or ucb")]
    UnknownAgent(String),
    #[error("unknown arm variant {0:?}; expected bernoulli, beta, two_point, or uniform")]
    UnknownArmVariant(String),
    #[error("arm variant {variant} takes {expected} params, got {got}")]
    WrongParamCount {
        variant: String,
        expected: usize,
        got: usize,
    },
    #[error("arm group count must be >= 1")]
    EmptyArmGroup,
    #[error("horizon must be >= 1")]
    BadHorizon,
    #[error("trials must be >= 1")]
    BadTrials,
    #[error("checkpoints must be sorted, unique, and within [1, horizon]")]
    BadCheckpoints,
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
}

/// Which policy runs the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Ts,
    Ucb,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Ts => "ts",
            AgentKind::Ucb => "ucb",
        }
    }
}

impl FromStr for AgentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "ts" => Ok(AgentKind::Ts),
            "ucb" => Ok(AgentKind::Ucb),
            other => Err(ConfigError::UnknownAgent(other.to_string())),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Response-probability family selector as it appears in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismName {
    Linear,
    Quadratic,
    Exponential,
}

impl MechanismName {
    pub fn name(self) -> &'static str {
        match self {
            MechanismName::Linear => "linear",
            MechanismName::Quadratic => "quadratic",
            MechanismName::Exponential => "exponential",
        }
    }
}

impl FromStr for MechanismName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(MechanismName::Linear),
            "quadratic" => Ok(MechanismName::Quadratic),
            "exponential" => Ok(MechanismName::Exponential),
            other => Err(ConfigError::UnknownMechanism(other.to_string())),
        }
    }
}

impl fmt::Display for MechanismName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A group of identically distributed arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmGroup {
    /// One of `bernoulli`, `beta`, `two_point`, `uniform`.
    pub variant: String,
    /// Positional parameters: bernoulli `[mu]`, beta `[alpha, beta]`,
    /// two_point `[lo, hi, p_hi]`, uniform `[lo, hi]`.
    pub params: Vec<f64>,
    #[serde(default = "one")]
    pub count: u32,
}

fn one() -> u32 {
    1
}

impl ArmGroup {
    pub fn new(variant: &str, params: &[f64], count: u32) -> Self {
        ArmGroup {
            variant: variant.to_string(),
            params: params.to_vec(),
            count,
        }
    }

    /// The distribution this group repeats.
    pub fn distribution(&self) -> Result<ArmDistribution, ConfigError> {
        let check = |expected: usize| {
            if self.params.len() == expected {
                Ok(())
            } else {
                Err(ConfigError::WrongParamCount {
                    variant: self.variant.clone(),
                    expected,
                    got: self.params.len(),
                })
            }
        };
        match self.variant.to_ascii_lowercase().as_str() {
            "bernoulli" => {
                check(1)?;
                Ok(ArmDistribution::bernoulli(self.params[0])?)
            }
            "beta" => {
                check(2)?;
                Ok(ArmDistribution::beta(self.params[0], self.params[1])?)
            }
            "two_point" => {
                check(3)?;
                Ok(ArmDistribution::two_point(
                    self.params[0],
                    self.params[1],
                    self.params[2],
                )?)
            }
            "uniform" => {
                check(2)?;
                Ok(ArmDistribution::uniform_interval(
                    self.params[0],
                    self.params[1],
                )?)
            }
            other => Err(ConfigError::UnknownArmVariant(other.to_string())),
        }
    }
}

/// One experiment cell: environment, mechanism, agent, horizon, trials, seed,
/// and the checkpoints at which cumulative regret is recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mechanism: MechanismName,
    /// Privacy budget; `inf` selects the non-private baseline.
    pub epsilon: f64,
    /// Quadratic shape parameter; ignored by the other mechanisms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub agent: AgentKind,
    pub horizon: u64,
    pub trials: u32,
    pub seed: u64,
    /// Explicit checkpoints; when absent, a geometric schedule of
    /// [`DEFAULT_CHECKPOINT_COUNT`] points over `[1, horizon]` applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    pub arms: Vec<ArmGroup>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        Ok(std::fs::write(path, self.to_toml_string()?)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon < 1 {
            return Err(ConfigError::BadHorizon);
        }
        if self.trials < 1 {
            return Err(ConfigError::BadTrials);
        }
        if let Some(cps) = &self.checkpoints {
            let sorted_unique = cps.windows(2).all(|w| w[0] < w[1]);
            let in_range = cps.iter().all(|&t| (1..=self.horizon).contains(&t));
            if cps.is_empty() || !sorted_unique || !in_range {
                return Err(ConfigError::BadCheckpoints);
            }
        }
        self.build_mechanism()?;
        self.build_environment()?;
        Ok(())
    }

    pub fn build_mechanism(&self) -> Result<Mechanism, ConfigError> {
        let budget = if self.epsilon.is_infinite() && self.epsilon > 0.0 {
            PrivacyBudget::infinite()
        } else {
            PrivacyBudget::finite(self.epsilon)?
        };
        Ok(match self.mechanism {
            MechanismName::Linear => Mechanism::linear(budget),
            MechanismName::Quadratic => Mechanism::quadratic(budget, self.b.unwrap_or(0.0))?,
            MechanismName::Exponential => Mechanism::exponential(budget),
        })
    }

    pub fn build_environment(&self) -> Result<BanditEnvironment, ConfigError> {
        let mut arms = Vec::new();
        for group in &self.arms {
            if group.count < 1 {
                return Err(ConfigError::EmptyArmGroup);
            }
            let dist = group.distribution()?;
            arms.extend(std::iter::repeat_n(dist, group.count as usize));
        }
        Ok(BanditEnvironment::new(arms)?)
    }

    /// The checkpoint schedule actually used: explicit, or geometric.
    pub fn effective_checkpoints(&self) -> Vec<u64> {
        match &self.checkpoints {
            Some(cps) => cps.clone(),
            None => geometric_checkpoints(self.horizon, DEFAULT_CHECKPOINT_COUNT),
        }
    }

    /// SHA-256 of the canonical TOML serialization; recorded in manifests so
    /// outputs are traceable to the exact effective config.
    pub fn config_hash(&self) -> String {
        let text = self.to_toml_string().expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Up to `count` geometrically spaced timesteps over `[1, horizon]`,
/// deduplicated, always ending at the horizon.
pub fn geometric_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    if horizon <= 1 || count <= 1 {
        return vec![horizon.max(1)];
    }
    let mut points = Vec::with_capacity(count);
    let last = (count - 1) as f64;
    for k in 0..count {
        let t = (horizon as f64).powf(k as f64 / last).round() as u64;
        points.push(t.clamp(1, horizon));
    }
    points.dedup();
    points
}

/// The 20-arm benchmark environment: one Bernoulli(0.9) optimum, five
/// Beta(4, 1), five two-point {0.4, 1}, five Bernoulli(0.6), four uniform
/// [0, 1]; 50 trials.
pub fn fig2_preset() -> ExperimentConfig {
    ExperimentConfig {
        mechanism: MechanismName::Linear,
        epsilon: 1.0,
        b: None,
        agent: AgentKind::Ts,
        horizon: 50_000,
        trials: 50,
        seed: 0,
        checkpoints: None,
        arms: vec![
            ArmGroup::new("bernoulli", &[0.9], 1),
            ArmGroup::new("beta", &[4.0, 1.0], 5),
            ArmGroup::new("two_point", &[0.4, 1.0, 0.5], 5),
            ArmGroup::new("bernoulli", &[0.6], 5),
            ArmGroup::new("uniform", &[0.0, 1.0], 4),
        ],
    }
}
