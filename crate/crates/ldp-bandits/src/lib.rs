//! Locally differentially private multi-armed bandits under Bernoulli
//! response mechanisms.
//!
//! The crate provides four layers:
//!
//! - [`mechanisms`]: the privatizing response-probability families (linear,
//!   quadratic, exponential) with verification of the privacy guarantee;
//! - [`environments`]: bounded reward distributions on `[0, 1]` with exact
//!   sampling and analytic moments;
//! - [`agents`]: Thompson Sampling and UCB1 policies that only ever observe
//!   privatized bits;
//! - [`bounds`]: analytic cumulative-regret upper bounds for both policies
//!   under each mechanism;
//! - [`harness`]: a deterministic, seedable experiment runner with CSV and
//!   manifest outputs, including the 20-arm benchmark preset.
//!
//! Everything is reproducible: a config plus a base seed pins every random
//! draw of every trial.

pub mod agents;
pub mod bounds;
pub mod environments;
pub mod harness;
pub mod mechanisms;
mod quad;
pub mod seed;

pub use agents::{ArmChoice, Policy, TsState, UcbState};
pub use bounds::{
    privatized_gap, privatized_mean, ts_bound, ts_bound_from_gaps, ucb_bound, ucb_bound_from_gaps,
    BoundAlgorithm, BoundReport, BoundsError, GapReport,
};
pub use environments::{ArmDistribution, BanditEnvironment, EnvironmentError};
pub use harness::{
    fig2_preset, run_experiment, run_trial, run_trial_with_choices, write_manifest_json,
    write_regret_csv, AgentKind, AggregateResult, ArmGroup, ConfigError, ExperimentConfig,
    ExperimentOutcome, HarnessError, Manifest, MechanismName, RegretTrace,
};
pub use mechanisms::{
    ConditionCheck, ConditionReport, Mechanism, MechanismError, MechanismKind, PrivacyBudget,
    PrivatizedReward,
};
