//! Deterministic experiment harness: the interaction loop
//! environment → mechanism → agent, pseudo-regret accounting, and
//! multi-trial aggregation.
//!
//! Regret is pseudo-regret: each round accrues the true-mean gap of the
//! chosen arm, so realized reward noise never enters the comparison. Trials
//! are independent units of work keyed by `(base seed, trial index)`; they
//! may run in any order or in parallel without changing a single byte of
//! output.

mod config;
mod output;

pub use config::{
    fig2_preset, geometric_checkpoints, AgentKind, ArmGroup, ConfigError, ExperimentConfig,
    MechanismName, DEFAULT_CHECKPOINT_COUNT,
};
pub use output::{write_manifest_json, write_regret_csv, Manifest};

use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{Policy, TsState, UcbState};
use crate::environments::BanditEnvironment;
use crate::mechanisms::{Mechanism, MechanismError};
use crate::seed::{derive_trial_seed, stream_rng, StreamRole};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("perturbation failed: {0}")]
    Mechanism(#[from] MechanismError),
}

/// Cumulative pseudo-regret of one trial at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub trial_index: u32,
    /// Mixed `(base seed, trial index)` identifier the trial's streams derive
    /// from.
    pub trial_seed: u64,
    pub checkpoints: Vec<u64>,
    pub regret: Vec<f64>,
}

/// Mean and standard deviation of regret across trials, per checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub trials: u32,
}

impl AggregateResult {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("at least one checkpoint")
    }

    pub fn final_std(&self) -> f64 {
        *self.std.last().expect("at least one checkpoint")
    }
}

/// Per-trial traces plus their aggregate, kept together so outputs can
/// persist both.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutcome {
    pub traces: Vec<RegretTrace>,
    pub aggregate: AggregateResult,
}

/// Runs one trial: `horizon` rounds of select → sample → perturb → update,
/// recording cumulative pseudo-regret at each checkpoint.
pub fn run_trial(config: &ExperimentConfig, trial_index: u32) -> Result<RegretTrace, HarnessError> {
    let env = config.build_environment()?;
    let mech = config.build_mechanism()?;
    let checkpoints = config.effective_checkpoints();
    let (trace, _) = run_prepared_trial(&env, &mech, config, &checkpoints, trial_index)?;
    Ok(trace)
}

/// As [`run_trial`], also returning the arm chosen in every round. The trace
/// is a pure function of that choice sequence.
pub fn run_trial_with_choices(
    config: &ExperimentConfig,
    trial_index: u32,
) -> Result<(RegretTrace, Vec<u32>), HarnessError> {
    let env = config.build_environment()?;
    let mech = config.build_mechanism()?;
    let checkpoints = config.effective_checkpoints();
    run_prepared_trial(&env, &mech, config, &checkpoints, trial_index)
}

fn run_prepared_trial(
    env: &BanditEnvironment,
    mech: &Mechanism,
    config: &ExperimentConfig,
    checkpoints: &[u64],
    trial_index: u32,
) -> Result<(RegretTrace, Vec<u32>), HarnessError> {
    let mut env_rng = stream_rng(config.seed, trial_index, StreamRole::Environment);
    let mut mech_rng = stream_rng(config.seed, trial_index, StreamRole::Mechanism);
    let mut agent_rng = stream_rng(config.seed, trial_index, StreamRole::Agent);

    let mut agent: Box<dyn Policy> = match config.agent {
        AgentKind::Ts => Box::new(TsState::new(env.num_arms())),
        AgentKind::Ucb => Box::new(UcbState::new(env.num_arms())),
    };

    let gaps = env.true_gaps();
    let arms = env.arms();
    let mut choices = Vec::with_capacity(config.horizon as usize);
    let mut cumulative = 0.0f64;
    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0usize;

    for t in 1..=config.horizon {
        let choice = agent.select(&mut agent_rng);
        let arm = choice.index();
        let raw = arms[arm].sample(&mut env_rng);
        let y = mech.perturb(raw, &mut mech_rng)?;
        agent.update(choice, y);

        cumulative += gaps[arm];
        choices.push(arm as u32);
        while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == t {
            regret.push(cumulative);
            next_checkpoint += 1;
        }
    }

    Ok((
        RegretTrace {
            trial_index,
            trial_seed: derive_trial_seed(config.seed, trial_index),
            checkpoints: checkpoints.to_vec(),
            regret,
        },
        choices,
    ))
}

/// Runs all trials (in parallel) and aggregates mean and standard deviation
/// per checkpoint. The result is independent of execution order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    config.validate()?;
    let env = config.build_environment()?;
    let mech = config.build_mechanism()?;
    let checkpoints = config.effective_checkpoints();

    let traces: Vec<RegretTrace> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            run_prepared_trial(&env, &mech, config, &checkpoints, trial).map(|(trace, _)| trace)
        })
        .collect::<Result<_, _>>()?;

    let aggregate = aggregate_traces(&traces, &checkpoints);
    Ok(ExperimentOutcome { traces, aggregate })
}

/// Mean and sample standard deviation per checkpoint (zero std for a single
/// trial).
fn aggregate_traces(traces: &[RegretTrace], checkpoints: &[u64]) -> AggregateResult {
    let n = traces.len();
    let mut mean = vec![0.0f64; checkpoints.len()];
    let mut std = vec![0.0f64; checkpoints.len()];
    for trace in traces {
        for (j, &v) in trace.regret.iter().enumerate() {
            mean[j] += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    if n > 1 {
        for trace in traces {
            for (j, &v) in trace.regret.iter().enumerate() {
                let d = v - mean[j];
                std[j] += d * d;
            }
        }
        for s in &mut std {
            *s = (*s / (n as f64 - 1.0)).sqrt();
        }
    }
    AggregateResult {
        checkpoints: checkpoints.to_vec(),
        mean,
        std,
        trials: n as u32,
    }
}
