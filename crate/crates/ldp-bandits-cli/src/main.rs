//! Command-line entry point: experiments, bound evaluation, mechanism
//! verification, and the benchmark preset.
//!
//! Exit codes: 0 success, 1 invalid arguments or config, 2 LDP verification
//! failure, 3 degenerate environment for bound commands.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use ldp_bandits::{
    fig2_preset, run_experiment, ts_bound, ucb_bound, write_manifest_json, write_regret_csv,
    AgentKind, ArmGroup, BoundsError, ExperimentConfig, Mechanism, MechanismName, PrivacyBudget,
};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_LDP_VIOLATION: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ldp-bandits",
    about = "Locally differentially private bandit simulations, regret bounds, and mechanism checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write a regret CSV plus a provenance manifest.
    Run(RunArgs),
    /// Evaluate the analytic regret bound for a configuration.
    Bounds(BoundsArgs),
    /// Verify the LDP conditions and worst-case ratio of a mechanism.
    VerifyLdp(VerifyArgs),
    /// Write a preset experiment config.
    Preset(PresetArgs),
}

/// Config-mirroring flags; each one overrides the matching config key.
#[derive(Args, Clone, Default)]
struct ConfigFlags {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mechanism: linear, quadratic, or exponential.
    #[arg(long)]
    mechanism: Option<String>,
    /// Privacy budget; a decimal or `inf` for the non-private baseline.
    #[arg(long)]
    epsilon: Option<String>,
    /// Quadratic shape parameter (valid range [0, 2(e^eps - 1)]).
    #[arg(long)]
    b: Option<f64>,
    /// Agent: ts or ucb.
    #[arg(long)]
    agent: Option<String>,
    /// Number of rounds per trial.
    #[arg(long)]
    horizon: Option<u64>,
    /// Number of independent trials.
    #[arg(long)]
    trials: Option<u32>,
    /// Base seed; trial streams derive from it deterministically.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated checkpoint timesteps (default: 100 geometric points).
    #[arg(long)]
    checkpoints: Option<String>,
    /// Arm group `variant(p1,p2,...)xCOUNT`, repeatable; replaces the config
    /// arms when given. Example: --arm "beta(4,1)x5" --arm "bernoulli(0.9)".
    #[arg(long = "arm")]
    arms: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Output directory for the CSV and manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for trials (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Bound to evaluate: ts or ucb (default: the config's agent).
    #[arg(long)]
    algorithm: Option<String>,
    /// Proof parameter in (0, 1) for the Thompson Sampling bound.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Multiplier for the implicit constant term.
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Also write the bound table as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Mechanism: linear, quadratic, or exponential.
    #[arg(long)]
    mechanism: String,
    /// Privacy budget; a decimal or `inf`.
    #[arg(long)]
    epsilon: String,
    /// Quadratic shape parameter.
    #[arg(long)]
    b: Option<f64>,
    /// Grid resolution for the condition and ratio checks.
    #[arg(long, default_value_t = 1001)]
    grid_points: usize,
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name; currently `fig2`.
    name: String,
    /// Where to write the config.
    #[arg(long)]
    out: PathBuf,
}

/// Any failure plus the exit code it maps to.
#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn invalid(message: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: message.to_string(),
        }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::invalid(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::VerifyLdp(args) => cmd_verify(args),
        Command::Preset(args) => cmd_preset(args),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Builds the effective config: the file (when given) with flag overrides
/// applied on top. Without a file, `--arm` is required and the remaining
/// fields fall back to documented defaults.
fn effective_config(flags: &ConfigFlags) -> Result<ExperimentConfig, CliError> {
    let mut config = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            if flags.arms.is_empty() {
                return Err(CliError::invalid(
                    "no --config given; at least one --arm is required",
                ));
            }
            ExperimentConfig {
                mechanism: MechanismName::Linear,
                epsilon: 1.0,
                b: None,
                agent: AgentKind::Ts,
                horizon: 10_000,
                trials: 1,
                seed: 0,
                checkpoints: None,
                arms: Vec::new(),
            }
        }
    };
    if let Some(m) = &flags.mechanism {
        config.mechanism = MechanismName::from_str(m)?;
    }
    if let Some(eps) = &flags.epsilon {
        config.epsilon = PrivacyBudget::parse(eps)?.epsilon();
    }
    if let Some(b) = flags.b {
        config.b = Some(b);
    }
    if let Some(a) = &flags.agent {
        config.agent = AgentKind::from_str(a)?;
    }
    if let Some(h) = flags.horizon {
        config.horizon = h;
    }
    if let Some(t) = flags.trials {
        config.trials = t;
    }
    if let Some(s) = flags.seed {
        config.seed = s;
    }
    if let Some(cps) = &flags.checkpoints {
        config.checkpoints = Some(parse_checkpoints(cps)?);
    }
    if !flags.arms.is_empty() {
        config.arms = flags
            .arms
            .iter()
            .map(|s| parse_arm_group(s))
            .collect::<Result<_, _>>()?;
    }
    config.validate()?;
    Ok(config)
}

fn parse_checkpoints(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| CliError::invalid(format!("bad checkpoint {s:?}: {e}")))
        })
        .collect()
}

/// Parses `variant(p1,p2,...)` with an optional `xCOUNT` suffix.
fn parse_arm_group(text: &str) -> Result<ArmGroup, CliError> {
    let bad = || CliError::invalid(format!("bad arm spec {text:?}; expected variant(p1,...)xN"));
    let (spec, count) = match text.rsplit_once('x') {
        Some((head, tail)) if tail.chars().all(|c| c.is_ascii_digit()) && !tail.is_empty() => {
            (head, tail.parse::<u32>().map_err(|_| bad())?)
        }
        _ => (text, 1),
    };
    let open = spec.find('(').ok_or_else(bad)?;
    if !spec.ends_with(')') {
        return Err(bad());
    }
    let variant = spec[..open].trim();
    let params: Vec<f64> = spec[open + 1..spec.len() - 1]
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if variant.is_empty() || params.is_empty() {
        return Err(bad());
    }
    Ok(ArmGroup::new(variant, &params, count))
}

fn format_epsilon(eps: f64) -> String {
    if eps.is_infinite() {
        "inf".to_string()
    } else {
        eps.to_string()
    }
}

/// One output file per (agent, mechanism, epsilon) cell.
fn cell_basename(config: &ExperimentConfig) -> String {
    format!(
        "{}-{}-eps{}",
        config.agent.name(),
        config.mechanism.name(),
        format_epsilon(config.epsilon)
    )
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let config = effective_config(&args.flags)?;

    let outcome = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(CliError::invalid)?
            .install(|| run_experiment(&config)),
        None => run_experiment(&config),
    }
    .map_err(CliError::invalid)?;

    std::fs::create_dir_all(&args.out)?;
    let base = cell_basename(&config);
    let csv_path = args.out.join(format!("{base}.csv"));
    let manifest_path = args.out.join(format!("{base}.manifest.json"));
    write_regret_csv(&outcome, File::create(&csv_path)?)?;
    write_manifest_json(&config, File::create(&manifest_path)?)?;

    println!(
        "cell {} | trials {} | horizon {} | seed {}",
        base, config.trials, config.horizon, config.seed
    );
    println!(
        "final regret mean {:.4} std {:.4}",
        outcome.aggregate.final_mean(),
        outcome.aggregate.final_std()
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn degenerate(e: &BoundsError) -> bool {
    matches!(
        e,
        BoundsError::DegenerateEnvironment { .. }
            | BoundsError::OrderingInverted { .. }
            | BoundsError::VanishingPrivatizedGap { .. }
    )
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let config = effective_config(&args.flags)?;
    let algorithm = match &args.algorithm {
        Some(a) => AgentKind::from_str(a)?,
        None => config.agent,
    };
    let mech = config.build_mechanism()?;
    let env = config.build_environment()?;
    let horizon = config.horizon as f64;

    let result = match algorithm {
        AgentKind::Ts => ts_bound(&mech, &env, horizon, args.gamma, args.c0),
        AgentKind::Ucb => ucb_bound(&mech, &env, horizon),
    };
    let report = result.map_err(|e| CliError {
        code: if degenerate(&e) {
            EXIT_DEGENERATE
        } else {
            EXIT_INVALID
        },
        message: e.to_string(),
    })?;

    println!("{report}");
    if let Some(path) = &args.csv {
        report.write_csv(File::create(path)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let budget = PrivacyBudget::parse(&args.epsilon)?;
    let mech = match MechanismName::from_str(&args.mechanism)? {
        MechanismName::Linear => Mechanism::linear(budget),
        MechanismName::Quadratic => Mechanism::quadratic(budget, args.b.unwrap_or(0.0))?,
        MechanismName::Exponential => Mechanism::exponential(budget),
    };

    let report = mech.verify_ldp_conditions(args.grid_points)?;
    print!("{report}");

    let mut violated = !report.all_passed();
    if budget.is_finite() {
        let ratio = mech.worst_case_ratio(args.grid_points)?;
        let limit = budget.exp_epsilon();
        let ok = ratio <= limit + 1e-9;
        println!(
            "worst-case ratio = {ratio:.12} vs e^eps = {limit:.12} [{}]",
            if ok { "PASS" } else { "FAIL" }
        );
        violated |= !ok;
    } else {
        println!("worst-case ratio undefined for the infinite baseline");
    }

    if violated {
        Err(CliError {
            code: EXIT_LDP_VIOLATION,
            message: "LDP verification failed".to_string(),
        })
    } else {
        Ok(())
    }
}

fn cmd_preset(args: PresetArgs) -> Result<(), CliError> {
    let config = match args.name.as_str() {
        "fig2" => fig2_preset(),
        other => {
            return Err(CliError::invalid(format!(
                "unknown preset {other:?}; available: fig2"
            )))
        }
    };
    config.save(Path::new(&args.out))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
