//! Experiment persistence: long-format regret CSV and a JSON manifest tying
//! outputs to the exact config and seed that produced them.

use serde::Serialize;
use std::io;

use super::config::ExperimentConfig;
use super::ExperimentOutcome;

/// Provenance record written next to every regret CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Manifest {
            config_hash: config.config_hash(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

/// Writes the long-format regret table: one row per (checkpoint, trial),
/// then `mean` and `std` rows per checkpoint. Identical configs and seeds
/// produce byte-identical output.
pub fn write_regret_csv<W: io::Write>(outcome: &ExperimentOutcome, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["checkpoint_t", "trial", "cumulative_regret"])?;
    for trace in &outcome.traces {
        let trial = trace.trial_index.to_string();
        for (t, r) in trace.checkpoints.iter().zip(&trace.regret) {
            w.write_record([&t.to_string(), &trial, &r.to_string()])?;
        }
    }
    let agg = &outcome.aggregate;
    for (t, m) in agg.checkpoints.iter().zip(&agg.mean) {
        w.write_record([&t.to_string(), "mean", &m.to_string()])?;
    }
    for (t, s) in agg.checkpoints.iter().zip(&agg.std) {
        w.write_record([&t.to_string(), "std", &s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the manifest as pretty JSON (stable field order).
pub fn write_manifest_json<W: io::Write>(
    config: &ExperimentConfig,
    writer: W,
) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(writer, &Manifest::new(config))
}
