//! Randomized verification experiments.
//!
//! Every trial draws its randomness from its own stream, keyed by the run
//! seed, the experiment and the trial index, so records do not depend on
//! thread count or scheduling.

pub mod config;
pub mod conjecture;
pub mod record;
pub mod summary;
pub mod trials;

use rayon::prelude::*;

use crate::error::Result;

pub use config::{ConjectureSampler, KappaMode, MeasurementFamily, MinFormSettings, TauMode, TrialConfig};
pub use conjecture::run_conjecture_trial;
pub use record::{Candidate, Experiment, TrialRecord};
pub use summary::{summarize, Summary};
pub use trials::{run_concavity_trial, run_lemma_trial, run_qepi_trial, run_theorem_trial};

pub fn run_trial(experiment: Experiment, cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    match experiment {
        Experiment::Lemma => run_lemma_trial(cfg, index),
        Experiment::Theorem => run_theorem_trial(cfg, index),
        Experiment::Qepi => run_qepi_trial(cfg, index),
        Experiment::Concavity => run_concavity_trial(cfg, index),
        Experiment::Conjecture => run_conjecture_trial(cfg, index),
    }
}

/// All trials of one experiment, in index order.
pub fn run_experiment(experiment: Experiment, cfg: &TrialConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(experiment, cfg, i))
        .collect()
}

/// Conjecture trials and their summary.
pub fn search_conjecture(cfg: &TrialConfig) -> Result<(Vec<TrialRecord>, Summary)> {
    let records = run_experiment(Experiment::Conjecture, cfg)?;
    let summary = summarize(&records)?;
    Ok((records, summary))
}
