use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Experiments the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Lemma,
    Theorem,
    Qepi,
    Concavity,
    Conjecture,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Lemma,
        Experiment::Theorem,
        Experiment::Qepi,
        Experiment::Concavity,
        Experiment::Conjecture,
    ];

    /// Tag keying the experiment's random streams.
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::Lemma => "lemma",
            Experiment::Theorem => "theorem",
            Experiment::Qepi => "qepi",
            Experiment::Concavity => "concavity",
            Experiment::Conjecture => "conjecture",
        }
    }
}

/// Everything needed to regenerate a conjecture candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub seed: u64,
    pub experiment_seed: u64,
    pub stream_index: u64,
    pub sampler: String,
    pub d: usize,
    pub d_e: usize,
}

/// A conjecture slack below the candidate threshold and its re-verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(with = "crate::jsonfmt")]
    pub slack: f64,
    /// Slack recomputed from the re-symmetrized input through the dense channel.
    #[serde(with = "crate::jsonfmt")]
    pub resymmetrized_slack: f64,
    /// Slack after mixing `1e-8` of an independent random state into the input.
    #[serde(with = "crate::jsonfmt")]
    pub perturbed_slack: f64,
    pub reverified: bool,
    pub reproduce: Reproduction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub check: Experiment,
    pub index: usize,
    pub sampler: String,
    #[serde(with = "crate::jsonfmt")]
    pub tau: f64,
    #[serde(with = "crate::jsonfmt::map")]
    pub kappa: BTreeMap<String, f64>,
    /// Hard assertions: each must be `>= -tolerance`.
    #[serde(with = "crate::jsonfmt::map")]
    pub slacks: BTreeMap<String, f64>,
    /// Reported only.
    #[serde(with = "crate::jsonfmt::map")]
    pub diagnostics: BTreeMap<String, f64>,
    /// Hard assertions: each must be `<= tolerance`.
    #[serde(with = "crate::jsonfmt::map")]
    pub residuals: BTreeMap<String, f64>,
    pub negligible_outcomes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Candidate>,
    pub pass: bool,
    /// Kept out of the output so identical runs serialize identically.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn new(check: Experiment, index: usize, sampler: String, tau: f64) -> Self {
        Self {
            check,
            index,
            sampler,
            tau,
            kappa: BTreeMap::new(),
            slacks: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            residuals: BTreeMap::new(),
            negligible_outcomes: 0,
            candidate: None,
            pass: true,
            wall_time: Duration::ZERO,
        }
    }

    /// Records `value` under `key`, keeping the worst (smallest) one.
    pub fn slack(&mut self, key: impl Into<String>, value: f64) {
        keep_min(&mut self.slacks, key.into(), value);
    }

    pub fn diagnostic(&mut self, key: impl Into<String>, value: f64) {
        keep_min(&mut self.diagnostics, key.into(), value);
    }

    /// Records `value` under `key`, keeping the worst (largest) one.
    pub fn residual(&mut self, key: impl Into<String>, value: f64) {
        let e = self.residuals.entry(key.into()).or_insert(value);
        if value > *e || value.is_nan() {
            *e = value;
        }
    }

    /// Sets `pass` from the hard slacks and residuals.
    pub fn settle(&mut self, tolerance: f64) {
        let slacks_ok = self.slacks.values().all(|&s| s >= -tolerance);
        let residuals_ok = self.residuals.values().all(|&r| r <= tolerance);
        let candidate_ok = self.candidate.as_ref().is_none_or(|c| !c.reverified);
        self.pass = slacks_ok && residuals_ok && candidate_ok;
    }
}

/// Equality ignores `wall_time`.
impl PartialEq for TrialRecord {
    fn eq(&self, other: &Self) -> bool {
        self.check == other.check
            && self.index == other.index
            && self.sampler == other.sampler
            && self.tau.to_bits() == other.tau.to_bits()
            && self.kappa == other.kappa
            && self.slacks == other.slacks
            && self.diagnostics == other.diagnostics
            && self.residuals == other.residuals
            && self.negligible_outcomes == other.negligible_outcomes
            && self.candidate == other.candidate
            && self.pass == other.pass
    }
}

fn keep_min(map: &mut BTreeMap<String, f64>, key: String, value: f64) {
    let e = map.entry(key).or_insert(value);
    if value < *e || value.is_nan() {
        *e = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_values_are_kept() {
        let mut r = TrialRecord::new(Experiment::Qepi, 0, "s".into(), 0.5);
        r.slack("a", 0.3);
        r.slack("a", -0.1);
        r.slack("a", 0.2);
        r.residual("b", 1e-12);
        r.residual("b", 1e-14);
        assert_eq!(r.slacks["a"], -0.1);
        assert_eq!(r.residuals["b"], 1e-12);
    }

    #[test]
    fn pass_flag_matches_thresholds() {
        let mut r = TrialRecord::new(Experiment::Lemma, 0, "s".into(), 0.5);
        r.slack("a", -1e-10);
        r.residual("b", 1e-10);
        r.settle(1e-9);
        assert!(r.pass);
        r.slack("a", -2e-9);
        r.settle(1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn nan_fails() {
        let mut r = TrialRecord::new(Experiment::Lemma, 0, "s".into(), 0.5);
        r.slack("a", 1.0);
        r.slack("a", f64::NAN);
        r.settle(1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn json_round_trip() {
        let mut r = TrialRecord::new(Experiment::Theorem, 3, "ginibre".into(), 0.123);
        r.kappa.insert("kappa1".into(), 1.0 / 2f64.ln().powi(2));
        r.slack("theorem@kappa1", 0.25);
        r.diagnostic("theorem_min_form@kappa1", -0.01);
        r.residual("normalization", 2e-16);
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<TrialRecord>(&text).unwrap(), r);
    }
}
