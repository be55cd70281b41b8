use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::record::TrialRecord;
use crate::entropy::LOG_BASE;
use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

/// Interior edges of the slack histogram. Bin `i` holds values in
/// `[edges[i-1], edges[i])`, with open-ended first and last bins.
pub const SLACK_BIN_EDGES: [f64; 9] = [-1e-3, -1e-6, -1e-9, 0.0, 1e-9, 1e-6, 1e-3, 1e-1, 1.0];

/// How the conjecture search embeds the two-input channel in a joint state.
pub const CONJECTURE_CHANNEL: &str = "Tr_X2[(U_tau ⊗ I_E) rho_X1X2E (U_tau ⊗ I_E)^dagger]";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    #[serde(with = "crate::jsonfmt::vec")]
    pub edges: Vec<f64>,
    pub counts: BTreeMap<String, Vec<u64>>,
}

impl Histogram {
    fn new() -> Self {
        Self {
            edges: SLACK_BIN_EDGES.to_vec(),
            counts: BTreeMap::new(),
        }
    }

    fn add(&mut self, key: &str, value: f64) {
        let bins = self
            .counts
            .entry(key.to_string())
            .or_insert_with(|| vec![0; SLACK_BIN_EDGES.len() + 1]);
        let bin = SLACK_BIN_EDGES.iter().take_while(|&&e| value >= e).count();
        bins[bin] += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub samplers: BTreeSet<String>,
    pub log_base: String,
    pub rng: String,
    pub version: String,
    pub conjecture_channel: String,
}

impl Default for Metadata {
    fn default() -> Self {
        Self {
            samplers: BTreeSet::new(),
            log_base: LOG_BASE.to_string(),
            rng: RNG_ALGORITHM.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            conjecture_channel: CONJECTURE_CHANNEL.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub violations: usize,
    #[serde(with = "crate::jsonfmt::map")]
    pub min_slack: BTreeMap<String, f64>,
    #[serde(with = "crate::jsonfmt::map")]
    pub min_diagnostic: BTreeMap<String, f64>,
    #[serde(with = "crate::jsonfmt::opt")]
    pub max_residual: Option<f64>,
    #[serde(with = "crate::jsonfmt::map")]
    pub max_residuals: BTreeMap<String, f64>,
    pub negligible_outcomes: usize,
    pub candidates: usize,
    pub reverified_candidates: usize,
    pub histogram: Histogram,
    pub metadata: Metadata,
}

impl Summary {
    /// Summary of a run that produced no records.
    pub fn empty() -> Self {
        Self {
            trials: 0,
            violations: 0,
            min_slack: BTreeMap::new(),
            min_diagnostic: BTreeMap::new(),
            max_residual: None,
            max_residuals: BTreeMap::new(),
            negligible_outcomes: 0,
            candidates: 0,
            reverified_candidates: 0,
            histogram: Histogram::new(),
            metadata: Metadata::default(),
        }
    }

    /// Whether the run found a hard violation or a re-verified candidate.
    pub fn has_findings(&self) -> bool {
        self.violations > 0 || self.reverified_candidates > 0
    }
}

fn fold_min(map: &mut BTreeMap<String, f64>, key: &str, v: f64) {
    let e = map.entry(key.to_string()).or_insert(v);
    if v < *e || v.is_nan() {
        *e = v;
    }
}

fn fold_max(map: &mut BTreeMap<String, f64>, key: &str, v: f64) {
    let e = map.entry(key.to_string()).or_insert(v);
    if v > *e || v.is_nan() {
        *e = v;
    }
}

/// Order-independent aggregation of trial records.
pub fn summarize(records: &[TrialRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut s = Summary::empty();
    s.trials = records.len();
    for r in records {
        if !r.pass {
            s.violations += 1;
        }
        s.negligible_outcomes += r.negligible_outcomes;
        s.metadata.samplers.insert(r.sampler.clone());
        for (k, &v) in &r.slacks {
            fold_min(&mut s.min_slack, k, v);
            s.histogram.add(k, v);
        }
        for (k, &v) in &r.diagnostics {
            fold_min(&mut s.min_diagnostic, k, v);
        }
        for (k, &v) in &r.residuals {
            fold_max(&mut s.max_residuals, k, v);
        }
        if let Some(c) = &r.candidate {
            s.candidates += 1;
            if c.reverified {
                s.reverified_candidates += 1;
            }
        }
    }
    s.max_residual = s.max_residuals.values().copied().reduce(|a, b| if b > a || b.is_nan() { b } else { a });
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::record::Experiment;

    fn record(i: usize, slack: f64) -> TrialRecord {
        let mut r = TrialRecord::new(Experiment::Qepi, i, "ginibre".into(), 0.5);
        r.slack("qepi@kappa1", slack);
        r.residual("channel_oracle", 1e-15 * i as f64);
        r.settle(1e-9);
        r
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput)));
        assert_eq!(Summary::empty().trials, 0);
    }

    #[test]
    fn single_pass() {
        let s = summarize(&[record(0, 0.1)]).unwrap();
        assert_eq!((s.trials, s.violations), (1, 0));
        assert!(!s.has_findings());
    }

    #[test]
    fn one_failure() {
        let s = summarize(&[record(0, 0.1), record(1, -0.5), record(2, 0.0)]).unwrap();
        assert_eq!(s.violations, 1);
        assert_eq!(s.min_slack["qepi@kappa1"], -0.5);
        assert_eq!(s.max_residual, Some(2e-15));
        assert_eq!(s.histogram.counts["qepi@kappa1"].iter().sum::<u64>(), 3);
        assert!(s.has_findings());
    }

    #[test]
    fn order_independent() {
        let rs: Vec<_> = (0..7).map(|i| record(i, (i as f64 - 3.0) * 0.37)).collect();
        let mut rev = rs.clone();
        rev.reverse();
        rev.swap(1, 4);
        assert_eq!(summarize(&rs).unwrap(), summarize(&rev).unwrap());
    }

    #[test]
    fn histogram_bins() {
        let mut h = Histogram::new();
        for v in [-1.0, -1e-9, 0.0, 5e-10, 2.0] {
            h.add("k", v);
        }
        assert_eq!(h.counts["k"], vec![1, 0, 0, 1, 2, 0, 0, 0, 0, 1]);
    }
}
