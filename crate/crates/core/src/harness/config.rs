use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::kappa_bounds;
use crate::error::{Error, Result};
use crate::measurement::{projective_from_unitary, MeasurementSet};
use crate::optimize::OptimizerConfig;
use crate::rng::{experiment_seed, RandomSource};
use crate::state::{random_unitary, StateKind};

/// Largest qudit dimension the harness accepts.
pub const MAX_DIM: usize = 6;
/// Largest dimension of each environment.
pub const MAX_ENV_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    Fixed(#[serde(with = "crate::jsonfmt")] f64),
    /// Uniform on `[0, 1]`, with trials 0, 1, 2 pinned to `0, 1/2, 1`.
    Random,
}

impl FromStr for TauMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(TauMode::Random),
            other => other
                .parse::<f64>()
                .map(TauMode::Fixed)
                .map_err(|_| Error::Config(format!("tau must be 'random' or a number, got '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMode {
    Fixed(#[serde(with = "crate::jsonfmt")] f64),
    /// `kappa1(d)` only.
    Max,
    /// `{0, kappa1/2, kappa1}`.
    Grid,
}

impl FromStr for KappaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(KappaMode::Max),
            "grid" => Ok(KappaMode::Grid),
            other => other
                .parse::<f64>()
                .map(KappaMode::Fixed)
                .map_err(|_| Error::Config(format!("kappa must be 'max', 'grid' or a number, got '{other}'"))),
        }
    }
}

/// Measurements applied to each environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementFamily {
    /// Rank-1 projective measurement in a Haar-random basis.
    HaarProjective,
    Computational,
    /// The single element `{I}`.
    Trivial,
}

impl MeasurementFamily {
    pub fn label(&self) -> &'static str {
        match self {
            MeasurementFamily::HaarProjective => "haar-projective",
            MeasurementFamily::Computational => "computational",
            MeasurementFamily::Trivial => "trivial",
        }
    }

    pub fn sample(&self, dim: usize, rng: &mut RandomSource) -> Result<MeasurementSet<f64>> {
        match self {
            MeasurementFamily::HaarProjective => projective_from_unitary(&random_unitary(dim, rng)?),
            MeasurementFamily::Computational => Ok(MeasurementSet::computational(dim)),
            MeasurementFamily::Trivial => Ok(MeasurementSet::trivial(dim)),
        }
    }
}

/// Ensemble for the joint `(X1, X2, E)` input of the conjecture search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureSampler {
    /// `X1` and `X2` conditionally independent given `E`: a random direct sum
    /// over blocks `E = ⊕_j A_j ⊗ B_j` of products `rho_{X1 A_j} ⊗ rho_{X2 B_j}`.
    /// With trivial `E` these are product inputs.
    Markov,
    /// Unconstrained state on the whole `(X1, X2, E)` space.
    Joint,
}

impl ConjectureSampler {
    pub fn label(&self) -> &'static str {
        match self {
            ConjectureSampler::Markov => "markov",
            ConjectureSampler::Joint => "joint",
        }
    }
}

/// Budget for the optimizer behind the theorem's min-form diagnostic.
/// `restarts = 0` skips the diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinFormSettings {
    pub restarts: usize,
    pub refine_steps: usize,
    #[serde(with = "crate::jsonfmt")]
    pub step_scale: f64,
}

impl Default for MinFormSettings {
    fn default() -> Self {
        Self {
            restarts: 2,
            refine_steps: 8,
            step_scale: 0.3,
        }
    }
}

impl MinFormSettings {
    pub fn enabled(&self) -> bool {
        self.restarts > 0
    }

    pub fn optimizer(&self, master_seed: u64, stream_index: u64) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            refine_steps: self.refine_steps,
            step_scale: self.step_scale,
            master_seed,
            stream_index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub d: usize,
    pub d_e1: usize,
    pub d_e2: usize,
    pub tau: TauMode,
    pub kappa: KappaMode,
    pub state_kind: StateKind,
    pub trials: usize,
    pub seed: u64,
    #[serde(with = "crate::jsonfmt")]
    pub tolerance: f64,
    pub exploratory_kappa: bool,
    pub measurement: MeasurementFamily,
    pub min_form: MinFormSettings,
    pub conjecture_sampler: ConjectureSampler,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            d: 2,
            d_e1: 2,
            d_e2: 2,
            tau: TauMode::Random,
            kappa: KappaMode::Grid,
            state_kind: StateKind::MixedGinibre,
            trials: 100,
            seed: 1,
            tolerance: 1e-9,
            exploratory_kappa: false,
            measurement: MeasurementFamily::HaarProjective,
            min_form: MinFormSettings::default(),
            conjecture_sampler: ConjectureSampler::Markov,
        }
    }
}

/// One entropy-power order in a run, with its record label and whether the
/// checks at this order are hard assertions.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaPoint {
    pub label: String,
    pub value: f64,
    pub hard: bool,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("dimension must be at least 2, got {}", self.d)));
        }
        if self.d > MAX_DIM {
            return Err(Error::Config(format!(
                "dimension {} exceeds the cap of {MAX_DIM}",
                self.d
            )));
        }
        for (name, e) in [("env-dim1", self.d_e1), ("env-dim2", self.d_e2)] {
            if e == 0 || e > MAX_ENV_DIM {
                return Err(Error::Config(format!(
                    "{name} must be between 1 and the cap of {MAX_ENV_DIM}, got {e}"
                )));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if let TauMode::Fixed(t) = self.tau {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("tau must lie in [0, 1], got {t}")));
            }
        }
        if let KappaMode::Fixed(k) = self.kappa {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(Error::Config(format!("kappa must be a non-negative number, got {k}")));
            }
            let (k1, _) = kappa_bounds::<f64>(self.d)?;
            if !self.exploratory_kappa && k > k1 * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "kappa {k} exceeds kappa1({}) = {k1}; pass --exploratory-kappa to record it as a diagnostic",
                    self.d
                )));
            }
        }
        if let StateKind::MixedRank(k) = self.state_kind {
            if k == 0 || k > self.d {
                return Err(Error::Config(format!(
                    "rank {k} must be between 1 and the dimension {}",
                    self.d
                )));
            }
        }
        if self.min_form.enabled() {
            self.min_form.optimizer(0, 0).validate()?;
        }
        Ok(())
    }

    pub fn kappa1(&self) -> f64 {
        kappa_bounds::<f64>(self.d).map(|(k1, _)| k1).unwrap_or(f64::NAN)
    }

    pub fn kappas(&self) -> Vec<KappaPoint> {
        let k1 = self.kappa1();
        let point = |label: &str, value: f64| KappaPoint {
            label: label.to_string(),
            value,
            hard: value <= k1 * (1.0 + 1e-12),
        };
        match self.kappa {
            KappaMode::Fixed(k) => vec![point("fixed", k)],
            KappaMode::Max => vec![point("kappa1", k1)],
            KappaMode::Grid => vec![point("0", 0.0), point("kappa1/2", k1 / 2.0), point("kappa1", k1)],
        }
    }

    /// Mixing parameter for trial `index`; consumes one uniform draw in every mode.
    pub fn draw_tau(&self, index: usize, rng: &mut RandomSource) -> f64 {
        let u = rng.uniform();
        match self.tau {
            TauMode::Fixed(t) => t,
            TauMode::Random => match index {
                0 => 0.0,
                1 => 0.5,
                2 => 1.0,
                _ => u,
            },
        }
    }

    /// Random stream of trial `index` of experiment `tag`.
    pub fn trial_rng(&self, tag: &str, index: usize) -> RandomSource {
        RandomSource::new(experiment_seed(self.seed, tag), index as u64)
    }
}

impl fmt::Display for TauMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauMode::Fixed(t) => write!(f, "{t}"),
            TauMode::Random => f.write_str("random"),
        }
    }
}

impl fmt::Display for KappaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaMode::Fixed(k) => write!(f, "{k}"),
            KappaMode::Max => f.write_str("max"),
            KappaMode::Grid => f.write_str("grid"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        TrialConfig::default().validate().unwrap();
    }

    #[test]
    fn caps_are_enforced() {
        let cfg = TrialConfig {
            d: 7,
            ..TrialConfig::default()
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("cap of 6"), "{msg}");
        let cfg = TrialConfig {
            d_e2: 5,
            ..TrialConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrialConfig {
            d_e1: 1,
            ..TrialConfig::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn kappa_window_needs_exploratory_flag() {
        let mut cfg = TrialConfig {
            kappa: KappaMode::Fixed(3.0),
            ..TrialConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.exploratory_kappa = true;
        cfg.validate().unwrap();
        assert!(!cfg.kappas()[0].hard);
    }

    #[test]
    fn grid_labels() {
        let k = TrialConfig::default().kappas();
        let labels: Vec<_> = k.iter().map(|p| p.label.as_str()).collect();
        assert_eq!(labels, ["0", "kappa1/2", "kappa1"]);
        assert!(k.iter().all(|p| p.hard));
        assert_eq!(k[2].value, 1.0 / 2f64.ln().powi(2));
    }

    #[test]
    fn tau_endpoints_are_pinned() {
        let cfg = TrialConfig::default();
        let taus: Vec<f64> = (0..4).map(|i| cfg.draw_tau(i, &mut cfg.trial_rng("t", i))).collect();
        assert_eq!(&taus[..3], &[0.0, 0.5, 1.0]);
        assert!((0.0..1.0).contains(&taus[3]));
    }

    #[test]
    fn parse_modes() {
        assert_eq!("random".parse::<TauMode>().unwrap(), TauMode::Random);
        assert_eq!("0.25".parse::<TauMode>().unwrap(), TauMode::Fixed(0.25));
        assert_eq!("grid".parse::<KappaMode>().unwrap(), KappaMode::Grid);
        assert_eq!("max".parse::<KappaMode>().unwrap(), KappaMode::Max);
        assert!("often".parse::<KappaMode>().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = TrialConfig {
            tau: TauMode::Fixed(0.1),
            kappa: KappaMode::Fixed(0.3),
            state_kind: StateKind::MixedRank(2),
            ..TrialConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<TrialConfig>(&text).unwrap(), cfg);
    }
}
