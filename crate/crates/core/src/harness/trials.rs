use std::time::Instant;

use crate::channel::{partial_swap_closed, partial_swap_conjugation, partial_swap_global, MixingParameter};
use crate::entropy::{entropy_power, entropy_power_of_state, majorization_slack};
use crate::error::{Error, Result};
use crate::measurement::{condition_all, condition_bilocal, conditional_spectrum, ConditionalOutcome, MeasurementSet};
use crate::optimize::{minimize_bilocal_entropy_power, minimize_conditional_entropy_power};
use crate::rng::{experiment_seed, RandomSource};
use crate::state::{eigenvalues_descending, matrix_distance, partial_trace, random_state, MultipartiteState};

use super::config::{KappaPoint, TrialConfig};
use super::record::{Experiment, TrialRecord};

type State = MultipartiteState<f64>;
type Outcome = ConditionalOutcome<f64>;

fn total_probability(outcomes: &[Outcome]) -> f64 {
    outcomes.iter().map(|o| o.probability).sum()
}

fn outcome_state(o: &Outcome) -> Result<&crate::state::DensityMatrix<f64>> {
    o.state.as_ref().ok_or(Error::NegligibleOutcome {
        probability: o.probability,
    })
}

/// Worst-case quantities of the conditional majorization check for one
/// sample and one pair of local measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    /// Max distance between each conditional output and the addition rule
    /// applied to the conditional inputs.
    pub identity_residual: f64,
    pub min_majorization_slack: f64,
    pub max_majorization_total_gap: f64,
    /// `max |p_jk - q_j q_k|`.
    pub factorization_residual: f64,
    /// Largest `|sum of outcome probabilities - 1|` among the three measurements.
    pub normalization_residual: f64,
    pub negligible_outcomes: usize,
}

/// Conditions the partial-swap output of `s1 ⊗ s2` on `m1 ⊗ m2` and compares
/// every non-negligible outcome with the addition rule of the conditioned inputs.
pub fn lemma_check(
    s1: &State,
    s2: &State,
    m1: &MeasurementSet<f64>,
    m2: &MeasurementSet<f64>,
    tau: MixingParameter<f64>,
) -> Result<LemmaCheck> {
    let y = partial_swap_global(s1, s2, tau)?;
    let c1 = condition_all(s1, m1)?;
    let c2 = condition_all(s2, m2)?;
    let grid = condition_bilocal(&y, m1, m2)?;
    let t = tau.value();

    let flat_total: f64 = grid.iter().map(|row| total_probability(row)).sum();
    let mut out = LemmaCheck {
        identity_residual: 0.0,
        min_majorization_slack: f64::INFINITY,
        max_majorization_total_gap: 0.0,
        factorization_residual: 0.0,
        normalization_residual: [total_probability(&c1), total_probability(&c2), flat_total]
            .iter()
            .map(|p| (p - 1.0).abs())
            .fold(0.0, f64::max),
        negligible_outcomes: 0,
    };
    for (j, row) in grid.iter().enumerate() {
        for (k, o) in row.iter().enumerate() {
            let q = c1[j].probability * c2[k].probability;
            out.factorization_residual = out.factorization_residual.max((o.probability - q).abs());
            if o.is_negligible() {
                out.negligible_outcomes += 1;
                continue;
            }
            let yjk = outcome_state(o)?;
            let x1 = outcome_state(&c1[j])?;
            let x2 = outcome_state(&c2[k])?;
            let closed = partial_swap_closed(x1, x2, tau)?;
            out.identity_residual = out.identity_residual.max(matrix_distance(yjk.matrix(), closed.matrix())?);

            let mixed = conditional_spectrum(&c1[j])?.mix(&conditional_spectrum(&c2[k])?, t);
            let ms = majorization_slack(&mixed, conditional_spectrum(o)?.values());
            out.min_majorization_slack = out.min_majorization_slack.min(ms.min_prefix);
            out.max_majorization_total_gap = out.max_majorization_total_gap.max(ms.total_gap);
        }
    }
    Ok(out)
}

fn sample_pair(cfg: &TrialConfig, rng: &mut RandomSource) -> Result<(State, State)> {
    let s1 = MultipartiteState::new(random_state(cfg.d * cfg.d_e1, cfg.state_kind, rng)?, vec![cfg.d, cfg.d_e1])?;
    let s2 = MultipartiteState::new(random_state(cfg.d * cfg.d_e2, cfg.state_kind, rng)?, vec![cfg.d, cfg.d_e2])?;
    Ok((s1, s2))
}

fn sampler_label(cfg: &TrialConfig) -> String {
    format!("{}/{}", cfg.state_kind.label(), cfg.measurement.label())
}

fn unconditional_majorization(record: &mut TrialRecord, s1: &State, s2: &State, y: &State, t: f64) -> Result<()> {
    let x1 = eigenvalues_descending(partial_trace(s1, &[0])?.state())?;
    let x2 = eigenvalues_descending(partial_trace(s2, &[0])?.state())?;
    let out = eigenvalues_descending(partial_trace(y, &[0])?.state())?;
    let ms = majorization_slack(&x1.mix(&x2, t), out.values());
    record.slack("qepi_majorization", ms.min_prefix);
    record.residual("qepi_majorization_total", ms.total_gap);
    Ok(())
}

/// Conditional majorization of the partial-swap output under local
/// measurements on a product environment.
pub fn run_lemma_trial(cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = cfg.trial_rng(Experiment::Lemma.tag(), index);
    let t = cfg.draw_tau(index, &mut rng);
    let tau = MixingParameter::new(t)?;
    let (s1, s2) = sample_pair(cfg, &mut rng)?;
    let m1 = cfg.measurement.sample(cfg.d_e1, &mut rng)?;
    let m2 = cfg.measurement.sample(cfg.d_e2, &mut rng)?;

    let check = lemma_check(&s1, &s2, &m1, &m2, tau)?;
    let mut r = TrialRecord::new(Experiment::Lemma, index, sampler_label(cfg), t);
    r.residual("lemma_identity", check.identity_residual);
    r.residual("factorization", check.factorization_residual);
    r.residual("probability_normalization", check.normalization_residual);
    r.residual("lemma_majorization_total", check.max_majorization_total_gap);
    if check.min_majorization_slack.is_finite() {
        r.slack("lemma_majorization", check.min_majorization_slack);
    }
    r.negligible_outcomes = check.negligible_outcomes;

    let y = partial_swap_global(&s1, &s2, tau)?;
    unconditional_majorization(&mut r, &s1, &s2, &y, t)?;

    r.settle(cfg.tolerance);
    r.wall_time = start.elapsed();
    Ok(r)
}

/// `sum_j q_j nu_kappa(rho|j)` with negligible outcomes bounded by `fill`.
fn weighted_power(outcomes: &[Outcome], weights: &[f64], kappa: f64, fill: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (o, &w) in outcomes.iter().zip(weights) {
        let nu = match &o.state {
            Some(_) => entropy_power(conditional_spectrum(o)?.values(), kappa)?,
            None => fill,
        };
        acc += w * nu;
    }
    Ok(acc)
}

/// Per-measurement slack
/// `sum_jk q_j q_k nu(Y|jk) - tau sum_j q_j nu(X1|j) - (1 - tau) sum_k q_k nu(X2|k)`.
///
/// Outcomes below the probability floor have no conditional state; they
/// enter as `nu = 1` on the left and `nu = d^kappa` on the right, the bounds
/// of `nu` on a `d`-level system, so the reported slack never exceeds the true one.
pub fn per_measurement_slack(
    c1: &[Outcome],
    c2: &[Outcome],
    grid: &[Vec<Outcome>],
    d: usize,
    t: f64,
    kappa: f64,
) -> Result<f64> {
    let q1: Vec<f64> = c1.iter().map(|o| o.probability).collect();
    let q2: Vec<f64> = c2.iter().map(|o| o.probability).collect();
    let ceiling = (kappa * (d as f64).ln()).exp();
    let mut lhs = 0.0;
    for (j, row) in grid.iter().enumerate() {
        let w: Vec<f64> = q2.iter().map(|qk| q1[j] * qk).collect();
        lhs += weighted_power(row, &w, kappa, 1.0)?;
    }
    let r1 = weighted_power(c1, &q1, kappa, ceiling)?;
    let r2 = weighted_power(c2, &q2, kappa, ceiling)?;
    Ok(lhs - t * r1 - (1.0 - t) * r2)
}

#[allow(clippy::too_many_arguments)]
fn min_form_slack(
    cfg: &TrialConfig,
    index: usize,
    kidx: usize,
    s1: &State,
    s2: &State,
    y: &State,
    t: f64,
    kappa: f64,
) -> Result<f64> {
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let master = experiment_seed(cfg.seed, "theorem-min-form");
    let stream = |which: u64| ((index as u64) << 16) | ((kidx as u64) << 4) | which;
    let lhs = minimize_bilocal_entropy_power(y, kappa, &cfg.min_form.optimizer(master, stream(0)))?.value;
    let (r1, _) = minimize_conditional_entropy_power(s1, kappa, &cfg.min_form.optimizer(master, stream(1)))?;
    let (r2, _) = minimize_conditional_entropy_power(s2, kappa, &cfg.min_form.optimizer(master, stream(2)))?;
    Ok(lhs - t * r1 - (1.0 - t) * r2)
}

fn record_kappa(r: &mut TrialRecord, k: &KappaPoint) {
    r.kappa.insert(k.label.clone(), k.value);
}

fn record_slack(r: &mut TrialRecord, k: &KappaPoint, name: &str, value: f64) {
    let key = format!("{name}@{}", k.label);
    if k.hard {
        r.slack(key, value);
    } else {
        r.diagnostic(key, value);
    }
}

/// Conditional entropy-power inequality for the sampled local measurements,
/// plus the optimizer-based min-form as a diagnostic.
pub fn run_theorem_trial(cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = cfg.trial_rng(Experiment::Theorem.tag(), index);
    let t = cfg.draw_tau(index, &mut rng);
    let tau = MixingParameter::new(t)?;
    let (s1, s2) = sample_pair(cfg, &mut rng)?;
    let m1 = cfg.measurement.sample(cfg.d_e1, &mut rng)?;
    let m2 = cfg.measurement.sample(cfg.d_e2, &mut rng)?;

    let y = partial_swap_global(&s1, &s2, tau)?;
    let c1 = condition_all(&s1, &m1)?;
    let c2 = condition_all(&s2, &m2)?;
    let grid = condition_bilocal(&y, &m1, &m2)?;

    let mut r = TrialRecord::new(Experiment::Theorem, index, sampler_label(cfg), t);
    r.negligible_outcomes = grid.iter().flatten().filter(|o| o.is_negligible()).count();
    for (kidx, k) in cfg.kappas().iter().enumerate() {
        record_kappa(&mut r, k);
        let slack = per_measurement_slack(&c1, &c2, &grid, cfg.d, t, k.value)?;
        record_slack(&mut r, k, "theorem", slack);
        if cfg.min_form.enabled() {
            let diag = min_form_slack(cfg, index, kidx, &s1, &s2, &y, t, k.value)?;
            r.diagnostic(format!("theorem_min_form@{}", k.label), diag);
        }
    }
    r.settle(cfg.tolerance);
    r.wall_time = start.elapsed();
    Ok(r)
}

/// Unconditional majorization and entropy-power inequality for two random states.
pub fn run_qepi_trial(cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = cfg.trial_rng(Experiment::Qepi.tag(), index);
    let t = cfg.draw_tau(index, &mut rng);
    let tau = MixingParameter::new(t)?;
    let rho1 = random_state(cfg.d, cfg.state_kind, &mut rng)?;
    let rho2 = random_state(cfg.d, cfg.state_kind, &mut rng)?;

    let out = partial_swap_closed(&rho1, &rho2, tau)?;
    let oracle = partial_swap_conjugation(&rho1, &rho2, tau)?;
    let mut r = TrialRecord::new(Experiment::Qepi, index, cfg.state_kind.label(), t);
    r.residual("channel_oracle", matrix_distance(out.matrix(), oracle.matrix())?);

    let l1 = eigenvalues_descending(&rho1)?;
    let l2 = eigenvalues_descending(&rho2)?;
    let lo = eigenvalues_descending(&out)?;
    let ms = majorization_slack(&l1.mix(&l2, t), lo.values());
    r.slack("qepi_majorization", ms.min_prefix);
    r.residual("qepi_majorization_total", ms.total_gap);

    for k in cfg.kappas() {
        record_kappa(&mut r, &k);
        let lhs = entropy_power(lo.values(), k.value)?;
        let rhs = t * entropy_power(l1.values(), k.value)? + (1.0 - t) * entropy_power(l2.values(), k.value)?;
        record_slack(&mut r, &k, "qepi", lhs - rhs);
    }
    r.settle(cfg.tolerance);
    r.wall_time = start.elapsed();
    Ok(r)
}

/// Midpoint concavity of `nu_kappa` on a uniformly drawn pair of distributions.
pub fn run_concavity_trial(cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = cfg.trial_rng(Experiment::Concavity.tag(), index);
    let p: Vec<f64> = rng.simplex(cfg.d);
    let q: Vec<f64> = rng.simplex(cfg.d);
    let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();

    let mut r = TrialRecord::new(Experiment::Concavity, index, "dirichlet-1".into(), 0.5);
    for k in cfg.kappas() {
        record_kappa(&mut r, &k);
        let slack = entropy_power(&mid, k.value)? - 0.5 * (entropy_power(&p, k.value)? + entropy_power(&q, k.value)?);
        record_slack(&mut r, &k, "concavity", slack);
    }
    r.settle(cfg.tolerance);
    r.wall_time = start.elapsed();
    Ok(r)
}

/// `nu_kappa(rho1 ⊞ rho2) - tau nu_kappa(rho1) - (1 - tau) nu_kappa(rho2)`.
pub fn qepi_slack(
    rho1: &crate::state::DensityMatrix<f64>,
    rho2: &crate::state::DensityMatrix<f64>,
    tau: MixingParameter<f64>,
    kappa: f64,
) -> Result<f64> {
    let t = tau.value();
    let out = partial_swap_closed(rho1, rho2, tau)?;
    Ok(entropy_power_of_state(&out, kappa)?
        - t * entropy_power_of_state(rho1, kappa)?
        - (1.0 - t) * entropy_power_of_state(rho2, kappa)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{KappaMode, MeasurementFamily, MinFormSettings, TauMode};
    use crate::state::{tensor, DensityMatrix, StateKind};

    fn cfg() -> TrialConfig {
        TrialConfig {
            min_form: MinFormSettings {
                restarts: 0,
                ..MinFormSettings::default()
            },
            ..TrialConfig::default()
        }
    }

    #[test]
    fn lemma_trials_pass() {
        let c = cfg();
        for i in 0..20 {
            let r = run_lemma_trial(&c, i).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.residuals["lemma_identity"] <= 1e-10);
        }
    }

    #[test]
    fn lemma_at_tau_one_reproduces_first_input() {
        let c = TrialConfig {
            tau: TauMode::Fixed(1.0),
            ..cfg()
        };
        let r = run_lemma_trial(&c, 5).unwrap();
        assert!(r.slacks["lemma_majorization"] >= -1e-12);
        assert!(r.residuals["lemma_identity"] <= 1e-12);
    }

    #[test]
    fn trivial_measurement_gives_marginal_check() {
        let mut rng = RandomSource::new(9, 0);
        let s1 = MultipartiteState::new(random_state(6, StateKind::MixedGinibre, &mut rng).unwrap(), vec![3, 2]).unwrap();
        let s2 = MultipartiteState::new(random_state(9, StateKind::MixedGinibre, &mut rng).unwrap(), vec![3, 3]).unwrap();
        let tau = MixingParameter::new(0.3).unwrap();
        let check = lemma_check(&s1, &s2, &MeasurementSet::trivial(2), &MeasurementSet::trivial(3), tau).unwrap();
        assert!(check.identity_residual <= 1e-11);
        assert_eq!(check.negligible_outcomes, 0);
    }

    #[test]
    fn theorem_slack_vanishes_at_zero_order() {
        let c = cfg();
        for i in 0..10 {
            let r = run_theorem_trial(&c, i).unwrap();
            assert!(r.slacks["theorem@0"].abs() <= 1e-12);
            assert!(r.pass);
        }
    }

    #[test]
    fn theorem_on_product_inputs_is_unconditional() {
        let mut rng = RandomSource::new(4, 0);
        let x1: DensityMatrix<f64> = random_state(2, StateKind::MixedGinibre, &mut rng).unwrap();
        let x2: DensityMatrix<f64> = random_state(2, StateKind::MixedGinibre, &mut rng).unwrap();
        let e1: DensityMatrix<f64> = random_state(2, StateKind::MixedGinibre, &mut rng).unwrap();
        let e2: DensityMatrix<f64> = random_state(3, StateKind::MixedGinibre, &mut rng).unwrap();
        let s1 = MultipartiteState::new(tensor(&x1, &e1), vec![2, 2]).unwrap();
        let s2 = MultipartiteState::new(tensor(&x2, &e2), vec![2, 3]).unwrap();
        let tau = MixingParameter::new(0.4).unwrap();
        let m1 = MeasurementFamily::HaarProjective.sample(2, &mut rng).unwrap();
        let m2 = MeasurementFamily::HaarProjective.sample(3, &mut rng).unwrap();
        let y = partial_swap_global(&s1, &s2, tau).unwrap();
        let grid = condition_bilocal(&y, &m1, &m2).unwrap();
        let c1 = condition_all(&s1, &m1).unwrap();
        let c2 = condition_all(&s2, &m2).unwrap();
        let slack = per_measurement_slack(&c1, &c2, &grid, 2, 0.4, 1.0).unwrap();
        assert!((slack - qepi_slack(&x1, &x2, tau, 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn theorem_min_form_is_reported_as_diagnostic() {
        let c = TrialConfig {
            kappa: KappaMode::Max,
            ..TrialConfig::default()
        };
        let r = run_theorem_trial(&c, 7).unwrap();
        assert!(r.diagnostics.contains_key("theorem_min_form@kappa1"));
        assert!(!r.slacks.contains_key("theorem_min_form@kappa1"));
    }

    #[test]
    fn qepi_trials_pass() {
        let c = TrialConfig { d: 3, ..cfg() };
        for i in 0..30 {
            let r = run_qepi_trial(&c, i).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let r0 = run_qepi_trial(&c, 0).unwrap();
        assert_eq!(r0.tau, 0.0);
        assert!(r0.slacks["qepi@kappa1"].abs() < 1e-12);
    }

    #[test]
    fn equal_inputs_have_zero_qepi_slack() {
        let mut rng = RandomSource::new(1, 1);
        let rho: DensityMatrix<f64> = random_state(3, StateKind::MixedGinibre, &mut rng).unwrap();
        let s = qepi_slack(&rho, &rho, MixingParameter::new(0.37).unwrap(), 0.5).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn exploratory_concavity_is_diagnostic() {
        let c = TrialConfig {
            d: 3,
            kappa: KappaMode::Fixed(5.0),
            exploratory_kappa: true,
            ..cfg()
        };
        let r = run_concavity_trial(&c, 0).unwrap();
        assert!(r.slacks.is_empty());
        assert!(r.diagnostics.contains_key("concavity@fixed"));
        assert!(r.pass);
    }

    #[test]
    fn trials_are_reproducible() {
        let c = cfg();
        assert_eq!(run_lemma_trial(&c, 11).unwrap(), run_lemma_trial(&c, 11).unwrap());
        assert_ne!(run_lemma_trial(&c, 11).unwrap(), run_lemma_trial(&c, 12).unwrap());
    }
}
