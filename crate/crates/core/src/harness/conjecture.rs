//! Randomized search for violations of the entropy-conditioned inequality
//! `S(Y|E) >= tau S(X1|E) + (1 - tau) S(X2|E)` on joint inputs `rho_{X1X2E}`.
//!
//! The inequality is open. A slack below `-10 tolerance` is a candidate; it is
//! re-verified by recomputing from the re-symmetrized input through the dense
//! channel, and by checking the slack stays negative when `1e-8` of an
//! independent random state is mixed into the input. Only candidates passing
//! both stages count as findings.

use std::time::Instant;

use crate::channel::{partial_swap_global, partial_swap_joint, partial_swap_unitary, MixingParameter};
use crate::entropy::von_neumann_entropy;
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::rng::{experiment_seed, RandomSource};
use crate::state::{
    partial_trace, partial_trace_matrix, permute_matrix, random_state, tensor, DensityMatrix, MultipartiteState,
    StateKind,
};

use super::config::{ConjectureSampler, TrialConfig};
use super::record::{Candidate, Experiment, Reproduction, TrialRecord};

/// Mixing weight of the stability perturbation.
pub const PERTURBATION: f64 = 1e-8;
/// Candidates are slacks below `-CANDIDATE_FACTOR * tolerance`.
pub const CANDIDATE_FACTOR: f64 = 10.0;

type State = MultipartiteState<f64>;

fn entropy(s: &State) -> Result<f64> {
    von_neumann_entropy(s.state())
}

fn joint_dims(s: &State) -> (usize, usize) {
    let dims = s.dims();
    (dims[0], dims[2])
}

/// `S(Y|E) - tau S(X1|E) - (1 - tau) S(X2|E)` given the output `(Y, E)`.
/// The `S(E)` terms cancel, leaving `S(YE) - tau S(X1E) - (1 - tau) S(X2E)`.
fn slack_from_output(s: &State, y: &State, t: f64) -> Result<f64> {
    let x1e = partial_trace(s, &[0, 2])?;
    let x2e = partial_trace(s, &[1, 2])?;
    Ok(entropy(y)? - t * entropy(&x1e)? - (1.0 - t) * entropy(&x2e)?)
}

/// Conjecture slack of a joint `(X1, X2, E)` input.
pub fn conjecture_slack(s: &State, tau: MixingParameter<f64>) -> Result<f64> {
    let y = partial_swap_joint(s, tau)?;
    slack_from_output(s, &y, tau.value())
}

/// Same slack with the channel applied as a dense `U_tau ⊗ I_E` product.
pub fn conjecture_slack_dense(s: &State, tau: MixingParameter<f64>) -> Result<f64> {
    let (d, e) = joint_dims(s);
    let u = partial_swap_unitary(d, tau).kron(&CMatrix::identity(e));
    let out = &(&u * s.matrix()) * &u.adjoint();
    let reduced = partial_trace_matrix(&out, &[d, d, e], &[0, 2]);
    let y = MultipartiteState::new(DensityMatrix::from_matrix(reduced)?, vec![d, e])?;
    slack_from_output(s, &y, tau.value())
}

/// `S(Y|E1E2) - tau S(X1|E1) - (1 - tau) S(X2|E2)` for product inputs
/// `rho_{X1E1} ⊗ rho_{X2E2}`.
pub fn control_slack(s1: &State, s2: &State, tau: MixingParameter<f64>) -> Result<f64> {
    let t = tau.value();
    let y = partial_swap_global(s1, s2, tau)?;
    let se1 = entropy(&partial_trace(s1, &[1])?)?;
    let se2 = entropy(&partial_trace(s2, &[1])?)?;
    let cond_y = entropy(&y)? - se1 - se2;
    let cond_1 = entropy(s1)? - se1;
    let cond_2 = entropy(s2)? - se2;
    Ok(cond_y - t * cond_1 - (1.0 - t) * cond_2)
}

fn compositions_and_factors(n: usize, rng: &mut RandomSource) -> Vec<(usize, usize)> {
    let mut parts = Vec::new();
    let mut run = 1;
    for _ in 1..n {
        if rng.uniform() < 0.5 {
            parts.push(run);
            run = 1;
        } else {
            run += 1;
        }
    }
    parts.push(run);
    parts
        .into_iter()
        .map(|m| {
            let divisors: Vec<usize> = (1..=m).filter(|a| m % a == 0).collect();
            let a = divisors[rng.index(divisors.len())];
            (a, m / a)
        })
        .collect()
}

/// Random state with `X1` and `X2` conditionally independent given `E`:
/// `E` is split into orthogonal blocks `A_j ⊗ B_j` carrying
/// `p_j rho_{X1 A_j} ⊗ rho_{X2 B_j}`.
pub fn sample_markov(d: usize, de: usize, kind: StateKind, rng: &mut RandomSource) -> Result<State> {
    let blocks = compositions_and_factors(de, rng);
    let weights: Vec<f64> = rng.simplex(blocks.len());
    let n = d * d * de;
    let mut full = CMatrix::<f64>::zeros(n, n);
    let mut offset = 0;
    for (&(a, b), &w) in blocks.iter().zip(&weights) {
        let ra = random_state(d * a, kind, rng)?;
        let rb = random_state(d * b, kind, rng)?;
        let (block, _) = permute_matrix(&tensor(&ra, &rb).into_matrix(), &[d, a, d, b], &[0, 2, 1, 3]);
        let m = a * b;
        for x in 0..d * d {
            for l in 0..m {
                for xp in 0..d * d {
                    for lp in 0..m {
                        full[(x * de + offset + l, xp * de + offset + lp)] = block[(x * m + l, xp * m + lp)].scale(w);
                    }
                }
            }
        }
        offset += m;
    }
    MultipartiteState::new(DensityMatrix::from_matrix(full)?, vec![d, d, de])
}

pub fn sample_joint(d: usize, de: usize, cfg: &TrialConfig, rng: &mut RandomSource) -> Result<State> {
    let kind = match (cfg.conjecture_sampler, cfg.state_kind) {
        // rank-k caps refer to the qudit dimension; on the joint space use full rank
        (ConjectureSampler::Joint, StateKind::MixedRank(_)) => StateKind::MixedGinibre,
        (_, k) => k,
    };
    match cfg.conjecture_sampler {
        ConjectureSampler::Markov => sample_markov(d, de, kind, rng),
        ConjectureSampler::Joint => {
            MultipartiteState::new(random_state(d * d * de, kind, rng)?, vec![d, d, de])
        }
    }
}

fn resymmetrize(s: &State) -> Result<State> {
    let h = s.matrix().hermitian_part();
    let tr = h.trace().re;
    MultipartiteState::new(DensityMatrix::from_matrix(h.scale(1.0 / tr))?, s.dims().to_vec())
}

fn perturb(s: &State, rng: &mut RandomSource) -> Result<State> {
    let sigma: DensityMatrix<f64> = random_state(s.matrix().rows(), StateKind::MixedGinibre, rng)?;
    let mixed = &s.matrix().scale(1.0 - PERTURBATION) + &sigma.matrix().scale(PERTURBATION);
    MultipartiteState::new(DensityMatrix::from_matrix(mixed)?, s.dims().to_vec())
}

/// One conjecture trial on `E = E1 E2` of dimension `d_e1 d_e2`, with the
/// product-input control arm recorded alongside.
pub fn run_conjecture_trial(cfg: &TrialConfig, index: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let tag = Experiment::Conjecture.tag();
    let mut rng = cfg.trial_rng(tag, index);
    let t = cfg.draw_tau(index, &mut rng);
    let tau = MixingParameter::new(t)?;
    let (d, de) = (cfg.d, cfg.d_e1 * cfg.d_e2);
    let s = sample_joint(d, de, cfg, &mut rng)?;
    let sampler = format!("{}-{}", cfg.conjecture_sampler.label(), cfg.state_kind.label());

    let mut r = TrialRecord::new(Experiment::Conjecture, index, sampler.clone(), t);
    let slack = conjecture_slack(&s, tau)?;
    r.diagnostic("conjecture", slack);

    let s1 = MultipartiteState::new(random_state(d * cfg.d_e1, cfg.state_kind, &mut rng)?, vec![d, cfg.d_e1])?;
    let s2 = MultipartiteState::new(random_state(d * cfg.d_e2, cfg.state_kind, &mut rng)?, vec![d, cfg.d_e2])?;
    r.diagnostic("control", control_slack(&s1, &s2, tau)?);

    if slack < -CANDIDATE_FACTOR * cfg.tolerance {
        let resymmetrized_slack = conjecture_slack_dense(&resymmetrize(&s)?, tau)?;
        let perturbed_slack = conjecture_slack(&perturb(&s, &mut rng.derive(1))?, tau)?;
        r.candidate = Some(Candidate {
            slack,
            resymmetrized_slack,
            perturbed_slack,
            reverified: resymmetrized_slack < -CANDIDATE_FACTOR * cfg.tolerance && perturbed_slack < 0.0,
            reproduce: Reproduction {
                seed: cfg.seed,
                experiment_seed: experiment_seed(cfg.seed, tag),
                stream_index: index as u64,
                sampler,
                d,
                d_e: de,
            },
        });
    }
    r.settle(cfg.tolerance);
    r.wall_time = start.elapsed();
    Ok(r)
}
