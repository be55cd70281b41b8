//! Derivative-free minimization of expected entropy power over local
//! projective measurement bases.
//!
//! Each restart draws Haar-random bases and then proposes `refine_steps`
//! random rotations `U <- U exp(i eps H)`, `H` a Gaussian Hermitian matrix,
//! keeping a proposal only when it lowers the objective. The value found is
//! an upper bound on the true minimum over the family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::expected_entropy_power;
use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, CMatrix};
use crate::measurement::{condition_all, condition_bilocal, projective_from_unitary};
use crate::rng::RandomSource;
use crate::scalar::Real;
use crate::state::{random_unitary, MultipartiteState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub refine_steps: usize,
    pub step_scale: f64,
    pub master_seed: u64,
    pub stream_index: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            refine_steps: 24,
            step_scale: 0.3,
            master_seed: 0,
            stream_index: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("optimizer needs at least one restart".into()));
        }
        if !(self.step_scale > 0.0) || !self.step_scale.is_finite() {
            return Err(Error::Config(format!("step scale must be positive, got {}", self.step_scale)));
        }
        Ok(())
    }

    pub fn with_stream(&self, master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
            ..self.clone()
        }
    }
}

/// Best objective value and the bases (one unitary per environment) attaining it.
#[derive(Clone, Debug)]
pub struct Minimum<T> {
    pub value: T,
    pub bases: Vec<CMatrix<T>>,
}

fn random_hermitian<T: Real>(d: usize, rng: &mut RandomSource) -> CMatrix<T> {
    CMatrix::from_fn(d, d, |_, _| rng.complex_gaussian()).hermitian_part()
}

/// Random-restart hill climbing over tuples of unitaries with dimensions `dims`.
/// Restarts run in parallel; the lowest value wins, ties going to the lowest
/// restart index.
pub fn minimize_over_bases<T, F>(dims: &[usize], cfg: &OptimizerConfig, objective: F) -> Result<Minimum<T>>
where
    T: Real,
    F: Fn(&[CMatrix<T>]) -> Result<T> + Sync,
{
    cfg.validate()?;
    let root = RandomSource::new(cfg.master_seed, cfg.stream_index);
    let eps = T::lit(cfg.step_scale);
    let results: Vec<Result<Minimum<T>>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = root.derive(r as u64);
            let mut bases = dims
                .iter()
                .map(|&d| random_unitary(d, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let mut value = objective(&bases)?;
            for _ in 0..cfg.refine_steps {
                let proposal = bases
                    .iter()
                    .map(|u| {
                        let h = random_hermitian(u.rows(), &mut rng);
                        exp_i_hermitian(&h, eps).map(|rot| u * &rot)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let v = objective(&proposal)?;
                if v < value {
                    value = v;
                    bases = proposal;
                }
            }
            Ok(Minimum { value, bases })
        })
        .collect();

    let mut best: Option<Minimum<T>> = None;
    for res in results {
        let m = res?;
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Approximate `min_{M} sum_j q_j nu_kappa(rho_X|E(j))` over rank-1
/// projective measurements on `E` of a bipartite `(X, E)` state. Returns the
/// value and the best basis found.
pub fn minimize_conditional_entropy_power<T: Real>(
    s: &MultipartiteState<T>,
    kappa: T,
    cfg: &OptimizerConfig,
) -> Result<(T, CMatrix<T>)> {
    let de = match s.dims() {
        [_, e] => *e,
        dims => {
            return Err(Error::DimensionMismatch(format!(
                "expected a bipartite (X, E) state, got dims {dims:?}"
            )))
        }
    };
    let m = minimize_over_bases(&[de], cfg, |bases| {
        let meas = projective_from_unitary(&bases[0])?;
        expected_entropy_power(&condition_all(s, &meas)?, kappa)
    })?;
    let basis = m.bases.into_iter().next().expect("one basis");
    Ok((m.value, basis))
}

/// Expected entropy power of `rho_{Y E1 E2}` conditioned on local projective
/// measurements in the given bases, weights `p_{jk}`.
pub fn bilocal_expected_power<T: Real>(
    s: &MultipartiteState<T>,
    u1: &CMatrix<T>,
    u2: &CMatrix<T>,
    kappa: T,
) -> Result<T> {
    let m1 = projective_from_unitary(u1)?;
    let m2 = projective_from_unitary(u2)?;
    let grid = condition_bilocal(s, &m1, &m2)?;
    let flat: Vec<_> = grid.into_iter().flatten().collect();
    expected_entropy_power(&flat, kappa)
}

/// Joint minimization over local bases on `E1` and `E2` of a `(Y, E1, E2)` state.
pub fn minimize_bilocal_entropy_power<T: Real>(
    s: &MultipartiteState<T>,
    kappa: T,
    cfg: &OptimizerConfig,
) -> Result<Minimum<T>> {
    let (e1, e2) = match s.dims() {
        [_, a, b] => (*a, *b),
        dims => {
            return Err(Error::DimensionMismatch(format!(
                "expected a (Y, E1, E2) state, got dims {dims:?}"
            )))
        }
    };
    minimize_over_bases(&[e1, e2], cfg, |bases| bilocal_expected_power(s, &bases[0], &bases[1], kappa))
}
