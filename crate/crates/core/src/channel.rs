//! The partial-swap channel on pairs of qudits.
//!
//! `U_tau = sqrt(tau) I + i sqrt(1 - tau) W` with `W` the swap. Conjugating
//! `rho1 ⊗ rho2` by `U_tau` and tracing out the second qudit gives
//!
//! ```text
//! rho1 ⊞_tau rho2 = tau rho1 + (1 - tau) rho2 - i sqrt(tau (1 - tau)) [rho1, rho2]
//! ```
//!
//! Both routes are implemented: the closed form and the explicit
//! conjugation, each serving as the other's check. The environment-extended
//! variants act as `U_tau ⊗ I_{E1 E2}` on `(X1, E1) ⊗ (X2, E2)` inputs and
//! return states ordered `(Y, E1, E2)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::{commutator, partial_trace_matrix, permute_matrix, DensityMatrix, MultipartiteState};
use crate::scalar::Real;

/// Mixing weight `tau` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingParameter<T>(T);

impl<T: Real> MixingParameter<T> {
    pub fn new(tau: T) -> Result<Self> {
        if tau >= T::zero() && tau <= T::one() {
            Ok(Self(tau))
        } else {
            Err(Error::BadMixingParameter(tau.as_f64()))
        }
    }

    pub fn value(&self) -> T {
        self.0
    }

    /// `sqrt(tau)`, exact at the endpoints.
    pub fn sqrt_tau(&self) -> T {
        if self.0 == T::zero() {
            T::zero()
        } else if self.0 == T::one() {
            T::one()
        } else {
            self.0.sqrt()
        }
    }

    /// `sqrt(1 - tau)`, exact at the endpoints.
    pub fn sqrt_complement(&self) -> T {
        if self.0 == T::zero() {
            T::one()
        } else if self.0 == T::one() {
            T::zero()
        } else {
            (T::one() - self.0).sqrt()
        }
    }

    /// `sqrt(tau (1 - tau))`.
    pub fn cross_weight(&self) -> T {
        self.sqrt_tau() * self.sqrt_complement()
    }
}

/// Swap `W` on `C^d ⊗ C^d`: `W |a>|b> = |b>|a>`.
pub fn swap_operator<T: Real>(d: usize) -> CMatrix<T> {
    let n = d * d;
    let mut w = CMatrix::zeros(n, n);
    for a in 0..d {
        for b in 0..d {
            w[(b * d + a, a * d + b)] = Complex::new(T::one(), T::zero());
        }
    }
    w
}

pub fn partial_swap_unitary<T: Real>(d: usize, tau: MixingParameter<T>) -> CMatrix<T> {
    let id = CMatrix::identity(d * d).scale(tau.sqrt_tau());
    let w = swap_operator::<T>(d).scale_complex(Complex::new(T::zero(), tau.sqrt_complement()));
    &id + &w
}

fn check_same_dim<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "partial swap needs equal dimensions, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `rho1 ⊞_tau rho2` from the closed-form addition rule.
pub fn partial_swap_closed<T: Real>(
    rho1: &DensityMatrix<T>,
    rho2: &DensityMatrix<T>,
    tau: MixingParameter<T>,
) -> Result<DensityMatrix<T>> {
    check_same_dim(rho1, rho2)?;
    DensityMatrix::from_matrix(addition_rule(rho1.matrix(), rho2.matrix(), rho1.matrix(), rho2.matrix(), tau)?)
}

/// `tau a + (1 - tau) b - i sqrt(tau (1 - tau)) [ca, cb]`.
fn addition_rule<T: Real>(
    a: &CMatrix<T>,
    b: &CMatrix<T>,
    ca: &CMatrix<T>,
    cb: &CMatrix<T>,
    tau: MixingParameter<T>,
) -> Result<CMatrix<T>> {
    let t = tau.value();
    let mixed = &a.scale(t) + &b.scale(T::one() - t);
    let cross = tau.cross_weight();
    if cross == T::zero() {
        return Ok(mixed);
    }
    let comm = commutator(ca, cb)?;
    Ok(&mixed - &comm.scale_complex(Complex::new(T::zero(), cross)))
}

/// `Tr_{X2}[U_tau (rho1 ⊗ rho2) U_tau^dagger]`, computed densely.
pub fn partial_swap_conjugation<T: Real>(
    rho1: &DensityMatrix<T>,
    rho2: &DensityMatrix<T>,
    tau: MixingParameter<T>,
) -> Result<DensityMatrix<T>> {
    check_same_dim(rho1, rho2)?;
    let d = rho1.dim();
    let u = partial_swap_unitary(d, tau);
    let joint = rho1.matrix().kron(rho2.matrix());
    let out = &(&u * &joint) * &u.adjoint();
    DensityMatrix::from_matrix(partial_trace_matrix(&out, &[d, d], &[0]))
}

fn bipartite_parts<T: Real>(s: &MultipartiteState<T>, name: &str) -> Result<(usize, usize)> {
    match s.dims() {
        [x, e] => Ok((*x, *e)),
        dims => Err(Error::DimensionMismatch(format!(
            "{name} must be bipartite (X, E), got dims {dims:?}"
        ))),
    }
}

fn global_dims<T: Real>(s1: &MultipartiteState<T>, s2: &MultipartiteState<T>) -> Result<(usize, usize, usize)> {
    let (d1, e1) = bipartite_parts(s1, "first input")?;
    let (d2, e2) = bipartite_parts(s2, "second input")?;
    if d1 != d2 {
        return Err(Error::DimensionMismatch(format!(
            "X1 and X2 must have equal dimension, got {d1} and {d2}"
        )));
    }
    Ok((d1, e1, e2))
}

/// `Tr_{X2} (U_tau ⊗ I_{E1E2}) (rho_{X1E1} ⊗ rho_{X2E2}) (U_tau ⊗ I_{E1E2})^dagger`,
/// returned on `(Y, E1, E2)`.
pub fn partial_swap_global<T: Real>(
    s1: &MultipartiteState<T>,
    s2: &MultipartiteState<T>,
    tau: MixingParameter<T>,
) -> Result<MultipartiteState<T>> {
    let (d, e1, e2) = global_dims(s1, s2)?;
    let joint = s1.matrix().kron(s2.matrix());
    // (X1, E1, X2, E2) -> (X1, X2, E1, E2)
    let (ordered, _) = permute_matrix(&joint, &[d, e1, d, e2], &[0, 2, 1, 3]);
    let u = partial_swap_unitary(d, tau);
    let out = ordered.conjugate_leading(&u);
    let reduced = partial_trace_matrix(&out, &[d, d, e1, e2], &[0, 2, 3]);
    MultipartiteState::new(DensityMatrix::from_matrix(reduced)?, vec![d, e1, e2])
}

/// Closed-form evaluation of the environment-extended addition rule.
///
/// With `A = rho_{X1E1} ⊗ I_{E2}` and `B = rho_{X2E2} ⊗ I_{E1}`, both ordered
/// `(Y, E1, E2)`:
///
/// ```text
/// tau (rho_{X1E1} ⊗ rho_{E2}) + (1 - tau) (rho_{E1} ⊗ rho_{X2E2}) - i sqrt(tau (1 - tau)) [A, B]
/// ```
///
/// This equals [`partial_swap_global`] because `Tr_{X'}[W (A ⊗ B)] = BA`
/// along the shared qudit index.
pub fn partial_swap_global_closed<T: Real>(
    s1: &MultipartiteState<T>,
    s2: &MultipartiteState<T>,
    tau: MixingParameter<T>,
) -> Result<MultipartiteState<T>> {
    let (d, e1, e2) = global_dims(s1, s2)?;
    let rho_e1 = partial_trace_matrix(s1.matrix(), &[d, e1], &[1]);
    let rho_e2 = partial_trace_matrix(s2.matrix(), &[d, e2], &[1]);

    let first = s1.matrix().kron(&rho_e2);
    // rho_{X2E2} ⊗ rho_{E1} is ordered (Y, E2, E1); move E1 to the middle.
    let (second, _) = permute_matrix(&s2.matrix().kron(&rho_e1), &[d, e2, e1], &[0, 2, 1]);
    let a = s1.matrix().kron(&CMatrix::identity(e2));
    let (b, _) = permute_matrix(&s2.matrix().kron(&CMatrix::identity(e1)), &[d, e2, e1], &[0, 2, 1]);

    let out = addition_rule(&first, &second, &a, &b, tau)?;
    MultipartiteState::new(DensityMatrix::from_matrix(out)?, vec![d, e1, e2])
}

/// `Tr_{X2} (U_tau ⊗ I_E) rho_{X1X2E} (U_tau ⊗ I_E)^dagger` on `(Y, E)`, for
/// a joint input whose two qudits may be correlated with each other and with
/// `E`.
pub fn partial_swap_joint<T: Real>(s: &MultipartiteState<T>, tau: MixingParameter<T>) -> Result<MultipartiteState<T>> {
    let (d, d2, e) = match s.dims() {
        [a, b, c] => (*a, *b, *c),
        dims => {
            return Err(Error::DimensionMismatch(format!(
                "joint input must be (X1, X2, E), got dims {dims:?}"
            )))
        }
    };
    if d != d2 {
        return Err(Error::DimensionMismatch(format!(
            "X1 and X2 must have equal dimension, got {d} and {d2}"
        )));
    }
    let u = partial_swap_unitary(d, tau);
    let out = s.matrix().conjugate_leading(&u);
    let reduced = partial_trace_matrix(&out, &[d, d, e], &[0, 2]);
    MultipartiteState::new(DensityMatrix::from_matrix(reduced)?, vec![d, e])
}
