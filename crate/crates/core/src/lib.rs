//! Partial-swap channels on qudits, measurement-conditioned states and
//! entropy-power inequalities, with a randomized verification harness.
//!
//! The numerical core is generic over the real scalar (`f64` or `f32`)
//! through [`Real`]; the aliases below fix it to `f64`, with `F32` variants
//! for single precision.
//!
//! ```
//! use qudit_epi::{partial_swap_closed, DensityMatrix, MixingParameter};
//!
//! let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
//! let mixed = DensityMatrix::maximally_mixed(2);
//! let out = partial_swap_closed(&zero, &mixed, MixingParameter::new(0.5).unwrap()).unwrap();
//! assert!((out.matrix()[(0, 0)].re - 0.75).abs() < 1e-15);
//! ```

// Negated comparisons are how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod jsonfmt;
pub mod linalg;
pub mod measurement;
pub mod optimize;
pub mod rng;
pub mod scalar;
pub mod state;

pub use channel::{
    partial_swap_closed, partial_swap_conjugation, partial_swap_global, partial_swap_global_closed,
    partial_swap_joint, partial_swap_unitary, swap_operator,
};
pub use entropy::{
    conditional_vn_entropy, entropy_power, entropy_power_of_state, expected_entropy_power, kappa_bounds,
    majorization_slack, majorizes, shannon_entropy, von_neumann_entropy,
};
pub use error::{Error, Result};
pub use measurement::{condition, condition_all, condition_bilocal, conditional_spectrum, projective_from_unitary};
pub use optimize::{minimize_bilocal_entropy_power, minimize_conditional_entropy_power, OptimizerConfig};
pub use rng::RandomSource;
pub use scalar::Real;
pub use state::{
    commutator, eigenvalues_descending, matrix_distance, partial_trace, permute_subsystems, random_state,
    random_unitary, tensor, StateKind,
};

pub type CMatrix = linalg::CMatrix<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type MultipartiteState = state::MultipartiteState<f64>;
pub type Spectrum = state::Spectrum<f64>;
pub type MixingParameter = channel::MixingParameter<f64>;
pub type MeasurementSet = measurement::MeasurementSet<f64>;
pub type ConditionalOutcome = measurement::ConditionalOutcome<f64>;

pub type CMatrixF32 = linalg::CMatrix<f32>;
pub type DensityMatrixF32 = state::DensityMatrix<f32>;
pub type MultipartiteStateF32 = state::MultipartiteState<f32>;
pub type SpectrumF32 = state::Spectrum<f32>;
pub type MixingParameterF32 = channel::MixingParameter<f32>;
pub type MeasurementSetF32 = measurement::MeasurementSet<f32>;
pub type ConditionalOutcomeF32 = measurement::ConditionalOutcome<f32>;
