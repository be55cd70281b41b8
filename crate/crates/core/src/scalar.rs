//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Real floating-point scalar backing all complex matrices.
///
/// The associated tolerances are the defaults used when validating states
/// and spectra; they are looser for `f32` because its rounding floor sits
/// well above the `f64` thresholds.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Hermiticity, trace and positivity tolerance for state validation.
    const STATE_TOL: f64;
    /// Allowed deviation of a spectrum's total from one.
    const SUM_TOL: f64;

    /// Converts an `f64` constant into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn state_tol() -> Self {
        Self::lit(Self::STATE_TOL)
    }

    fn sum_tol() -> Self {
        Self::lit(Self::SUM_TOL)
    }
}

impl Real for f64 {
    const STATE_TOL: f64 = 1e-10;
    const SUM_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const STATE_TOL: f64 = 1e-5;
    const SUM_TOL: f64 = 1e-5;
}
