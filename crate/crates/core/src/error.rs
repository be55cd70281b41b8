use thiserror::Error;

/// Errors raised by state construction, channels, measurements and the
/// experiment harness.
///
/// Measured deviations are carried as `f64` regardless of the scalar type
/// the failing computation ran in.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |rho - rho^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is not one: |Tr rho - 1| = {deviation:e}")]
    NotUnitTrace { deviation: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue = {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad subsystem index: {0}")]
    BadSubsystemIndex(String),

    #[error("not a permutation of 0..{len}: {perm:?}")]
    BadPermutation { perm: Vec<usize>, len: usize },

    #[error("Hermitian eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, Frobenius norm {frobenius:e})")]
    EigenSolverFailure { sweeps: usize, off_norm: f64, frobenius: f64 },

    #[error("bad rank {rank} for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("bad dimension {dim}: {reason}")]
    BadDimension { dim: usize, reason: &'static str },

    #[error("degenerate Gaussian sample after {attempts} attempts")]
    DegenerateSample { attempts: usize },

    #[error("mixing parameter {0} outside [0, 1]")]
    BadMixingParameter(f64),

    #[error("matrix is not unitary: max |U^dagger U - I| = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("measurement is incomplete: max |sum M^dagger M - I| = {residual:e}")]
    IncompleteMeasurement { residual: f64 },

    #[error("measurement set has no elements")]
    EmptyMeasurement,

    #[error("outcome index {index} out of range for {count} outcomes")]
    BadIndex { index: usize, count: usize },

    #[error("outcome probabilities sum to {total}, not 1")]
    ProbabilityNormalization { total: f64 },

    #[error("outcome has negligible probability {probability:e}; no conditional state")]
    NegligibleOutcome { probability: f64 },

    #[error("spectrum is not normalized: total {total}")]
    SpectrumNotNormalized { total: f64 },

    #[error("spectrum entry {value:e} is below the clipping floor")]
    SpectrumNegative { value: f64 },

    #[error("vectors have different totals: {left} vs {right}")]
    TotalMismatch { left: f64, right: f64 },

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("entropy-power order must be non-negative, got {0}")]
    BadKappa(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot summarize an empty record list")]
    EmptyInput,

    #[error("I/O failure on {path}: {detail}")]
    IoFailure { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
