//! Validated quantum states and the subsystem operations on them.
//!
//! Subsystem ordering convention: the leftmost tensor factor is the
//! slowest-varying index. Multipartite states list their subsystem
//! dimensions in that order, e.g. `(X1, E1, X2, E2)`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, orthonormalize_columns, CMatrix};
use crate::rng::RandomSource;
use crate::scalar::Real;

/// Hermitian, positive semidefinite, unit-trace complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates `entries` at tolerance `tol` and stores the symmetrized
    /// matrix `(rho + rho^dagger) / 2`.
    pub fn new(entries: CMatrix<T>, tol: T) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::NotSquare {
                rows: entries.rows(),
                cols: entries.cols(),
            });
        }
        let deviation = entries.max_abs_diff(&entries.adjoint());
        if !(deviation <= tol) {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
            });
        }
        let matrix = entries.hermitian_part();
        let trace_dev = (matrix.trace().re - T::one()).abs();
        if !(trace_dev <= tol) {
            return Err(Error::NotUnitTrace {
                deviation: trace_dev.as_f64(),
            });
        }
        let min_eig = hermitian_eigenvalues(&matrix)?
            .into_iter()
            .fold(T::infinity(), T::min);
        if !(min_eig >= -tol) {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig.as_f64(),
            });
        }
        Ok(Self { matrix })
    }

    /// Validates at the scalar type's default tolerance.
    pub fn from_matrix(entries: CMatrix<T>) -> Result<Self> {
        Self::new(entries, T::state_tol())
    }

    /// Wraps a matrix already known to be a state (e.g. a product of states).
    pub(crate) fn from_trusted(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_trusted(CMatrix::identity(d).scale(T::one() / T::lit(d as f64)))
    }

    /// `|psi><psi|` for a normalized vector (normalization is enforced).
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let n = crate::linalg::norm(psi);
        if !(n > T::zero()) {
            return Err(Error::NotUnitTrace { deviation: 1.0 });
        }
        let v: Vec<Complex<T>> = psi.iter().map(|z| z / n).collect();
        Self::from_matrix(CMatrix::outer(&v))
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(p: &[T]) -> Result<Self> {
        Self::from_matrix(CMatrix::diagonal(p))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn purity(&self) -> T {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// A density matrix together with its ordered subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteState<T> {
    state: DensityMatrix<T>,
    dims: Vec<usize>,
}

impl<T: Real> MultipartiteState<T> {
    pub fn new(state: DensityMatrix<T>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid subsystem dims {dims:?}")));
        }
        let product: usize = dims.iter().product();
        if product != state.dim() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dims {dims:?} multiply to {product}, state has dimension {}",
                state.dim()
            )));
        }
        Ok(Self { state, dims })
    }

    /// Single-subsystem view of a state.
    pub fn single(state: DensityMatrix<T>) -> Self {
        let d = state.dim();
        Self { state, dims: vec![d] }
    }

    pub fn state(&self) -> &DensityMatrix<T> {
        &self.state
    }

    pub fn into_state(self) -> DensityMatrix<T> {
        self.state
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        self.state.matrix()
    }

    /// `self ⊗ other`, subsystems concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            state: tensor(&self.state, &other.state),
            dims,
        }
    }

    /// Same matrix under a different subsystem split.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.state.clone(), dims)
    }
}

/// Eigenvalues in non-increasing order, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    values: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    /// Sorts descending; entries in `[-clip_tol, 0)` become zero, anything
    /// lower is rejected. The result is renormalized when its total is within
    /// `sum_tol` of one and rejected otherwise.
    pub fn from_values(mut values: Vec<T>, clip_tol: T, sum_tol: T) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::NotDistribution("NaN entry".into()));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
        if let Some(&lowest) = values.last() {
            if lowest < -clip_tol {
                return Err(Error::SpectrumNegative {
                    value: lowest.as_f64(),
                });
            }
        }
        for v in values.iter_mut() {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        let total: T = values.iter().copied().sum();
        if !((total - T::one()).abs() <= sum_tol) {
            return Err(Error::SpectrumNotNormalized {
                total: total.as_f64(),
            });
        }
        for v in values.iter_mut() {
            *v = *v / total;
        }
        Ok(Self { values })
    }

    /// A probability vector at default tolerances.
    pub fn from_distribution(p: &[T]) -> Result<Self> {
        Self::from_values(p.to_vec(), T::state_tol(), T::sum_tol())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `w·self + (1-w)·other`, entrywise on the sorted vectors (shorter one
    /// zero-padded). Sorted inputs keep the mixture sorted.
    pub fn mix(&self, other: &Self, w: T) -> Vec<T> {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| {
                let a = self.values.get(i).copied().unwrap_or_else(T::zero);
                let b = other.values.get(i).copied().unwrap_or_else(T::zero);
                w * a + (T::one() - w) * b
            })
            .collect()
    }
}

impl<T> std::ops::Deref for Spectrum<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

/// Kronecker product; `a` is the slower-varying factor.
pub fn tensor<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> DensityMatrix<T> {
    DensityMatrix::from_trusted(a.matrix().kron(b.matrix()))
}

/// Reduced state on `keep` (sorted into original order).
pub fn partial_trace<T: Real>(s: &MultipartiteState<T>, keep: &[usize]) -> Result<MultipartiteState<T>> {
    let n = s.dims().len();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let before = keep.len();
    keep.dedup();
    if keep.len() != before {
        return Err(Error::BadSubsystemIndex(format!("duplicate index in {keep:?}")));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::BadSubsystemIndex(format!("index {bad} for {n} subsystems")));
    }
    if keep.is_empty() || keep.len() == n {
        return Err(Error::BadSubsystemIndex(format!(
            "keep set {keep:?} must be a non-empty proper subset of 0..{n}"
        )));
    }
    let reduced = partial_trace_matrix(s.matrix(), s.dims(), &keep);
    let dims = keep.iter().map(|&k| s.dims()[k]).collect();
    Ok(MultipartiteState {
        state: DensityMatrix::from_trusted(reduced.hermitian_part()),
        dims,
    })
}

/// Raw partial trace for a sorted, duplicate-free `keep` list (may be empty
/// or full). No validation.
pub(crate) fn partial_trace_matrix<T: Real>(m: &CMatrix<T>, dims: &[usize], keep: &[usize]) -> CMatrix<T> {
    let total: usize = dims.iter().product();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim = total / kept_dim;
    // full[kept * traced_dim + traced] = linear index in the full space
    let mut full = vec![0usize; total];
    let mut digits = vec![0usize; dims.len()];
    for lin in 0..total {
        let mut rem = lin;
        for i in (0..dims.len()).rev() {
            digits[i] = rem % dims[i];
            rem /= dims[i];
        }
        let (mut k_idx, mut t_idx) = (0usize, 0usize);
        for (i, &d) in dims.iter().enumerate() {
            if keep.binary_search(&i).is_ok() {
                k_idx = k_idx * d + digits[i];
            } else {
                t_idx = t_idx * d + digits[i];
            }
        }
        full[k_idx * traced_dim + t_idx] = lin;
    }
    CMatrix::from_fn(kept_dim, kept_dim, |r, c| {
        (0..traced_dim).fold(Complex::zero(), |acc, t| {
            acc + m[(full[r * traced_dim + t], full[c * traced_dim + t])]
        })
    })
}

/// Moves subsystem `i` to position `perm[i]`.
pub fn permute_subsystems<T: Real>(s: &MultipartiteState<T>, perm: &[usize]) -> Result<MultipartiteState<T>> {
    let n = s.dims().len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::BadPermutation {
            perm: perm.to_vec(),
            len: n,
        });
    }
    let (matrix, dims) = permute_matrix(s.matrix(), s.dims(), perm);
    Ok(MultipartiteState {
        state: DensityMatrix::from_trusted(matrix),
        dims,
    })
}

pub(crate) fn permute_matrix<T: Real>(m: &CMatrix<T>, dims: &[usize], perm: &[usize]) -> (CMatrix<T>, Vec<usize>) {
    let n = dims.len();
    let mut new_dims = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        new_dims[p] = dims[i];
    }
    let total: usize = dims.iter().product();
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    let mut new_digits = vec![0usize; n];
    for (lin, slot) in map.iter_mut().enumerate() {
        let mut rem = lin;
        for i in (0..n).rev() {
            digits[i] = rem % dims[i];
            rem /= dims[i];
        }
        for i in 0..n {
            new_digits[perm[i]] = digits[i];
        }
        *slot = new_digits
            .iter()
            .zip(&new_dims)
            .fold(0usize, |acc, (&dg, &d)| acc * d + dg);
    }
    let mut out = CMatrix::zeros(total, total);
    for r in 0..total {
        for c in 0..total {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    (out, new_dims)
}

pub fn eigenvalues_descending<T: Real>(rho: &DensityMatrix<T>) -> Result<Spectrum<T>> {
    eigenvalues_descending_tol(rho, T::state_tol())
}

/// As [`eigenvalues_descending`] with an explicit clipping floor.
pub fn eigenvalues_descending_tol<T: Real>(rho: &DensityMatrix<T>, clip_tol: T) -> Result<Spectrum<T>> {
    let values = hermitian_eigenvalues(rho.matrix())?;
    Spectrum::from_values(values, clip_tol, T::sum_tol())
}

/// `AB - BA`.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() || (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(&(a * b) - &(b * a))
}

/// Max elementwise absolute difference.
pub fn matrix_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "distance between {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.max_abs_diff(b))
}

/// Random state ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// `|psi><psi|` with `psi` a normalized complex Gaussian vector.
    PureHaar,
    /// `GG^dagger / Tr(GG^dagger)` with square complex Gaussian `G`
    /// (Hilbert–Schmidt measure).
    MixedGinibre,
    /// As Ginibre with a `d x k` matrix `G`.
    MixedRank(usize),
}

impl StateKind {
    pub fn label(&self) -> String {
        match self {
            StateKind::PureHaar => "pure".into(),
            StateKind::MixedGinibre => "ginibre".into(),
            StateKind::MixedRank(k) => format!("rank-k:{k}"),
        }
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" | "pure-haar" => Ok(StateKind::PureHaar),
            "ginibre" | "mixed-ginibre" => Ok(StateKind::MixedGinibre),
            other => other
                .strip_prefix("rank-k:")
                .and_then(|k| k.parse().ok())
                .map(StateKind::MixedRank)
                .ok_or_else(|| Error::Config(format!("unknown state kind '{other}'"))),
        }
    }
}

pub fn random_state<T: Real>(d: usize, kind: StateKind, rng: &mut RandomSource) -> Result<DensityMatrix<T>> {
    if d < 2 {
        return Err(Error::BadDimension {
            dim: d,
            reason: "random states need d >= 2",
        });
    }
    let k = match kind {
        StateKind::PureHaar => 1,
        StateKind::MixedGinibre => d,
        StateKind::MixedRank(k) => {
            if k == 0 || k > d {
                return Err(Error::BadRank { rank: k, dim: d });
            }
            k
        }
    };
    let g = CMatrix::from_fn(d, k, |_, _| rng.complex_gaussian());
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::from_matrix(w.scale(T::one() / tr))
}

/// Haar-random unitary from a Gram–Schmidt orthonormalized complex Gaussian
/// matrix.
pub fn random_unitary<T: Real>(d: usize, rng: &mut RandomSource) -> Result<CMatrix<T>> {
    const ATTEMPTS: usize = 3;
    if d == 0 {
        return Err(Error::BadDimension {
            dim: d,
            reason: "unitary needs d >= 1",
        });
    }
    for _ in 0..ATTEMPTS {
        let g = CMatrix::from_fn(d, d, |_, _| rng.complex_gaussian());
        if let Some(q) = orthonormalize_columns(&g) {
            return Ok(q);
        }
    }
    Err(Error::DegenerateSample { attempts: ATTEMPTS })
}
