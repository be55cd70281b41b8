//! Majorization, entropies and the entropy power `nu_kappa = exp(kappa S)`.
//!
//! All logarithms are natural. The concavity window for `nu_kappa` on the
//! `d`-simplex is `kappa <= kappa1(d) = 1 / (ln d)^2`.

use crate::error::{Error, Result};
use crate::measurement::ConditionalOutcome;
use crate::scalar::Real;
use crate::state::{eigenvalues_descending, partial_trace, DensityMatrix, MultipartiteState};

/// Recorded in run manifests.
pub const LOG_BASE: &str = "natural";

fn sorted_desc_padded<T: Real>(v: &[T], len: usize) -> Vec<T> {
    let mut out = v.to_vec();
    out.resize(len, T::zero());
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Prefix-sum comparison of `m ≺ n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MajorizationSlack<T> {
    /// `min_k (sum_{i<=k} n_i - sum_{i<=k} m_i)` over the proper prefixes.
    pub min_prefix: T,
    /// `|sum n - sum m|`.
    pub total_gap: T,
}

/// Prefix slacks of `m ≺ n` on the sorted, zero-padded vectors.
pub fn majorization_slack<T: Real>(n: &[T], m: &[T]) -> MajorizationSlack<T> {
    let len = n.len().max(m.len());
    let n = sorted_desc_padded(n, len);
    let m = sorted_desc_padded(m, len);
    let (mut sn, mut sm) = (T::zero(), T::zero());
    let mut min_prefix = T::infinity();
    for k in 0..len {
        sn = sn + n[k];
        sm = sm + m[k];
        if k + 1 < len {
            min_prefix = min_prefix.min(sn - sm);
        }
    }
    if len < 2 {
        min_prefix = T::zero();
    }
    MajorizationSlack {
        min_prefix,
        total_gap: (sn - sm).abs(),
    }
}

/// `true` iff `m ≺ n`: every descending prefix sum of `m` is at most that of
/// `n` (within `tol`) and the totals agree within `tol`.
pub fn majorizes<T: Real>(n: &[T], m: &[T], tol: T) -> Result<bool> {
    let s = majorization_slack(n, m);
    if s.total_gap > tol {
        let total = |v: &[T]| v.iter().copied().sum::<T>().as_f64();
        return Err(Error::TotalMismatch {
            left: total(n),
            right: total(m),
        });
    }
    Ok(s.min_prefix >= -tol)
}

fn check_distribution<T: Real>(p: &[T]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotDistribution("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= -T::state_tol())) {
        return Err(Error::NotDistribution(format!("entry {x} below zero")));
    }
    let total: T = p.iter().copied().sum();
    if !((total - T::one()).abs() <= T::sum_tol()) {
        return Err(Error::NotDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy<T: Real>(p: &[T]) -> Result<T> {
    check_distribution(p)?;
    Ok(entropy_unchecked(p))
}

fn entropy_unchecked<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|&&x| x > T::zero())
        .fold(T::zero(), |acc, &x| acc - x * x.ln())
}

pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let sp = eigenvalues_descending(rho)?;
    Ok(entropy_unchecked(sp.values()))
}

/// Order `kappa >= 0` of the entropy power, tied to a system dimension so the
/// concavity window can be checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPowerOrder<T> {
    kappa: T,
    dim: usize,
}

impl<T: Real> EntropyPowerOrder<T> {
    pub fn new(kappa: T, dim: usize) -> Result<Self> {
        if !(kappa >= T::zero()) || !kappa.is_finite() {
            return Err(Error::BadKappa(kappa.as_f64()));
        }
        Ok(Self { kappa, dim })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether `kappa <= kappa1(dim)`, the proven concavity window.
    pub fn in_window(&self) -> bool {
        match kappa_bounds::<f64>(self.dim) {
            Ok((k1, _)) => self.kappa.as_f64() <= k1 * (1.0 + 1e-12),
            Err(_) => false,
        }
    }
}

/// `exp(kappa H(p))` for a probability vector (any order).
pub fn entropy_power<T: Real>(p: &[T], kappa: T) -> Result<T> {
    if !(kappa >= T::zero()) {
        return Err(Error::BadKappa(kappa.as_f64()));
    }
    Ok((kappa * shannon_entropy(p)?).exp())
}

/// `exp(kappa S(rho))`.
pub fn entropy_power_of_state<T: Real>(rho: &DensityMatrix<T>, kappa: T) -> Result<T> {
    if !(kappa >= T::zero()) {
        return Err(Error::BadKappa(kappa.as_f64()));
    }
    Ok((kappa * von_neumann_entropy(rho)?).exp())
}

/// `(kappa1, kappa2) = (1 / (ln d)^2, 1 / (d - 1))`.
pub fn kappa_bounds<T: Real>(d: usize) -> Result<(T, T)> {
    if d < 2 {
        return Err(Error::BadDimension {
            dim: d,
            reason: "kappa bounds need d >= 2",
        });
    }
    let ln_d = T::lit(d as f64).ln();
    Ok((T::one() / (ln_d * ln_d), T::one() / T::lit((d - 1) as f64)))
}

/// `S(AB) - S(B)` for a bipartite state `(A, B)`.
pub fn conditional_vn_entropy<T: Real>(s: &MultipartiteState<T>) -> Result<T> {
    if s.dims().len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "conditional entropy needs a bipartite state, got dims {:?}",
            s.dims()
        )));
    }
    let s_ab = von_neumann_entropy(s.state())?;
    let s_b = von_neumann_entropy(partial_trace(s, &[1])?.state())?;
    Ok(s_ab - s_b)
}

/// `sum_j p_j nu_kappa(rho|j)`; negligible outcomes contribute zero.
pub fn expected_entropy_power<T: Real>(outcomes: &[ConditionalOutcome<T>], kappa: T) -> Result<T> {
    let total: T = outcomes.iter().map(|o| o.probability).sum();
    if !((total - T::one()).abs() <= T::sum_tol()) {
        return Err(Error::ProbabilityNormalization { total: total.as_f64() });
    }
    let mut acc = T::zero();
    for o in outcomes {
        if o.state.is_some() {
            let sp = crate::measurement::conditional_spectrum(o)?;
            acc = acc + o.probability * entropy_power(sp.values(), kappa)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::measurement::OutcomeIndex;
    use num_complex::Complex;

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[0.7, 0.3], &[0.5, 0.5], 1e-9).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[0.6, 0.4], 1e-9).unwrap());
        let r3 = 3f64.sqrt() / 4.0;
        assert!(majorizes(&[1.0, 0.0], &[0.5 + r3, 0.5 - r3], 1e-9).unwrap());
        assert!(matches!(majorizes(&[1.0, 0.0], &[0.4, 0.4], 1e-9), Err(Error::TotalMismatch { .. })));
        // zero padding of the shorter vector
        assert!(majorizes(&[1.0], &[0.5, 0.5], 1e-9).unwrap());
        // unsorted input is sorted first
        assert!(majorizes(&[0.3, 0.7], &[0.5, 0.5], 1e-9).unwrap());
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        let t = 1.0 / 3.0;
        assert!((shannon_entropy(&[t, t, t]).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(matches!(shannon_entropy(&[0.5, 0.4]), Err(Error::NotDistribution(_))));
        assert!(matches!(shannon_entropy(&[1.5, -0.5]), Err(Error::NotDistribution(_))));
    }

    #[test]
    fn von_neumann_examples() {
        let pure = DensityMatrix::<f64>::diagonal(&[0.0, 1.0, 0.0]).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-15);
        for d in 2..7 {
            let mixed = DensityMatrix::<f64>::maximally_mixed(d);
            assert!((von_neumann_entropy(&mixed).unwrap() - (d as f64).ln()).abs() < 1e-14);
        }
        let m = CMatrix::from_rows(&[
            vec![Complex::new(0.75, 0.0), Complex::new(0.25, -0.25)],
            vec![Complex::new(0.25, 0.25), Complex::new(0.25, 0.0)],
        ])
        .unwrap();
        let s: f64 = von_neumann_entropy(&DensityMatrix::from_matrix(m).unwrap()).unwrap();
        // H(1/2 + sqrt3/4, 1/2 - sqrt3/4), evaluated in 30-digit arithmetic
        assert!((s - 0.245_775_366_668_471_1).abs() < 1e-14);
    }

    #[test]
    fn entropy_power_examples() {
        assert_eq!(entropy_power(&[1.0, 0.0], 0.7).unwrap(), 1.0);
        assert!((entropy_power(&[0.5f64, 0.5], 1.0).unwrap() - 2.0).abs() < 1e-15);
        let k1 = 1.0 / 2f64.ln().powi(2);
        // exp(1 / ln 2), evaluated in 30-digit arithmetic
        assert!((entropy_power(&[0.5, 0.5], k1).unwrap() - 4.232_086_106_557_082).abs() < 1e-13);
        assert!(entropy_power(&[0.5, 0.5], -1.0).is_err());
    }

    #[test]
    fn kappa_bound_examples() {
        let (k1, k2) = kappa_bounds::<f64>(2).unwrap();
        assert!((k1 - 2.081_368_981_005_598).abs() < 1e-14);
        assert_eq!(k2, 1.0);
        assert_eq!(kappa_bounds::<f64>(3).unwrap().1, 0.5);
        let mut prev = f64::INFINITY;
        for d in 2..20 {
            let (k, _) = kappa_bounds::<f64>(d).unwrap();
            assert!(k < prev);
            prev = k;
        }
        assert!(matches!(kappa_bounds::<f64>(1), Err(Error::BadDimension { .. })));
    }

    #[test]
    fn order_window() {
        let (k1, _) = kappa_bounds::<f64>(3).unwrap();
        assert!(EntropyPowerOrder::new(k1, 3).unwrap().in_window());
        assert!(!EntropyPowerOrder::new(k1 * 1.01, 3).unwrap().in_window());
        assert!(EntropyPowerOrder::new(-0.1, 3).is_err());
    }

    #[test]
    fn conditional_entropy_examples() {
        let a = DensityMatrix::<f64>::diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::<f64>::diagonal(&[0.5, 0.25, 0.25]).unwrap();
        let ab = MultipartiteState::single(a.clone()).tensor(&MultipartiteState::single(b));
        let h = conditional_vn_entropy(&ab).unwrap();
        assert!((h - von_neumann_entropy(&a).unwrap()).abs() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex::new(0.0, 0.0);
        let bell = DensityMatrix::pure(&[Complex::new(s, 0.0), z, z, Complex::new(s, 0.0)]).unwrap();
        let bell = MultipartiteState::new(bell, vec![2, 2]).unwrap();
        assert!((conditional_vn_entropy(&bell).unwrap() + 2f64.ln()).abs() < 1e-14);

        let quarter = MultipartiteState::new(DensityMatrix::<f64>::maximally_mixed(4), vec![2, 2]).unwrap();
        assert!((conditional_vn_entropy(&quarter).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn expected_power_examples() {
        let pure = DensityMatrix::<f64>::diagonal(&[1.0, 0.0]).unwrap();
        let mixed = DensityMatrix::<f64>::maximally_mixed(2);
        let one = vec![ConditionalOutcome {
            index: OutcomeIndex::Single(0),
            probability: 1.0,
            state: Some(pure.clone()),
            tolerance: 1e-10,
        }];
        assert!((expected_entropy_power(&one, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let two = vec![
            ConditionalOutcome {
                index: OutcomeIndex::Single(0),
                probability: 0.5,
                state: Some(pure),
                tolerance: 1e-10,
            },
            ConditionalOutcome {
                index: OutcomeIndex::Single(1),
                probability: 0.5,
                state: Some(mixed),
                tolerance: 1e-10,
            },
        ];
        assert!((expected_entropy_power(&two, 1.0).unwrap() - 1.5).abs() < 1e-15);
    }
}
