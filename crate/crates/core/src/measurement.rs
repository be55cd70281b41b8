//! Local measurements on environment subsystems and the conditional states
//! they leave behind on the system.
//!
//! For a bipartite `rho_{XE}` and Kraus element `M_j` on `E`:
//!
//! ```text
//! p_j       = Tr(M_j^dagger M_j rho_E)
//! rho_X|E(j) = Tr_E[(I ⊗ M_j) rho_{XE} (I ⊗ M_j^dagger)] / p_j
//! ```

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;
use crate::state::{eigenvalues_descending_tol, partial_trace_matrix, DensityMatrix, MultipartiteState, Spectrum};

/// Outcomes with probability at or below this carry no conditional state.
pub const PROB_FLOOR: f64 = 1e-12;

/// Kraus operators `{M_j}` on one subsystem with `sum_j M_j^dagger M_j = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet<T> {
    dim: usize,
    elements: Vec<CMatrix<T>>,
    effects: Vec<CMatrix<T>>,
}

impl<T: Real> MeasurementSet<T> {
    pub fn new(elements: Vec<CMatrix<T>>, tol: T) -> Result<Self> {
        let dim = elements.first().ok_or(Error::EmptyMeasurement)?.rows();
        if let Some(bad) = elements.iter().find(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {}x{} in a {dim}-dimensional measurement",
                bad.rows(),
                bad.cols()
            )));
        }
        let effects: Vec<CMatrix<T>> = elements.iter().map(|m| &m.adjoint() * m).collect();
        let sum = effects.iter().fold(CMatrix::zeros(dim, dim), |acc, e| &acc + e);
        let residual = sum.max_abs_diff(&CMatrix::identity(dim));
        if !(residual <= tol) {
            return Err(Error::IncompleteMeasurement {
                residual: residual.as_f64(),
            });
        }
        Ok(Self { dim, elements, effects })
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        let id = CMatrix::identity(dim);
        Self {
            dim,
            elements: vec![id.clone()],
            effects: vec![id],
        }
    }

    /// Projectors onto the computational basis.
    pub fn computational(dim: usize) -> Self {
        projective_from_unitary(&CMatrix::identity(dim)).expect("identity is unitary")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix<T>] {
        &self.elements
    }

    /// `M_j^dagger M_j`.
    pub fn effect(&self, j: usize) -> &CMatrix<T> {
        &self.effects[j]
    }

    pub fn completeness_residual(&self) -> T {
        let sum = self.effects.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, e| &acc + e);
        sum.max_abs_diff(&CMatrix::identity(self.dim))
    }

    /// Product measurement `{M_j ⊗ N_k}` with outcomes in row-major `(j, k)` order.
    pub fn product(&self, other: &Self) -> Self {
        let mut elements = Vec::with_capacity(self.len() * other.len());
        let mut effects = Vec::with_capacity(self.len() * other.len());
        for (m, em) in self.elements.iter().zip(&self.effects) {
            for (n, en) in other.elements.iter().zip(&other.effects) {
                elements.push(m.kron(n));
                effects.push(em.kron(en));
            }
        }
        Self {
            dim: self.dim * other.dim,
            elements,
            effects,
        }
    }
}

/// Rank-1 projectors onto the columns of `u`.
pub fn projective_from_unitary<T: Real>(u: &CMatrix<T>) -> Result<MeasurementSet<T>> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let residual = u.unitarity_residual();
    if !(residual <= T::state_tol()) {
        return Err(Error::NotUnitary {
            residual: residual.as_f64(),
        });
    }
    let elements: Vec<CMatrix<T>> = (0..u.cols()).map(|j| CMatrix::outer(&u.column(j))).collect();
    let effects = elements.clone();
    Ok(MeasurementSet {
        dim: u.rows(),
        elements,
        effects,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeIndex {
    Single(usize),
    Pair(usize, usize),
}

/// One measurement outcome: its probability and, when the probability is
/// above [`PROB_FLOOR`], the normalized conditional state.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalOutcome<T> {
    pub index: OutcomeIndex,
    pub probability: T,
    pub state: Option<DensityMatrix<T>>,
    /// Tolerance the conditional state was validated at; grows as `1/p` for
    /// rare outcomes where normalization amplifies round-off.
    pub tolerance: T,
}

impl<T: Real> ConditionalOutcome<T> {
    pub fn is_negligible(&self) -> bool {
        self.state.is_none()
    }
}

fn bipartite<T: Real>(s: &MultipartiteState<T>) -> Result<(usize, usize)> {
    match s.dims() {
        [x, e] => Ok((*x, *e)),
        dims => Err(Error::DimensionMismatch(format!(
            "conditioning needs a bipartite (X, E) state, got dims {dims:?}"
        ))),
    }
}

fn condition_on_effect<T: Real>(
    rho: &CMatrix<T>,
    dx: usize,
    de: usize,
    rho_e: &CMatrix<T>,
    kraus: &CMatrix<T>,
    effect: &CMatrix<T>,
    index: OutcomeIndex,
) -> Result<ConditionalOutcome<T>> {
    let probability = (effect * rho_e).trace().re;
    let floor = T::lit(PROB_FLOOR);
    let base_tol = T::state_tol();
    if !(probability > floor) {
        return Ok(ConditionalOutcome {
            index,
            probability,
            state: None,
            tolerance: base_tol,
        });
    }
    // Tr_E[(I ⊗ M) rho (I ⊗ M^dagger)]: contract E indices against M on both sides.
    let mut sigma = CMatrix::<T>::zeros(dx, dx);
    for x in 0..dx {
        for xp in 0..dx {
            let mut acc = Complex::zero();
            for f in 0..de {
                for e in 0..de {
                    let m_fe = kraus[(f, e)];
                    if m_fe.is_zero() {
                        continue;
                    }
                    let row = x * de + e;
                    for ep in 0..de {
                        let m_fep = kraus[(f, ep)];
                        if m_fep.is_zero() {
                            continue;
                        }
                        acc = acc + m_fe * rho[(row, xp * de + ep)] * m_fep.conj();
                    }
                }
            }
            sigma[(x, xp)] = acc;
        }
    }
    let scale = T::lit(64.0 * (dx * de) as f64) * T::epsilon() / probability;
    let tolerance = base_tol.max(scale);
    let state = DensityMatrix::new(sigma.scale(T::one() / probability), tolerance)?;
    Ok(ConditionalOutcome {
        index,
        probability,
        state: Some(state),
        tolerance,
    })
}

/// Conditions `s = rho_{XE}` on outcome `j` of `m` acting on `E`.
pub fn condition<T: Real>(s: &MultipartiteState<T>, m: &MeasurementSet<T>, j: usize) -> Result<ConditionalOutcome<T>> {
    let (dx, de) = bipartite(s)?;
    if m.dim() != de {
        return Err(Error::DimensionMismatch(format!(
            "measurement on dimension {} applied to environment of dimension {de}",
            m.dim()
        )));
    }
    if j >= m.len() {
        return Err(Error::BadIndex { index: j, count: m.len() });
    }
    let rho_e = partial_trace_matrix(s.matrix(), &[dx, de], &[1]);
    condition_on_effect(s.matrix(), dx, de, &rho_e, &m.elements[j], &m.effects[j], OutcomeIndex::Single(j))
}

fn check_normalization<T: Real>(outcomes: &[ConditionalOutcome<T>]) -> Result<()> {
    let total: T = outcomes.iter().map(|o| o.probability).sum();
    if !((total - T::one()).abs() <= T::sum_tol()) {
        return Err(Error::ProbabilityNormalization { total: total.as_f64() });
    }
    if let Some(o) = outcomes.iter().find(|o| o.probability < -T::lit(1e-12)) {
        return Err(Error::NotDistribution(format!("negative outcome probability {}", o.probability)));
    }
    Ok(())
}

/// All outcomes of `m` on `E`, with probability normalization checked.
pub fn condition_all<T: Real>(s: &MultipartiteState<T>, m: &MeasurementSet<T>) -> Result<Vec<ConditionalOutcome<T>>> {
    let (dx, de) = bipartite(s)?;
    if m.dim() != de {
        return Err(Error::DimensionMismatch(format!(
            "measurement on dimension {} applied to environment of dimension {de}",
            m.dim()
        )));
    }
    let rho_e = partial_trace_matrix(s.matrix(), &[dx, de], &[1]);
    let outcomes = (0..m.len())
        .map(|j| condition_on_effect(s.matrix(), dx, de, &rho_e, &m.elements[j], &m.effects[j], OutcomeIndex::Single(j)))
        .collect::<Result<Vec<_>>>()?;
    check_normalization(&outcomes)?;
    Ok(outcomes)
}

/// Conditions `rho_{Y E1 E2}` on local measurements `m1` on `E1` and `m2` on
/// `E2`. Returns a grid indexed `[j][k]`.
pub fn condition_bilocal<T: Real>(
    s: &MultipartiteState<T>,
    m1: &MeasurementSet<T>,
    m2: &MeasurementSet<T>,
) -> Result<Vec<Vec<ConditionalOutcome<T>>>> {
    let (dy, e1, e2) = match s.dims() {
        [y, a, b] => (*y, *a, *b),
        dims => {
            return Err(Error::DimensionMismatch(format!(
                "bilocal conditioning needs (Y, E1, E2), got dims {dims:?}"
            )))
        }
    };
    if m1.dim() != e1 || m2.dim() != e2 {
        return Err(Error::DimensionMismatch(format!(
            "measurements on ({}, {}) applied to environments ({e1}, {e2})",
            m1.dim(),
            m2.dim()
        )));
    }
    let de = e1 * e2;
    let rho_e = partial_trace_matrix(s.matrix(), &[dy, de], &[1]);
    let mut grid = Vec::with_capacity(m1.len());
    let mut flat = Vec::with_capacity(m1.len() * m2.len());
    for j in 0..m1.len() {
        let mut row = Vec::with_capacity(m2.len());
        for k in 0..m2.len() {
            let kraus = m1.elements[j].kron(&m2.elements[k]);
            let effect = m1.effects[j].kron(&m2.effects[k]);
            let o = condition_on_effect(s.matrix(), dy, de, &rho_e, &kraus, &effect, OutcomeIndex::Pair(j, k))?;
            flat.push(o.clone());
            row.push(o);
        }
        grid.push(row);
    }
    check_normalization(&flat)?;
    Ok(grid)
}

/// Descending spectrum of a non-negligible outcome's conditional state.
pub fn conditional_spectrum<T: Real>(outcome: &ConditionalOutcome<T>) -> Result<Spectrum<T>> {
    match &outcome.state {
        Some(state) => eigenvalues_descending_tol(state, outcome.tolerance),
        None => Err(Error::NegligibleOutcome {
            probability: outcome.probability.as_f64(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use crate::state::{partial_trace, random_state, random_unitary, tensor, StateKind};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn bell() -> MultipartiteState<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        MultipartiteState::new(DensityMatrix::pure(&psi).unwrap(), vec![2, 2]).unwrap()
    }

    /// Literal Eq.-style route: dense (I ⊗ M) rho (I ⊗ M^dagger), then trace E.
    fn literal_conditional(s: &MultipartiteState<f64>, m: &CMatrix<f64>) -> (CMatrix<f64>, f64) {
        let (dx, de) = (s.dims()[0], s.dims()[1]);
        let op = CMatrix::identity(dx).kron(m);
        let out = &(&op * s.matrix()) * &op.adjoint();
        let reduced = partial_trace_matrix(&out, &[dx, de], &[0]);
        let p = reduced.trace().re;
        (reduced.scale(1.0 / p), p)
    }

    #[test]
    fn projective_sets() {
        let m = projective_from_unitary(&CMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(m.elements()[0], CMatrix::diagonal(&[1.0, 0.0]));
        assert_eq!(m.elements()[1], CMatrix::diagonal(&[0.0, 1.0]));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::<f64>::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
        let m = projective_from_unitary(&had).unwrap();
        let plus = CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let minus = CMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!(m.elements()[0].max_abs_diff(&plus) < 1e-15);
        assert!(m.elements()[1].max_abs_diff(&minus) < 1e-15);

        let mut rng = RandomSource::new(9, 0);
        for d in 2..6 {
            let u: CMatrix<f64> = random_unitary(d, &mut rng).unwrap();
            assert!(projective_from_unitary(&u).unwrap().completeness_residual() <= 1e-12);
        }
        let not_unitary = CMatrix::<f64>::diagonal(&[1.0, 0.5]);
        assert!(matches!(projective_from_unitary(&not_unitary), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn incomplete_sets_rejected() {
        let half = CMatrix::<f64>::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            MeasurementSet::new(vec![half], 1e-10),
            Err(Error::IncompleteMeasurement { .. })
        ));
        assert!(matches!(MeasurementSet::<f64>::new(vec![], 1e-10), Err(Error::EmptyMeasurement)));
        // three-outcome trine-like POVM on a qubit: sqrt(2/3)|psi_k><psi_k|
        let elems: Vec<CMatrix<f64>> = (0..3)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = [c((th / 2.0).cos(), 0.0), c((th / 2.0).sin(), 0.0)];
                CMatrix::outer(&v).scale((2.0f64 / 3.0).sqrt())
            })
            .collect();
        let povm = MeasurementSet::new(elems, 1e-10).unwrap();
        assert_eq!(povm.len(), 3);
    }

    #[test]
    fn conditioning_a_product_leaves_the_system() {
        let mut rng = RandomSource::new(10, 0);
        let x: DensityMatrix<f64> = random_state(3, StateKind::MixedGinibre, &mut rng).unwrap();
        let e: DensityMatrix<f64> = random_state(2, StateKind::MixedGinibre, &mut rng).unwrap();
        let s = MultipartiteState::new(tensor(&x, &e), vec![3, 2]).unwrap();
        let u: CMatrix<f64> = random_unitary(2, &mut rng).unwrap();
        let m = projective_from_unitary(&u).unwrap();
        for j in 0..2 {
            let o = condition(&s, &m, j).unwrap();
            let expected_p = (m.effect(j) * e.matrix()).trace().re;
            assert!((o.probability - expected_p).abs() < 1e-15);
            assert!(o.state.unwrap().matrix().max_abs_diff(x.matrix()) <= 1e-10);
        }
    }

    #[test]
    fn bell_outcomes() {
        let m = MeasurementSet::computational(2);
        let o = condition(&bell(), &m, 0).unwrap();
        assert!((o.probability - 0.5).abs() < 1e-15);
        assert!(o.state.unwrap().matrix().max_abs_diff(&CMatrix::diagonal(&[1.0, 0.0])) < 1e-15);
        let all = condition_all(&bell(), &m).unwrap();
        assert!(all[1].state.as_ref().unwrap().matrix().max_abs_diff(&CMatrix::diagonal(&[0.0, 1.0])) < 1e-15);
        assert!(matches!(condition(&bell(), &m, 2), Err(Error::BadIndex { .. })));
        assert!(matches!(
            condition(&bell(), &MeasurementSet::computational(3), 0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn computational_basis_reads_out_diagonal_environment() {
        let x = DensityMatrix::<f64>::maximally_mixed(2);
        let q = [0.2, 0.5, 0.3];
        let e = DensityMatrix::diagonal(&q).unwrap();
        let s = MultipartiteState::new(tensor(&x, &e), vec![2, 3]).unwrap();
        let all = condition_all(&s, &MeasurementSet::computational(3)).unwrap();
        for (o, &qj) in all.iter().zip(&q) {
            assert!((o.probability - qj).abs() < 1e-15);
        }
    }

    #[test]
    fn fast_contraction_matches_literal_conjugation() {
        let mut rng = RandomSource::new(11, 0);
        let s = MultipartiteState::new(random_state(6, StateKind::MixedGinibre, &mut rng).unwrap(), vec![2, 3]).unwrap();
        let u: CMatrix<f64> = random_unitary(3, &mut rng).unwrap();
        // a non-projective Kraus set: M_j = sqrt(w_j) U_j with unitary U_j
        let w = [0.5, 0.3, 0.2];
        let kraus: Vec<CMatrix<f64>> = w.iter().enumerate().map(|(j, &wj)| {
            let v: CMatrix<f64> = random_unitary(3, &mut RandomSource::new(12, j as u64)).unwrap();
            (&v * &u).scale(f64::sqrt(wj))
        }).collect();
        let m = MeasurementSet::new(kraus, 1e-10).unwrap();
        for j in 0..m.len() {
            let o = condition(&s, &m, j).unwrap();
            let (lit, p) = literal_conditional(&s, &m.elements()[j]);
            assert!((o.probability - p).abs() < 1e-14);
            assert!(o.state.unwrap().matrix().max_abs_diff(&lit) < 1e-13);
        }
    }

    #[test]
    fn bilocal_grid_properties() {
        let mut rng = RandomSource::new(13, 0);
        let y: DensityMatrix<f64> = random_state(2, StateKind::MixedGinibre, &mut rng).unwrap();
        let e1: DensityMatrix<f64> = random_state(2, StateKind::MixedGinibre, &mut rng).unwrap();
        let e2: DensityMatrix<f64> = random_state(3, StateKind::MixedGinibre, &mut rng).unwrap();
        let s = MultipartiteState::new(tensor(&tensor(&y, &e1), &e2), vec![2, 2, 3]).unwrap();
        let m1 = projective_from_unitary(&random_unitary(2, &mut rng).unwrap()).unwrap();
        let m2 = projective_from_unitary(&random_unitary(3, &mut rng).unwrap()).unwrap();
        let grid = condition_bilocal(&s, &m1, &m2).unwrap();
        let mut total = 0.0;
        for row in &grid {
            for o in row {
                total += o.probability;
                assert!(o.state.as_ref().unwrap().matrix().max_abs_diff(y.matrix()) <= 1e-10);
            }
        }
        assert!((total - 1.0).abs() <= 1e-9);

        let trivial = condition_bilocal(&s, &MeasurementSet::trivial(2), &MeasurementSet::trivial(3)).unwrap();
        assert_eq!(trivial.len(), 1);
        assert!((trivial[0][0].probability - 1.0).abs() < 1e-14);
        let marginal = partial_trace(&s, &[0]).unwrap();
        assert!(trivial[0][0].state.as_ref().unwrap().matrix().max_abs_diff(marginal.matrix()) < 1e-14);
    }

    #[test]
    fn spectra_of_outcomes() {
        let m = MeasurementSet::computational(2);
        let o = condition(&bell(), &m, 0).unwrap();
        assert_eq!(conditional_spectrum(&o).unwrap().values(), &[1.0, 0.0]);

        let x = DensityMatrix::<f64>::maximally_mixed(3);
        let e = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let s = MultipartiteState::new(tensor(&x, &e), vec![3, 2]).unwrap();
        let sp = conditional_spectrum(&condition(&s, &m, 1).unwrap()).unwrap();
        assert!(sp.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));

        let e = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let s = MultipartiteState::new(tensor(&x, &e), vec![3, 2]).unwrap();
        let o = condition(&s, &m, 1).unwrap();
        assert!(o.is_negligible());
        assert!(matches!(conditional_spectrum(&o), Err(Error::NegligibleOutcome { .. })));
    }
}
