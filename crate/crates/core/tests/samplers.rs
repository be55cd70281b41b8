use num_complex::Complex;
use qudit_epi::measurement::MeasurementSet;
use qudit_epi::optimize::bilocal_expected_power;
use qudit_epi::{
    entropy_power_of_state, partial_swap_closed, partial_swap_conjugation, random_state, random_unitary, CMatrix,
    DensityMatrix, DensityMatrixF32, MixingParameterF32, MultipartiteState, RandomSource, StateKind,
};

#[test]
fn ginibre_mean_purity_matches_hilbert_schmidt_value() {
    // E Tr rho^2 = (N + K) / (N K + 1) for N x K Ginibre; 4/5 for qubits.
    let mut rng = RandomSource::new(77, 0);
    let n = 20_000;
    let mean: f64 = (0..n)
        .map(|_| random_state::<f64>(2, StateKind::MixedGinibre, &mut rng).unwrap().purity())
        .sum::<f64>()
        / n as f64;
    assert!((mean - 0.8).abs() < 0.01, "mean purity {mean}");

    let mean3: f64 = (0..n)
        .map(|_| random_state::<f64>(3, StateKind::MixedRank(2), &mut rng).unwrap().purity())
        .sum::<f64>()
        / n as f64;
    assert!((mean3 - 5.0 / 7.0).abs() < 0.01, "rank-2 mean purity {mean3}");
}

#[test]
fn pure_sampler_gives_unit_purity() {
    let mut rng = RandomSource::new(78, 0);
    for d in 2..=6 {
        let rho: DensityMatrix = random_state(d, StateKind::PureHaar, &mut rng).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn haar_unitary_entries_have_uniform_second_moment() {
    let mut rng = RandomSource::new(79, 0);
    let d = 4;
    let n = 5_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let u: CMatrix = random_unitary(d, &mut rng).unwrap();
        assert!(u.unitarity_residual() < 1e-12);
        acc += u[(0, 0)].norm_sqr() + u[(d - 1, 2)].norm_sqr();
    }
    let mean = acc / (2 * n) as f64;
    assert!((mean - 0.25).abs() < 0.01, "E|U_ij|^2 = {mean}");
}

#[test]
fn bell_state_scan_over_qubit_bases() {
    // Every projective qubit measurement on half of a Bell pair leaves the
    // other half pure, so the expected entropy power is exactly 1.
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex::new(0.0, 0.0);
    let bell = DensityMatrix::pure(&[Complex::new(r, 0.0), z, z, Complex::new(r, 0.0)]).unwrap();
    let y = MultipartiteState::new(bell.clone(), vec![2, 2]).unwrap();
    let extended = MultipartiteState::new(qudit_epi::tensor(&bell, &DensityMatrix::maximally_mixed(2)), vec![2, 2, 2]).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=16 {
        for j in 0..16 {
            let theta = std::f64::consts::PI * i as f64 / 16.0;
            let phi = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let e = Complex::from_polar(1.0, phi);
            let u = CMatrix::from_rows(&[vec![Complex::new(c, 0.0), -e.conj() * s], vec![e * s, Complex::new(c, 0.0)]]).unwrap();
            let m = qudit_epi::projective_from_unitary(&u).unwrap();
            let outcomes = qudit_epi::condition_all(&y, &m).unwrap();
            let v = qudit_epi::expected_entropy_power(&outcomes, 1.0).unwrap();
            worst = worst.max((v - 1.0).abs());
            let v2 = bilocal_expected_power(&extended, &u, &CMatrix::identity(2), 1.0).unwrap();
            assert!((v2 - 1.0).abs() < 1e-12, "{v2}");
        }
    }
    assert!(worst < 1e-12);
    let trivial = qudit_epi::condition_all(&y, &MeasurementSet::trivial(2)).unwrap();
    let mixed = entropy_power_of_state(trivial[0].state.as_ref().unwrap(), 1.0).unwrap();
    assert!((mixed - 2.0).abs() < 1e-12);
}

#[test]
fn single_precision_core_agrees_with_oracle() {
    let mut rng = RandomSource::new(80, 0);
    for d in 2..=4 {
        let a: DensityMatrixF32 = random_state(d, StateKind::MixedGinibre, &mut rng).unwrap();
        let b: DensityMatrixF32 = random_state(d, StateKind::MixedGinibre, &mut rng).unwrap();
        let tau = MixingParameterF32::new(0.3).unwrap();
        let closed = partial_swap_closed(&a, &b, tau).unwrap();
        let dense = partial_swap_conjugation(&a, &b, tau).unwrap();
        assert!(closed.matrix().max_abs_diff(dense.matrix()) < 1e-5);
        let nu = entropy_power_of_state(&closed, 1.0f32).unwrap();
        assert!((1.0..=d as f32 + 1e-4).contains(&nu));
    }
}
