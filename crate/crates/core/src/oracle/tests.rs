use super::*;
use crate::freefermion::{
    decompose_params, entanglement_entropy, max_entropy_over_states, restrict, SearchStrategy,
};
use crate::localization::sample_simple;
use crate::model::{CouplingSpec, DisorderEnsemble};

fn ensemble(gamma: CouplingSpec, seed: u64) -> DisorderEnsemble {
    DisorderEnsemble::new(
        CouplingSpec::Uniform { lo: 0.5, hi: 1.5 },
        gamma,
        CouplingSpec::Uniform { lo: -2.0, hi: 2.0 },
        seed,
    )
    .unwrap()
}

/// Random instance with simple one-particle spectrum.
fn random_params(n: usize, gamma: f64, seed: u64) -> ChainParams {
    let e = ensemble(CouplingSpec::Constant(gamma), seed);
    let (_, attempt) = sample_simple(&e, n, 0).unwrap();
    e.sample_attempt(n, 0, attempt).unwrap()
}

fn h_scale(params: &ChainParams) -> f64 {
    build_h(params).unwrap().matrix().max_abs()
}

#[test]
fn single_site_hamiltonian() {
    let p = ChainParams::new(vec![], vec![], vec![2.0]).unwrap();
    let h = build_h(&p).unwrap();
    let mut expected = CMat::zeros(2, 2);
    expected[(0, 0)] = c(-2.0, 0.0);
    expected[(1, 1)] = c(2.0, 0.0);
    assert_eq!(h.matrix(), &expected);
}

#[test]
fn two_site_isotropic_spectrum() {
    let p = ChainParams::new(vec![1.0], vec![0.0], vec![0.0, 0.0]).unwrap();
    let spec = exact_spectrum(&build_h(&p).unwrap()).unwrap();
    // H = -(σˣσˣ + σʸσʸ) has eigenvalues ±2 on span{e_01, e_10} and 0 on span{e_00, e_11}
    for (e, x) in spec.energies.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
        assert!((e - x).abs() < 1e-12);
    }
}

#[test]
fn hamiltonian_is_real_symmetric() {
    let h = build_h(&random_params(5, 0.6, 1)).unwrap();
    assert_eq!(h.matrix().max_imag(), 0.0);
    assert!(h.matrix().hermiticity_defect() < 1e-15);
}

#[test]
fn single_site_fermion_is_annihilator() {
    let c1 = &jordan_wigner(1).unwrap()[0];
    let mut a = CMat::zeros(2, 2);
    a[(1, 0)] = ONE;
    assert_eq!(c1.matrix(), &a);
}

#[test]
fn jordan_wigner_car_and_vacuum() {
    let cs = jordan_wigner(4).unwrap();
    assert!(car_residual(&cs) <= CAR_TOL);
    let omega = fermion_vacuum(4);
    for cj in &cs {
        assert!(cj.apply(&omega).iter().all(|z| *z == ZERO));
    }
}

#[test]
fn oracle_cap_is_enforced() {
    assert!(matches!(jordan_wigner(13), Err(Error::TooLarge { .. })));
    let p = ChainParams::uniform(13, 1.0, 0.0, 0.5).unwrap();
    assert!(build_h(&p).is_err());
}

#[test]
fn quadratic_form_identity() {
    let p = ChainParams::new(vec![0.0], vec![0.3], vec![0.7, -1.1]).unwrap();
    assert!(verify_quadratic_form(&p).unwrap() <= 1e-12);
    for (gamma, seed) in [(0.0, 2), (0.7, 3)] {
        let p = random_params(4, gamma, seed);
        assert!(verify_quadratic_form(&p).unwrap() <= QUADRATIC_FORM_TOL * h_scale(&p));
    }
}

#[test]
fn decoupled_spectrum_by_inspection() {
    let p = ChainParams::new(vec![0.0], vec![0.0], vec![1.0, 2.0]).unwrap();
    assert!(match_spectra(&p).unwrap() < 1e-14);
    let exact = exact_spectrum(&build_h(&p).unwrap()).unwrap();
    assert_eq!(exact.energies, vec![-3.0, -1.0, 1.0, 3.0]);
}

#[test]
fn spectra_match_at_eight_sites() {
    for (gamma, seed) in [(0.0, 4), (0.5, 5)] {
        let p = random_params(8, gamma, seed);
        assert!(match_spectra(&p).unwrap() <= SPECTRUM_TOL * h_scale(&p).max(1.0));
    }
}

#[test]
fn exact_spectrum_phase_convention() {
    let spec = exact_spectrum(&build_h(&random_params(4, 0.2, 6)).unwrap()).unwrap();
    for i in 0..spec.len() {
        let v = spec.state(i);
        let peak = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let lead = v.iter().find(|z| z.norm() >= peak * (1.0 - 1e-12)).unwrap();
        assert!(lead.re > 0.0 && lead.im == 0.0);
    }
}

#[test]
fn entanglement_of_trivial_cuts() {
    let p = random_params(5, 0.3, 7);
    for idx in [0, 3, 17] {
        let e = exact_entanglement(&p, idx, &SubInterval::full(5)).unwrap();
        assert!(e.abs() < 1e-10);
    }
    let decoupled =
        ChainParams::new(vec![0.0; 3], vec![0.0; 3], vec![1.0, 2.5, -0.7, 1.9]).unwrap();
    for idx in 0..16 {
        let e = exact_entanglement(&decoupled, idx, &SubInterval::new(1, 2, 4).unwrap()).unwrap();
        assert!(e.abs() < 1e-10);
    }
}

#[test]
fn ground_state_entropy_matches_free_fermions() {
    let p = random_params(6, 0.4, 8);
    let sub = SubInterval::from_one_based(2, 2, 6).unwrap();
    let exact = exact_entanglement(&p, 0, &sub).unwrap();
    let d = decompose_params(&p).unwrap();
    let g = d.correlation_matrix(&OccupationPattern::vacuum(6)).unwrap();
    let ff = entanglement_entropy(&restrict(&g, &sub).unwrap()).unwrap();
    assert!((exact - ff).abs() <= ENTROPY_TOL, "{exact} vs {ff}");
}

#[test]
fn correlations_of_reference_states() {
    let n = 3;
    let cs = jordan_wigner(n).unwrap();
    let omega = DenseOperator::new(density_matrix(&fermion_vacuum(n)), n).unwrap();
    let g = correlation_from_state(&omega, &cs).unwrap();
    let expected = Mat::from_diag(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    assert!(g.matrix().max_abs_diff(&expected) < 1e-15);

    let mixed = DenseOperator::new(CMat::identity(8).scale(c(0.125, 0.0)), n).unwrap();
    let g = correlation_from_state(&mixed, &cs).unwrap();
    assert!(g.matrix().max_abs_diff(&Mat::identity(6).scale(0.5)) < 1e-15);
}

#[test]
fn invalid_density_matrices_are_rejected() {
    let cs = jordan_wigner(1).unwrap();
    let not_normalized = DenseOperator::new(CMat::identity(2), 1).unwrap();
    assert!(correlation_from_state(&not_normalized, &cs).is_err());
    let mut negative = CMat::zeros(2, 2);
    negative[(0, 0)] = c(1.5, 0.0);
    negative[(1, 1)] = c(-0.5, 0.0);
    let negative = DenseOperator::new(negative, 1).unwrap();
    assert!(correlation_from_state(&negative, &cs).is_err());
}

#[test]
fn eigenstate_correlation_matches_projection() {
    let p = random_params(4, 0.6, 9);
    let d = decompose_params(&p).unwrap();
    let h = build_h(&p).unwrap();
    let spec = exact_spectrum(&h).unwrap();
    let alpha = OccupationPattern::new(vec![true, false, false, true]);
    let psi = eigenstate_for_pattern(&d, &spec, &alpha, h.matrix().max_abs()).unwrap();
    let cs = jordan_wigner(4).unwrap();
    let rho = DenseOperator::new(density_matrix(&psi), 4).unwrap();
    let from_rho = correlation_from_state(&rho, &cs).unwrap();
    let from_psi = correlation_from_vector(&psi, &cs).unwrap();
    let ff = d.correlation_matrix(&alpha).unwrap();
    assert!(from_rho.matrix().max_abs_diff(ff.matrix()) <= CORRELATION_TOL);
    assert!(from_psi.matrix().max_abs_diff(ff.matrix()) <= CORRELATION_TOL);
}

#[test]
fn wick_rule_on_eigenstates() {
    let p = random_params(4, 0.5, 10);
    // (c_1, c_2*, c_3, c_4*)
    let report = wick_check(&p, 5, &[vec![0, 3, 4, 7]]).unwrap();
    assert!(report.max_residual <= CORRELATION_TOL);
    let odd = wick_check(&p, 5, &[vec![0], vec![1, 2, 5], vec![0, 3, 4, 7, 6]]).unwrap();
    assert!(odd.max_odd_expectation <= 1e-12);
    let pair = wick_check(&p, 2, &[vec![0, 1], vec![2, 5]]).unwrap();
    assert_eq!(pair.max_residual, 0.0);
}

#[test]
fn bogoliubov_fermions() {
    let report = check_bogoliubov_ops(&random_params(4, 0.7, 11)).unwrap();
    assert!(report.car <= 1e-10);
    assert!(report.hamiltonian <= 1e-9);
    assert!(report.commutator <= 1e-9);
}

#[test]
fn decoupled_bogoliubov_fermions_are_site_fermions() {
    // ν > 0 makes the occupied site the low-energy one, so b_j = ±c_j*;
    // λ orders the modes by |ν|
    let p = ChainParams::new(vec![0.0], vec![0.0], vec![2.0, -1.0]).unwrap();
    let d = decompose_params(&p).unwrap();
    let cs = jordan_wigner(2).unwrap();
    let b = bogoliubov_b_ops(&d, &cs).unwrap();
    let same_up_to_sign = |x: &CMat, y: &CMat| {
        x.max_abs_diff(y) < 1e-15 || x.max_abs_diff(&y.scale(c(-1.0, 0.0))) < 1e-15
    };
    assert!(same_up_to_sign(b[0].matrix(), cs[1].matrix()));
    assert!(same_up_to_sign(b[1].matrix(), cs[0].adjoint().matrix()));
}

#[test]
fn partial_trace_properties() {
    let p = random_params(5, 0.2, 12);
    let spec = exact_spectrum(&build_h(&p).unwrap()).unwrap();
    let psi = spec.state(7);
    let rho = density_matrix(&psi);
    for (s, l) in [(0, 2), (1, 3), (2, 1), (3, 2)] {
        let sub = SubInterval::new(s, l, 5).unwrap();
        let a = partial_trace(&rho, &sub).unwrap();
        let b = reduced_state(&psi, &sub).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
        assert!((a.trace() - ONE).norm() <= STATE_TOL);
        assert!(a.hermitian_eigvals().unwrap()[0] >= -STATE_TOL);
    }
}

#[test]
fn diagonal_product_state_identity() {
    assert!(diagonal_trace_identity(&[0.1, 0.5, 0.93, 0.27]).unwrap() <= STATE_TOL);
    let g = correlation_from_state(
        &diagonal_product_state(&[0.2, 0.7]).unwrap(),
        &jordan_wigner(2).unwrap(),
    )
    .unwrap();
    let expected = Mat::from_diag(&[0.8, 0.2, 0.3, 0.7]);
    assert!(g.matrix().max_abs_diff(&expected) < 1e-15);
}

#[test]
fn local_fermions_reproduce_restricted_correlations() {
    let p = random_params(6, 0.5, 13);
    let d = decompose_params(&p).unwrap();
    let h = build_h(&p).unwrap();
    let spec = exact_spectrum(&h).unwrap();
    let alpha = OccupationPattern::from_index(6, 0b100110);
    let psi = eigenstate_for_pattern(&d, &spec, &alpha, h.matrix().max_abs()).unwrap();
    let sub = SubInterval::new(2, 3, 6).unwrap();
    let rho1 = DenseOperator::new(reduced_state(&psi, &sub).unwrap(), 3).unwrap();
    let local = correlation_from_state(&rho1, &jordan_wigner(3).unwrap()).unwrap();
    let gamma1 = d.restricted_correlation(&alpha, &sub).unwrap();
    assert!(local.matrix().max_abs_diff(gamma1.matrix()) <= CORRELATION_TOL);
}

#[test]
fn restricted_entropy_matches_partial_trace() {
    let p = random_params(4, 0.3, 14);
    let d = decompose_params(&p).unwrap();
    let h = build_h(&p).unwrap();
    let spec = exact_spectrum(&h).unwrap();
    let sub = SubInterval::new(1, 2, 4).unwrap();
    for idx in 0..16 {
        let alpha = OccupationPattern::from_index(4, idx);
        let psi = eigenstate_for_pattern(&d, &spec, &alpha, h.matrix().max_abs()).unwrap();
        let exact = von_neumann_entropy(&reduced_state(&psi, &sub).unwrap()).unwrap();
        let ff = entanglement_entropy(&d.restricted_correlation(&alpha, &sub).unwrap()).unwrap();
        assert!((exact - ff).abs() <= 1e-8);
    }
}

#[test]
fn complementary_entropies_agree_with_oracle() {
    let p = random_params(6, 0.4, 15);
    let d = decompose_params(&p).unwrap();
    let h = build_h(&p).unwrap();
    let spec = exact_spectrum(&h).unwrap();
    let alpha = OccupationPattern::from_index(6, 41);
    let psi = eigenstate_for_pattern(&d, &spec, &alpha, h.matrix().max_abs()).unwrap();
    let left = SubInterval::new(0, 2, 6).unwrap();
    let right = left.connected_complement().unwrap();
    let exact = von_neumann_entropy(&reduced_state(&psi, &left).unwrap()).unwrap();
    for sub in [left, right] {
        let ff = entanglement_entropy(&d.restricted_correlation(&alpha, &sub).unwrap()).unwrap();
        assert!((exact - ff).abs() <= ENTROPY_TOL);
    }
}

#[test]
fn exhaustive_maximum_matches_oracle_at_ten_sites() {
    let p = random_params(10, 0.0, 16);
    let d = decompose_params(&p).unwrap();
    let sub = SubInterval::new(0, 5, 10).unwrap();
    let ff = max_entropy_over_states(&d, &sub, SearchStrategy::exhaustive()).unwrap();
    let spec = exact_spectrum(&build_h(&p).unwrap()).unwrap();
    let exact_max = (0..spec.len())
        .map(|i| von_neumann_entropy(&reduced_state(&spec.state(i), &sub).unwrap()).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((ff.max_entropy - exact_max).abs() <= ENTROPY_TOL);
}
