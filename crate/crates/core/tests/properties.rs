use proptest::prelude::*;
use xychain_core::freefermion::{
    arealaw_upper_bound, bogoliubov_residuals, decompose_params, entanglement_entropy,
    entropy_bound_chain, max_entropy_over_states, BogoliubovDecomposition, OccupationPattern,
    SearchStrategy, SubInterval,
};
use xychain_core::linalg::{pfaffian, real_svd, sym_eig, sym_eigvals, Mat};
use xychain_core::localization::{
    correlator_projection_sup, correlator_sign_sup_matrix, correlator_sum_bound,
    positive_projection_norms,
};
use xychain_core::model::{
    build_blocks, build_m, conjugate_by_p, conjugate_by_pt, ChainParams, CouplingSpec,
    DisorderEnsemble,
};
use xychain_core::CorrelatorMatrix;

fn chain(max_n: usize) -> impl Strategy<Value = ChainParams> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0..2.0f64, n - 1),
            prop::collection::vec(-1.0..1.0f64, n - 1),
            prop::collection::vec(-4.0..4.0f64, n),
        )
            .prop_map(|(mu, gamma, nu)| ChainParams::new(mu, gamma, nu).unwrap())
    })
}

/// Chains whose one-particle spectrum is simple, together with an occupation
/// pattern.
fn simple_chain(max_n: usize) -> impl Strategy<Value = (ChainParams, OccupationPattern)> {
    chain(max_n)
        .prop_filter("simple one-particle spectrum", |p| {
            decompose_params(p).is_ok_and(|d| d.min_gap() > 1e-6)
        })
        .prop_flat_map(|p| {
            let n = p.n();
            (Just(p), prop::collection::vec(any::<bool>(), n))
        })
        .prop_map(|(p, bits)| (p, OccupationPattern::new(bits)))
}

fn symmetric(max: usize) -> impl Strategy<Value = Mat> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-3.0..3.0f64, n * n)
            .prop_map(move |v| Mat::from_fn(n, n, |i, j| v[i.min(j) * n + i.max(j)]))
    })
}

fn decomp(p: &ChainParams) -> BogoliubovDecomposition {
    decompose_params(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effective_hamiltonian_spectrum_is_symmetric(p in chain(10)) {
        let m = build_m(&p);
        prop_assert!(m.matrix.asymmetry() == 0.0);
        let ev = sym_eigvals(&m.matrix).unwrap();
        let k = ev.len();
        for i in 0..k {
            prop_assert!((ev[i] + ev[k - 1 - i]).abs() <= 1e-10 * (1.0 + ev[k - 1].abs()));
        }
    }

    #[test]
    fn isotropic_spectrum_is_plus_minus_a(p in chain(10)) {
        let iso = ChainParams::new(p.mu().to_vec(), vec![0.0; p.n() - 1], p.nu().to_vec()).unwrap();
        let (a, _) = build_blocks(&iso);
        let mut expected: Vec<f64> = sym_eigvals(&a).unwrap();
        expected.extend(expected.clone().iter().map(|x| -x));
        expected.sort_by(f64::total_cmp);
        let got = sym_eigvals(&build_m(&iso).matrix).unwrap();
        for (x, y) in got.iter().zip(&expected) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn p_conjugation_round_trips_exactly(p in chain(8)) {
        let m = build_m(&p).matrix;
        prop_assert_eq!(conjugate_by_pt(&conjugate_by_p(&m)), m.clone());
        prop_assert_eq!(conjugate_by_p(&conjugate_by_pt(&m)), m);
    }

    #[test]
    fn symmetric_eigendecomposition_reconstructs(a in symmetric(12)) {
        let e = sym_eig(&a).unwrap();
        let scale = a.max_abs().max(1.0);
        prop_assert!(e.reconstruct().max_abs_diff(&a) <= 1e-10 * scale);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn svd_reconstructs(a in symmetric(10), shift in -1.0..1.0f64) {
        let s = Mat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + shift * (i as f64 - j as f64));
        let svd = real_svd(&s).unwrap();
        prop_assert!(svd.residual(&s) <= 1e-10 * s.max_abs().max(1.0));
        prop_assert!(svd.sigma.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn pfaffian_squares_to_determinant(v in prop::collection::vec(-1.0..1.0f64, 15)) {
        let n = 6;
        let mut a = Mat::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                a[(i, j)] = v[k];
                a[(j, i)] = -v[k];
                k += 1;
            }
        }
        let det: f64 = sym_eigvals(&a.tr_matmul(&a)).unwrap().iter().product::<f64>().sqrt();
        let pf = pfaffian(&a).unwrap();
        prop_assert!((pf * pf - det).abs() <= 1e-8 * det.max(1.0));
    }

    #[test]
    fn bogoliubov_matrix_is_symplectic_and_diagonalizes(p in chain(10)) {
        let d = decomp(&p);
        let m = build_m(&p).matrix;
        let r = bogoliubov_residuals(d.w(), &m, d.lambdas());
        prop_assert!(r.check(m.max_abs().max(1.0)).is_ok());
    }

    #[test]
    fn correlation_matrix_is_a_projection((p, alpha) in simple_chain(8)) {
        let g = decomp(&p).correlation_matrix(&alpha).unwrap();
        prop_assert!(g.projection_defect() <= 1e-9);
        prop_assert!((g.trace() - p.n() as f64).abs() <= 1e-9);
    }

    #[test]
    fn flipped_patterns_are_complementary((p, alpha) in simple_chain(8)) {
        let d = decomp(&p);
        let g = d.correlation_matrix(&alpha).unwrap();
        let h = d.correlation_matrix(&alpha.complement()).unwrap();
        let sum = g.matrix().add(h.matrix());
        prop_assert!(sum.max_abs_diff(&Mat::identity(2 * p.n())) <= 1e-9);
    }

    #[test]
    fn entropy_is_within_dimension_bound((p, alpha) in simple_chain(8), cut in 0.0..1.0f64) {
        let n = p.n();
        let d = decomp(&p);
        let ell = 1 + (cut * n as f64) as usize % n;
        for start in 0..=n - ell {
            let sub = SubInterval::new(start, ell, n).unwrap();
            let s = entanglement_entropy(&d.restricted_correlation(&alpha, &sub).unwrap()).unwrap();
            prop_assert!(s >= 0.0);
            prop_assert!(s <= ell as f64 * core::f64::consts::LN_2 + 1e-9);
        }
    }

    #[test]
    fn complementary_subchains_share_entropy((p, alpha) in simple_chain(8), cut in 0.0..1.0f64) {
        let n = p.n();
        prop_assume!(n >= 2);
        let ell = 1 + (cut * (n - 1) as f64) as usize;
        let d = decomp(&p);
        let left = SubInterval::left_edge(ell, n).unwrap();
        let right = left.connected_complement().unwrap();
        let s_left = entanglement_entropy(&d.restricted_correlation(&alpha, &left).unwrap()).unwrap();
        let s_right = entanglement_entropy(&d.restricted_correlation(&alpha, &right).unwrap()).unwrap();
        prop_assert!((s_left - s_right).abs() <= 1e-7);
    }

    #[test]
    fn bound_chain_is_monotone((p, alpha) in simple_chain(8), cut in 0.0..1.0f64) {
        let n = p.n();
        prop_assume!(n >= 2);
        let ell = 1 + (cut * (n - 1) as f64) as usize;
        let sub = SubInterval::centered(ell, n).unwrap();
        let g = decomp(&p).correlation_matrix(&alpha).unwrap();
        let chain = entropy_bound_chain(&g, &sub).unwrap();
        prop_assert!(chain.is_monotone(1e-9));
        prop_assert!(chain.entropy <= arealaw_upper_bound(&g, &sub).unwrap() + 1e-9);
    }

    #[test]
    fn searched_entropy_never_exceeds_rigorous_bound((p, _) in simple_chain(7), seed in any::<u64>()) {
        let n = p.n();
        let sub = SubInterval::centered(n.div_ceil(2), n).unwrap();
        let d = decomp(&p);
        let search = max_entropy_over_states(&d, &sub, SearchStrategy::Sample { count: 8, seed }).unwrap();
        prop_assert!(search.max_entropy >= 0.0);
        prop_assert!(search.max_entropy <= search.rigorous_bound + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn correlator_domination_chain((p, _) in simple_chain(6)) {
        let d = decomp(&p);
        let sum = correlator_sum_bound(&d).unwrap();
        let sign = correlator_sign_sup_matrix(&d, 12).unwrap();
        let proj = correlator_projection_sup(&d, 1 << 6).unwrap();
        prop_assert!(sum.dominates(&sign, 1e-10));
        prop_assert!(sign.dominates(&proj, 1e-10));
        let positive = CorrelatorMatrix::new(
            positive_projection_norms(&d).unwrap(),
            xychain_core::CorrelatorKind::ProjectionSup,
        ).unwrap();
        prop_assert!(sum.dominates(&positive, 1e-10));
        for j in 0..p.n() {
            for k in 0..p.n() {
                prop_assert!(sum.get(j, k) >= 0.0);
                prop_assert_eq!(sum.get(j, k), sum.get(k, j));
            }
        }
    }

    #[test]
    fn sampling_is_a_pure_function_of_seed_and_index(seed in any::<u64>(), idx in 0u64..1000, n in 2usize..20) {
        let ens = DisorderEnsemble::new(
            CouplingSpec::Uniform { lo: 0.5, hi: 1.5 },
            CouplingSpec::Constant(0.0),
            CouplingSpec::Uniform { lo: 0.0, hi: 5.0 },
            seed,
        ).unwrap();
        let later = ens.sample(n, idx + 1).unwrap();
        let a = ens.sample(n, idx).unwrap();
        let b = ens.sample(n, idx).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_ne!(a, later);
    }
}
