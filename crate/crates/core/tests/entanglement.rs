use noisy_teleport::channels::{damped_bell, DampingFamily};
use noisy_teleport::entanglement::{
    dfdpb, f_adc_both, f_adc_pdc, f_pdc_both, fef, fef_bruteforce, marginal_defect, teleport_fidelity, DampingPair,
};
use noisy_teleport::linalg::tensor_product;
use noisy_teleport::sampling::{random_density_matrix, random_density_matrix_rank, random_unitary};
use noisy_teleport::state::DensityMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fef_is_local_unitary_invariant(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix_rank(2, rank, &mut rng);
        let u = tensor_product(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let rotated = DensityMatrix::new(u.conjugate_by(rho.matrix())).unwrap();
        prop_assert!((fef(&rho).unwrap().f - fef(&rotated).unwrap().f).abs() < 1e-8);
    }

    #[test]
    fn fef_result_is_consistent(seed in any::<u64>()) {
        let rho = random_density_matrix(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = fef(&rho).unwrap();
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&r.f));
        prop_assert!((rho.expectation(&r.maximizer) - r.f).abs() < 1e-8);
        prop_assert!(marginal_defect(&r.maximizer) < 1e-6);
        let big_f = teleport_fidelity(r.f.min(1.0), 2).unwrap();
        prop_assert!((0.5 - 1e-12..=1.0).contains(&big_f));
    }

    #[test]
    fn closed_forms_match_states(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        use DampingFamily::{Adc, Pdc};
        let pair = DampingPair::new(a, b).unwrap();
        let f = |x: DampingFamily, y: DampingFamily| fef(&damped_bell((x, a), (y, b)).unwrap()).unwrap().f;
        prop_assert!((f(Adc, Adc) - f_adc_both(pair).unwrap()).abs() < 1e-9);
        prop_assert!((f(Adc, Pdc) - f_adc_pdc(pair).unwrap()).abs() < 1e-9);
        prop_assert!((f(Pdc, Pdc) - f_pdc_both(pair).unwrap()).abs() < 1e-9);
        prop_assert!((f_adc_both(pair).unwrap() - f_adc_both(DampingPair::new(b, a).unwrap()).unwrap()).abs() < 1e-15);
        prop_assert!(f_pdc_both(pair).unwrap() >= 0.5);
    }

    #[test]
    fn derivative_matches_finite_difference(a in 0.0f64..1.0, b in 0.01f64..0.99) {
        let h = 1e-6;
        let f = |pb: f64| f_adc_both(DampingPair::new(a, pb).unwrap()).unwrap();
        let fd = (f(b + h) - f(b - h)) / (2.0 * h);
        prop_assert!((fd - dfdpb(DampingPair::new(a, b).unwrap()).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn adc_pdc_partials_are_negative(a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let h = 1e-6;
        let f = |x: f64, y: f64| f_adc_pdc(DampingPair::new(x, y).unwrap()).unwrap();
        prop_assert!(f(a + h, b) < f(a - h, b));
        prop_assert!(f(a, b + h) < f(a, b - h));
    }
}

#[test]
fn bruteforce_agrees_and_finds_maximally_entangled_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..25 {
        let rho = random_density_matrix(2, &mut rng);
        let exact = fef(&rho).unwrap();
        let search = fef_bruteforce(&rho, 32, 1e-8).unwrap();
        assert!((exact.f - search.f).abs() < 1e-6);
        assert!((rho.expectation(&search.maximizer) - search.f).abs() < 1e-8);
        assert!(marginal_defect(&search.maximizer) < 1e-6);
    }
}

#[test]
fn werner_fef_both_ways() {
    for v in [0.0, 0.5, 0.8, 1.0] {
        let w = noisy_teleport::state::werner_state(v).unwrap();
        let expected = (1.0 + 3.0 * v) / 4.0;
        assert!((fef(&w).unwrap().f - expected).abs() < 1e-12);
        assert!((fef_bruteforce(&w, 8, 1e-8).unwrap().f - expected).abs() < 1e-8);
    }
}
