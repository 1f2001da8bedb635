use hqs_core::mixing::predicted_bound;
use hqs_core::quantum::random::{random_channel, random_density, random_operator};
use hqs_core::quantum::{DenseOperator, Pauli, PauliString, QubitId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(i: usize) -> QubitId {
    QubitId::bath(i)
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(pauli(), n).prop_map(|ps| PauliString::new(ps.into_iter().enumerate().map(|(i, p)| (q(i), p))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channels_preserve_trace_and_agree_with_dual(seed in any::<u64>(), kraus in 2usize..6) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(&[q(0), q(1)], &[q(2)], kraus, &mut r);
        prop_assert!(ch.completeness_error() < 1e-10);
        let rho = random_density(&[q(0), q(1)], &mut r);
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.as_operator().trace().re - 1.0).abs() < 1e-10);
        let o = DenseOperator::new(vec![q(2)], random_operator(2, &mut r)).unwrap();
        let lhs = out.expectation(&o).unwrap();
        let rhs = rho.expectation(&ch.dual().apply(&o).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
        prop_assert!(ch.dual().unitality_error() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(&[q(0)], &mut r);
        let b = random_density(&[q(1), q(2)], &mut r);
        let back = a.tensor(&b).partial_trace(&[q(0)]).unwrap();
        prop_assert!((back.matrix() - a.matrix()).norm() < 1e-12);
    }

    #[test]
    fn pauli_commutation_is_symmetric_and_matches_matrices(a in pauli_string(3), b in pauli_string(3)) {
        prop_assert_eq!(a.commutes_with(&b), b.commutes_with(&a));
        let support = [q(0), q(1), q(2)];
        let (ma, mb) = (a.to_operator_on(&support).unwrap(), b.to_operator_on(&support).unwrap());
        let comm = ma.mul(&mb).sub(&mb.mul(&ma));
        prop_assert_eq!(a.commutes_with(&b), comm.matrix().norm() < 1e-12);
        let sq = ma.mul(&ma);
        prop_assert!((sq.matrix() - DenseOperator::identity(support.to_vec()).matrix()).norm() < 1e-12);
    }

    #[test]
    fn bound_grows_with_rows_and_with_small_epsilon(eps in 1e-8f64..0.1, rows in 1usize..50, delta in 0.0f64..1.0, c in 0.1f64..10.0) {
        let b = predicted_bound(eps, rows, delta, c, 1.0).unwrap();
        prop_assert!(b >= 0.0);
        prop_assert!(predicted_bound(eps, rows + 1, delta, c, 1.0).unwrap() >= b);
        prop_assert!((predicted_bound(eps, rows, delta, 2.0 * c, 1.0).unwrap() - 2.0 * b).abs() <= 1e-12 * b.max(1.0));
        // eps ln^2 eps increases below e^-2
        prop_assert!(predicted_bound(eps * 1.1, rows, delta, c, 1.0).unwrap() >= b);
    }
}
