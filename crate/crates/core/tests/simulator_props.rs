mod common;

use hyperinit_core::distributions::Prng;
use hyperinit_core::simulator::{
    apply_circuit, build_hea, build_strongly_entangling, build_two_design, expectation, Axis, Observable, StateVector,
};
use num_complex::Complex64;
use proptest::prelude::*;

use common::{random_circuit, random_theta};

fn random_state(qubits: usize, rng: &mut Prng) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << qubits)
        .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_preserved(seed in any::<u64>(), qubits in 1usize..=10, depth in 0usize..40) {
        let mut rng = Prng::new(seed);
        let c = random_circuit(qubits, depth, &mut rng);
        let theta = random_theta(c.num_params(), &mut rng);
        let psi = apply_circuit(&c, &theta, None).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotations_invert(seed in any::<u64>(), qubits in 1usize..=5, angle in -10.0f64..10.0) {
        let mut rng = Prng::new(seed);
        let start = random_state(qubits, &mut rng);
        let target = rng.below(qubits as u64) as usize;
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut s = start.clone();
            s.apply_rotation(axis, target, angle);
            s.apply_rotation(axis, target, -angle);
            prop_assert!(max_diff(&s, &start) < 1e-10);
        }
    }

    #[test]
    fn entanglers_are_involutions(seed in any::<u64>(), qubits in 2usize..=5) {
        let mut rng = Prng::new(seed);
        let start = random_state(qubits, &mut rng);
        let a = rng.below(qubits as u64) as usize;
        let b = (a + 1 + rng.below(qubits as u64 - 1) as usize) % qubits;
        let mut s = start.clone();
        s.apply_cnot(a, b);
        s.apply_cnot(a, b);
        prop_assert!(max_diff(&s, &start) < 1e-10);
        s.apply_cz(a, b);
        s.apply_cz(a, b);
        prop_assert!(max_diff(&s, &start) < 1e-10);
    }

    #[test]
    fn identity_expectation_is_one(seed in any::<u64>(), qubits in 1usize..=6) {
        let mut rng = Prng::new(seed);
        let s = random_state(qubits, &mut rng);
        let id = Observable::from_words([(1.0, "I".repeat(qubits).as_str())]).unwrap();
        prop_assert!((expectation(&s, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn builders_are_pure(layers in 1usize..5, qubits in 2usize..6, seed in any::<u64>()) {
        prop_assert_eq!(build_hea(layers, qubits).unwrap(), build_hea(layers, qubits).unwrap());
        prop_assert_eq!(
            build_strongly_entangling(layers, qubits).unwrap(),
            build_strongly_entangling(layers, qubits).unwrap()
        );
        prop_assert_eq!(build_two_design(layers, qubits, seed).unwrap(), build_two_design(layers, qubits, seed).unwrap());
    }
}

#[test]
fn controlled_gates_on_every_basis_state() {
    for q in 2..=3usize {
        for c in 0..q {
            for t in (0..q).filter(|&t| t != c) {
                for idx in 0..1usize << q {
                    let bit = |i: usize, k: usize| (i >> (q - 1 - k)) & 1;
                    let mut s = StateVector::basis(q, idx);
                    s.apply_cnot(c, t);
                    let flipped = if bit(idx, c) == 1 { idx ^ (1 << (q - 1 - t)) } else { idx };
                    assert_eq!(s, StateVector::basis(q, flipped), "CNOT q={q} c={c} t={t} idx={idx}");

                    let mut s = StateVector::basis(q, idx);
                    s.apply_cz(c, t);
                    let sign = if bit(idx, c) == 1 && bit(idx, t) == 1 { -1.0 } else { 1.0 };
                    assert_eq!(s.amplitudes()[idx], Complex64::new(sign, 0.0));
                    assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
                }
            }
        }
    }
}
