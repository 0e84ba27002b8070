mod common;

use hyperinit_core::differentiation::{stabilize, ExpectationCost, QfimFidelity, QfimMatrix};
use hyperinit_core::distributions::Prng;
use hyperinit_core::linalg::SquareMatrix;
use hyperinit_core::scoring::{omega_reduce, score, utility_shape, Omega, ScoreKind, ScoreSpec};
use hyperinit_core::simulator::build_hea;
use proptest::prelude::*;

use common::{random_observable, random_theta};

#[test]
fn five_rollout_utilities() {
    let u = utility_shape(&[0.2, -1.0, 7.0, 3.0, 0.5]).unwrap();
    assert_eq!(u, vec![-0.25, -0.5, 0.5, 0.25, 0.0]);
}

#[test]
fn utilities_sum_to_zero_for_every_population_size() {
    let mut rng = Prng::new(5);
    for n in 2..=64 {
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let u = utility_shape(&raw).unwrap();
        assert!(u.iter().sum::<f64>().abs() < 1e-12, "n={n}");
    }
}

proptest! {
    #[test]
    fn utilities_bounded_and_centered(raw in prop::collection::vec(-1e6f64..1e6, 2..80)) {
        let u = utility_shape(&raw).unwrap();
        prop_assert!(u.iter().sum::<f64>().abs() < 1e-12);
        prop_assert!(u.iter().all(|x| (-0.5..=0.5).contains(x)));
    }

    #[test]
    fn utilities_are_monotone(raw in prop::collection::vec(-100.0f64..100.0, 2..40)) {
        let u = utility_shape(&raw).unwrap();
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i] > raw[j] {
                    prop_assert!(u[i] > u[j]);
                }
            }
        }
    }

    #[test]
    fn utilities_follow_permutations(
        raw in prop::collection::hash_set(-1000i64..1000, 2..40),
        seed in any::<u64>(),
    ) {
        let raw: Vec<f64> = raw.into_iter().map(|x| x as f64).collect();
        let mut perm: Vec<usize> = (0..raw.len()).collect();
        Prng::new(seed).shuffle(&mut perm);
        let permuted: Vec<f64> = perm.iter().map(|&i| raw[i]).collect();
        let u = utility_shape(&raw).unwrap();
        let v = utility_shape(&permuted).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(v[k], u[i]);
        }
    }

    #[test]
    fn stabilized_trace_is_at_least_p_eps(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 6), 1..6),
        eps in 1e-8f64..1e-2,
    ) {
        // Gram matrix A A^T is PSD.
        let p = rows.len();
        let mut m = SquareMatrix::zeros(p);
        for i in 0..p {
            for j in 0..p {
                m.set(i, j, rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum());
            }
        }
        let f = QfimMatrix { matrix: m, fidelity: QfimFidelity::Exact };
        let s = stabilize(&f, eps).unwrap();
        prop_assert!(s.matrix.trace() >= p as f64 * eps * (1.0 - 1e-12));
        prop_assert!(omega_reduce(&f, Omega::Trace, eps, 1, 1.0).unwrap() >= p as f64 * eps * (1.0 - 1e-12));
    }
}

#[test]
fn s3_endpoints_on_random_circuits() {
    let mut rng = Prng::new(8);
    for omega in [Omega::Trace, Omega::LogDet, Omega::Harmonic] {
        for _ in 0..5 {
            let c = build_hea(2, 3).unwrap();
            let obs = random_observable(3, 2, &mut rng);
            let theta = random_theta(c.num_params(), &mut rng);
            let cost = ExpectationCost::new(c.clone(), obs).unwrap();
            let eval = |kind, w| {
                let spec = ScoreSpec { kind, omega, w, ..ScoreSpec::default() };
                score(&c, None, &theta, Some(&cost), &spec).unwrap().raw
            };
            assert_eq!(eval(ScoreKind::S3, 0.0), eval(ScoreKind::S1, 0.9));
            assert_eq!(eval(ScoreKind::S3, 1.0), eval(ScoreKind::S2, 0.9));
        }
    }
}
