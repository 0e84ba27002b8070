use hyperinit_core::distributions::{beta_variate, sample_params, Family, HyperParams, Prng};
use proptest::prelude::*;

const N: usize = 100_000;

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn gaussian_moments_within_three_standard_errors() {
    for (k, (mu, sigma)) in [(0.0, 1.0), (0.3, 0.7), (-2.0, 0.05)].into_iter().enumerate() {
        let hp = HyperParams::gaussian(mu, sigma).unwrap();
        let xs = sample_params(&hp, N, &mut Prng::new(100 + k as u64)).unwrap();
        let (m, s) = mean_std(&xs);
        let n = N as f64;
        assert!((m - mu).abs() < 3.0 * sigma / n.sqrt(), "mean {m} vs {mu}");
        assert!((s - sigma).abs() < 3.0 * sigma / (2.0 * n).sqrt(), "std {s} vs {sigma}");
    }
}

#[test]
fn beta_mean_within_three_standard_errors() {
    for (k, (a, b)) in [(1.0, 1.0), (0.1, 1.5), (2.0, 5.0), (0.5, 0.5)].into_iter().enumerate() {
        let mut rng = Prng::new(200 + k as u64);
        let xs: Vec<f64> = (0..N).map(|_| beta_variate(a, b, &mut rng)).collect();
        let mean = a / (a + b);
        let var = a * b / ((a + b).powi(2) * (a + b + 1.0));
        let (m, _) = mean_std(&xs);
        assert!((m - mean).abs() < 3.0 * (var / N as f64).sqrt(), "Beta({a},{b}) mean {m} vs {mean}");
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

proptest! {
    #[test]
    fn constrained_values_stay_positive(
        steps in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..20),
    ) {
        for family in [Family::Beta, Family::Gaussian] {
            let mut lambda = [0.0, 0.0];
            for (da, db) in &steps {
                lambda[0] += da;
                lambda[1] += db;
                let clamped = [lambda[0].clamp(-600.0, 600.0), lambda[1].clamp(-600.0, 600.0)];
                if let Ok(hp) = HyperParams::from_unconstrained(family, &clamped) {
                    let v = hp.values();
                    match family {
                        Family::Beta => prop_assert!(v[0] > 0.0 && v[1] > 0.0),
                        Family::Gaussian => prop_assert!(v[1] > 0.0),
                    }
                }
            }
        }
    }

    #[test]
    fn unconstrained_round_trip(a in 0.01f64..50.0, b in 0.01f64..50.0, mu in -5.0f64..5.0) {
        let hp = HyperParams::beta(a, b).unwrap();
        let back = HyperParams::from_unconstrained(Family::Beta, &hp.to_unconstrained()).unwrap();
        prop_assert!((back.values()[0] - a).abs() < 1e-12 * a && (back.values()[1] - b).abs() < 1e-12 * b);
        let hp = HyperParams::gaussian(mu, b).unwrap();
        let back = HyperParams::from_unconstrained(Family::Gaussian, &hp.to_unconstrained()).unwrap();
        prop_assert!((back.values()[0] - mu).abs() < 1e-12 && (back.values()[1] - b).abs() < 1e-12 * b);
    }

    #[test]
    fn equal_seeds_give_identical_samples(seed in any::<u64>(), p in 1usize..64) {
        for hp in [HyperParams::beta(0.4, 2.0).unwrap(), HyperParams::gaussian(0.1, 0.9).unwrap()] {
            let x = sample_params(&hp, p, &mut Prng::new(seed)).unwrap();
            let y = sample_params(&hp, p, &mut Prng::new(seed)).unwrap();
            prop_assert_eq!(x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }
}
