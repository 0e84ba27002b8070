use std::f64::consts::PI;

use super::Prng;

/// One standard normal draw (Box-Muller, cosine branch).
pub fn standard_normal(rng: &mut Prng) -> f64 {
    let u1 = rng.next_open_f64();
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Fills `out` with standard normals, using both Box-Muller outputs.
pub fn fill_standard_normal(rng: &mut Prng, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let r = (-2.0 * rng.next_open_f64().ln()).sqrt();
        let (s, c) = (2.0 * PI * rng.next_f64()).sin_cos();
        pair[0] = r * c;
        pair[1] = r * s;
    }
    for x in chunks.into_remainder() {
        *x = standard_normal(rng);
    }
}

/// `ln X` for `X ~ Gamma(shape, 1)`, Marsaglia-Tsang squeeze method.
///
/// Shapes below one use `Gamma(a) = Gamma(a + 1) * U^(1/a)`; returning the log
/// keeps tiny shapes from underflowing to zero.
pub fn ln_gamma_variate(shape: f64, rng: &mut Prng) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let boost = rng.next_open_f64().ln() / shape;
        return ln_gamma_variate(shape + 1.0, rng) + boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.next_open_f64();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return (d * v).ln();
        }
    }
}

/// `B ~ Beta(alpha, beta)` as `X / (X + Y)` with independent Gamma draws.
pub fn beta_variate(alpha: f64, beta: f64, rng: &mut Prng) -> f64 {
    let lx = ln_gamma_variate(alpha, rng);
    let ly = ln_gamma_variate(beta, rng);
    // X / (X + Y) = 1 / (1 + exp(ln Y - ln X))
    1.0 / (1.0 + (ly - lx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn normal_moments() {
        let mut rng = Prng::new(11);
        let mut xs = vec![0.0; 100_001];
        fill_standard_normal(&mut rng, &mut xs);
        let (m, v) = mean_var(&xs);
        let se = (1.0 / xs.len() as f64).sqrt();
        assert!(m.abs() < 3.0 * se, "mean {m}");
        assert!((v - 1.0).abs() < 3.0 * (2.0 / xs.len() as f64).sqrt(), "var {v}");
    }

    #[test]
    fn gamma_mean_matches_shape() {
        for shape in [0.1, 0.7, 1.0, 2.5, 9.0] {
            let mut rng = Prng::new(5);
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| ln_gamma_variate(shape, &mut rng).exp()).collect();
            let (m, _) = mean_var(&xs);
            // Gamma(k, 1) has mean k and variance k
            let se = (shape / n as f64).sqrt();
            assert!((m - shape).abs() < 4.0 * se, "shape {shape}: mean {m}");
        }
    }

    #[test]
    fn beta_stays_in_unit_interval_for_small_shapes() {
        let mut rng = Prng::new(9);
        for _ in 0..10_000 {
            let b = beta_variate(0.05, 0.05, &mut rng);
            assert!((0.0..=1.0).contains(&b) && b.is_finite());
        }
    }
}
