//! Initializing distributions `p(theta | lambda)` and their hyperparameters.
//!
//! Hyperparameters are searched in an unconstrained space: Beta uses
//! `(ln alpha, ln beta)`, Gaussian uses `(mu, ln sigma)`. Positivity of the
//! shape and scale parameters therefore holds after any update.

mod prng;
mod sampling;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use prng::Prng;
pub use sampling::{beta_variate, fill_standard_normal, ln_gamma_variate, standard_normal};

use crate::error::{Error, Result};

/// Default support scaling for Beta draws: one full rotation period.
pub const DEFAULT_BETA_SCALE: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Beta,
    Gaussian,
}

impl Family {
    pub fn param_names(self) -> [&'static str; 2] {
        match self {
            Family::Beta => ["alpha", "beta"],
            Family::Gaussian => ["mu", "sigma"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Beta => "beta",
            Family::Gaussian => "gaussian",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Family::Beta),
            "gaussian" => Ok(Family::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown distribution family {other:?}"))),
        }
    }
}

/// Hyperparameters of an initializing distribution, held in both the
/// constrained (`values`) and unconstrained (`internal`) views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperParams {
    family: Family,
    values: [f64; 2],
    internal: [f64; 2],
}

impl HyperParams {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "Beta needs alpha, beta > 0 (got {alpha}, {beta})"
            )));
        }
        Ok(Self {
            family: Family::Beta,
            values: [alpha, beta],
            internal: [alpha.ln(), beta.ln()],
        })
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "Gaussian needs finite mu and sigma > 0 (got {mu}, {sigma})"
            )));
        }
        Ok(Self {
            family: Family::Gaussian,
            values: [mu, sigma],
            internal: [mu, sigma.ln()],
        })
    }

    pub fn new(family: Family, values: [f64; 2]) -> Result<Self> {
        match family {
            Family::Beta => Self::beta(values[0], values[1]),
            Family::Gaussian => Self::gaussian(values[0], values[1]),
        }
    }

    pub fn from_unconstrained(family: Family, internal: &[f64]) -> Result<Self> {
        let &[a, b] = internal else {
            return Err(Error::InvalidHyperParams(format!(
                "expected 2 unconstrained values, got {}",
                internal.len()
            )));
        };
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidHyperParams(format!(
                "non-finite unconstrained values ({a}, {b})"
            )));
        }
        let values = match family {
            Family::Beta => [a.exp(), b.exp()],
            Family::Gaussian => [a, b.exp()],
        };
        if values.iter().any(|v| !v.is_finite()) || values[1] <= 0.0 || (family == Family::Beta && values[0] <= 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "unconstrained values ({a}, {b}) map outside the valid range"
            )));
        }
        Ok(Self {
            family,
            values,
            internal: [a, b],
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Constrained values: `(alpha, beta)` or `(mu, sigma)`.
    pub fn values(&self) -> [f64; 2] {
        self.values
    }

    pub fn to_unconstrained(&self) -> Vec<f64> {
        self.internal.to_vec()
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.family.param_names();
        write!(f, "{}({a}={}, {b}={})", self.family, self.values[0], self.values[1])
    }
}

/// Draws `p` parameters from `p(theta | hp)` with Beta draws scaled by
/// [`DEFAULT_BETA_SCALE`].
pub fn sample_params(hp: &HyperParams, p: usize, rng: &mut Prng) -> Result<Vec<f64>> {
    sample_params_scaled(hp, p, DEFAULT_BETA_SCALE, rng)
}

/// As [`sample_params`] with an explicit Beta support scale.
pub fn sample_params_scaled(hp: &HyperParams, p: usize, beta_scale: f64, rng: &mut Prng) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("cannot sample an empty parameter vector".into()));
    }
    let [a, b] = hp.values;
    match hp.family {
        Family::Gaussian => {
            let mut out = vec![0.0; p];
            fill_standard_normal(rng, &mut out);
            for x in &mut out {
                *x = a + b * *x;
            }
            Ok(out)
        }
        Family::Beta => Ok((0..p).map(|_| beta_scale * beta_variate(a, b, rng)).collect()),
    }
}

/// Random starting point for the search: `mu ~ U(0.1, 0.5)`,
/// `sigma ~ U(0.5, 1.0)` for Gaussian; `ln alpha, ln beta ~ ln U(1, 5)` for Beta.
pub fn init_guess(family: Family, rng: &mut Prng) -> HyperParams {
    let hp = match family {
        Family::Gaussian => {
            let mu = rng.uniform(0.1, 0.5);
            let sigma = rng.uniform(0.5, 1.0);
            HyperParams::gaussian(mu, sigma)
        }
        Family::Beta => {
            let la = rng.uniform(1.0, 5.0).ln();
            let lb = rng.uniform(1.0, 5.0).ln();
            HyperParams::from_unconstrained(Family::Beta, &[la, lb])
        }
    };
    hp.expect("guess ranges are always valid")
}

/// Hand-picked reference hyperparameters: Beta(0.1, 1.5) and N(0, 1).
pub fn manual_baseline(family: Family) -> HyperParams {
    match family {
        Family::Beta => HyperParams::beta(0.1, 1.5),
        Family::Gaussian => HyperParams::gaussian(0.0, 1.0),
    }
    .expect("baseline constants are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn unconstrained_examples() {
        assert_eq!(HyperParams::beta(1.0, 1.0).unwrap().to_unconstrained(), vec![0.0, 0.0]);
        assert_eq!(HyperParams::gaussian(0.0, 1.0).unwrap().to_unconstrained(), vec![0.0, 0.0]);
        let u = HyperParams::beta(E, E * E).unwrap().to_unconstrained();
        assert!((u[0] - 1.0).abs() < 1e-15 && (u[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        for hp in [manual_baseline(Family::Beta), manual_baseline(Family::Gaussian)] {
            let back = HyperParams::from_unconstrained(hp.family(), &hp.to_unconstrained()).unwrap();
            for (x, y) in hp.values().iter().zip(back.values()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(HyperParams::beta(0.0, 1.0).is_err());
        assert!(HyperParams::beta(1.0, -1.0).is_err());
        assert!(HyperParams::gaussian(0.0, 0.0).is_err());
        assert!(HyperParams::gaussian(f64::NAN, 1.0).is_err());
        assert!(HyperParams::from_unconstrained(Family::Beta, &[f64::INFINITY, 0.0]).is_err());
        assert!(HyperParams::from_unconstrained(Family::Beta, &[0.0]).is_err());
        let mut rng = Prng::new(0);
        let hp = manual_baseline(Family::Beta);
        assert!(sample_params(&hp, 0, &mut rng).is_err());
    }

    #[test]
    fn manual_baselines() {
        assert_eq!(manual_baseline(Family::Beta).values(), [0.1, 1.5]);
        assert_eq!(manual_baseline(Family::Gaussian).values(), [0.0, 1.0]);
    }

    #[test]
    fn degenerate_gaussian() {
        let hp = HyperParams::gaussian(0.3, 1e-9).unwrap();
        let xs = sample_params(&hp, 4, &mut Prng::new(1)).unwrap();
        assert!(xs.iter().all(|x| (x - 0.3).abs() < 1e-7));
    }

    #[test]
    fn beta_means() {
        for (a, b, tol) in [(1.0, 1.0, 0.01), (0.1, 1.5, 0.005)] {
            let hp = HyperParams::beta(a, b).unwrap();
            let xs = sample_params_scaled(&hp, 100_000, 1.0, &mut Prng::new(21)).unwrap();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            assert!((m - a / (a + b)).abs() < tol, "Beta({a},{b}) mean {m}");
        }
    }

    #[test]
    fn guesses_in_range() {
        for seed in 0..200 {
            let g = init_guess(Family::Gaussian, &mut Prng::new(seed));
            let [mu, sigma] = g.values();
            assert!((0.1..=0.5).contains(&mu) && (0.5..=1.0).contains(&sigma));
            let b = init_guess(Family::Beta, &mut Prng::new(seed));
            assert!(b.to_unconstrained().iter().all(|u| (0.0..=5f64.ln()).contains(u)));
        }
        assert_eq!(
            init_guess(Family::Beta, &mut Prng::new(8)),
            init_guess(Family::Beta, &mut Prng::new(8))
        );
    }
}
