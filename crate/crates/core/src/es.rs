//! Evolution-strategies search over distribution hyperparameters.
//!
//! Each iteration draws a perturbation matrix `Gamma` (`N_s x |lambda|`),
//! scores the perturbed points `lambda + sigma * eps_j`, optionally replaces
//! the scores by rank utilities, and ascends along
//! `grad = (1 / (N_s sigma)) zeta^T Gamma`. All updates happen in the
//! unconstrained parameterization.
//!
//! Rollout `j` of iteration `i` draws from the child stream
//! `(seed, ROLLOUT, i, j)` and results are reduced in rollout order, so a run
//! is bit-identical regardless of how many threads evaluate the rollouts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{fill_standard_normal, sample_params_scaled, Family, HyperParams, Prng};
use crate::error::{Error, Result};
use crate::scoring::utility_shape;

const STREAM_PERTURB: u64 = 0x9e4a_0001;
const STREAM_ROLLOUT: u64 = 0x9e4a_0002;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsConfig {
    /// Learning rate of the ascent step.
    pub eta: f64,
    /// Perturbation scale.
    pub sigma: f64,
    pub n_samples: usize,
    pub n_iters: usize,
    /// Stop once `||lambda_{i+1} - lambda_i||_1` drops to this value.
    pub eps_converge: f64,
    pub antithetic: bool,
    pub use_utility: bool,
    /// Parameter draws averaged per rollout.
    pub theta_draws: usize,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            eta: 0.05,
            sigma: 0.1,
            n_samples: 16,
            n_iters: 50,
            eps_converge: 1e-3,
            antithetic: true,
            use_utility: true,
            theta_draws: 1,
        }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta={} must be positive", self.eta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma={} must be positive", self.sigma));
        }
        if self.n_samples < 2 {
            return bad(format!("n_samples={} must be >= 2", self.n_samples));
        }
        if self.antithetic && !self.n_samples.is_multiple_of(2) {
            return bad(format!("antithetic sampling needs an even n_samples, got {}", self.n_samples));
        }
        if !(self.eps_converge > 0.0) {
            return bad(format!("eps_converge={} must be positive", self.eps_converge));
        }
        if self.theta_draws < 1 {
            return bad("theta_draws must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsIteration {
    pub iter: usize,
    /// Unconstrained hyperparameters after this iteration's update.
    pub lambda: Vec<f64>,
    /// The same point in the constrained parameterization.
    pub constrained: Vec<f64>,
    pub mean_score: f64,
    pub best_score: f64,
    pub delta_l1: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EsTrace {
    pub iterations: Vec<EsIteration>,
    pub converged: bool,
}

/// Black-box objective for [`es_optimize`].
pub trait EsObjective: Sync {
    fn dim(&self) -> usize;

    /// Score at unconstrained point `lambda`; `rng` is this rollout's stream.
    fn evaluate(&self, lambda: &[f64], rng: &mut Prng) -> Result<f64>;

    /// Constrained view used for the trace.
    fn constrained(&self, lambda: &[f64]) -> Vec<f64> {
        lambda.to_vec()
    }
}

/// Adapts a closure `(lambda, rng) -> score` into an [`EsObjective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64], &mut Prng) -> Result<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> EsObjective for FnObjective<F>
where
    F: Fn(&[f64], &mut Prng) -> Result<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, lambda: &[f64], rng: &mut Prng) -> Result<f64> {
        (self.f)(lambda, rng)
    }
}

/// Standard-normal perturbations, one row per rollout. In antithetic mode
/// the second half of the rows is the negation of the first half.
pub fn perturbation_matrix(n_samples: usize, dim: usize, antithetic: bool, rng: &mut Prng) -> Result<Vec<Vec<f64>>> {
    if n_samples == 0 || dim == 0 {
        return Err(Error::InvalidArgument("perturbation matrix needs non-zero dimensions".into()));
    }
    if antithetic && !n_samples.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "antithetic sampling needs an even sample count, got {n_samples}"
        )));
    }
    let drawn = if antithetic { n_samples / 2 } else { n_samples };
    let mut flat = vec![0.0; drawn * dim];
    fill_standard_normal(rng, &mut flat);
    let mut rows: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
    if antithetic {
        let mirrored: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        rows.extend(mirrored);
    }
    Ok(rows)
}

/// Search-gradient estimate `(1 / (N sigma)) zeta^T Gamma`. With antithetic
/// rows it is evaluated pairwise as `sum_j (zeta_j - zeta_{j+h}) eps_j`, which
/// is exactly zero when paired scores are equal.
pub fn search_gradient(zeta: &[f64], gamma: &[Vec<f64>], sigma: f64, antithetic: bool) -> Vec<f64> {
    let n = zeta.len();
    let dim = gamma[0].len();
    let mut g = vec![0.0; dim];
    if antithetic {
        let h = n / 2;
        for j in 0..h {
            let diff = zeta[j] - zeta[j + h];
            for (gd, e) in g.iter_mut().zip(&gamma[j]) {
                *gd += diff * e;
            }
        }
    } else {
        for (z, row) in zeta.iter().zip(gamma) {
            for (gd, e) in g.iter_mut().zip(row) {
                *gd += z * e;
            }
        }
    }
    let scale = 1.0 / (n as f64 * sigma);
    g.iter_mut().for_each(|x| *x *= scale);
    g
}

#[derive(Debug, Clone)]
pub struct EsOutcome {
    pub lambda: Vec<f64>,
    pub trace: EsTrace,
}

pub fn es_optimize(objective: &dyn EsObjective, lambda0: &[f64], cfg: &EsConfig, seed: u64) -> Result<EsOutcome> {
    cfg.validate()?;
    if lambda0.len() != objective.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial point has {} entries, objective expects {}",
            lambda0.len(),
            objective.dim()
        )));
    }
    let mut lambda = lambda0.to_vec();
    let mut trace = EsTrace::default();

    for i in 0..cfg.n_iters {
        let mut rng = Prng::derive(seed, &[STREAM_PERTURB, i as u64]);
        let gamma = perturbation_matrix(cfg.n_samples, lambda.len(), cfg.antithetic, &mut rng)?;

        let raw: Vec<f64> = gamma
            .par_iter()
            .enumerate()
            .map(|(j, eps)| {
                let point: Vec<f64> = lambda.iter().zip(eps).map(|(l, e)| l + cfg.sigma * e).collect();
                let mut rng = Prng::derive(seed, &[STREAM_ROLLOUT, i as u64, j as u64]);
                objective
                    .evaluate(&point, &mut rng)
                    .map_err(|e| Error::Rollout {
                        iteration: i,
                        rollout: j,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;

        let zeta = if cfg.use_utility { utility_shape(&raw)? } else { raw.clone() };
        let grad = search_gradient(&zeta, &gamma, cfg.sigma, cfg.antithetic);
        let step: Vec<f64> = grad.iter().map(|g| cfg.eta * g).collect();
        if step.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteUpdate(i));
        }
        lambda.iter_mut().zip(&step).for_each(|(l, s)| *l += s);
        let delta_l1: f64 = step.iter().map(|s| s.abs()).sum();

        trace.iterations.push(EsIteration {
            iter: i,
            lambda: lambda.clone(),
            constrained: objective.constrained(&lambda),
            mean_score: raw.iter().sum::<f64>() / raw.len() as f64,
            best_score: raw.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            delta_l1,
        });
        if delta_l1 <= cfg.eps_converge {
            trace.converged = true;
            break;
        }
    }
    Ok(EsOutcome { lambda, trace })
}

/// Scores hyperparameters by sampling circuit parameters from `p(theta | lambda)`
/// and averaging `theta_score` over `theta_draws` draws.
pub struct HyperParamObjective<F> {
    pub family: Family,
    pub num_params: usize,
    pub beta_scale: f64,
    pub theta_draws: usize,
    pub theta_score: F,
}

impl<F> EsObjective for HyperParamObjective<F>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn dim(&self) -> usize {
        2
    }

    fn evaluate(&self, lambda: &[f64], rng: &mut Prng) -> Result<f64> {
        let hp = HyperParams::from_unconstrained(self.family, lambda)?;
        let mut total = 0.0;
        for _ in 0..self.theta_draws {
            let theta = sample_params_scaled(&hp, self.num_params, self.beta_scale, rng)?;
            total += (self.theta_score)(&theta)?;
        }
        Ok(total / self.theta_draws as f64)
    }

    fn constrained(&self, lambda: &[f64]) -> Vec<f64> {
        HyperParams::from_unconstrained(self.family, lambda)
            .map(|hp| hp.values().to_vec())
            .unwrap_or_else(|_| vec![f64::NAN; lambda.len()])
    }
}

/// Runs the search from `hp0` and returns the constrained optimum.
pub fn optimize_hyperparams<F>(
    theta_score: F,
    num_params: usize,
    beta_scale: f64,
    hp0: &HyperParams,
    cfg: &EsConfig,
    seed: u64,
) -> Result<(HyperParams, EsTrace)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let objective = HyperParamObjective {
        family: hp0.family(),
        num_params,
        beta_scale,
        theta_draws: cfg.theta_draws,
        theta_score,
    };
    let out = es_optimize(&objective, &hp0.to_unconstrained(), cfg, seed)?;
    let hp = HyperParams::from_unconstrained(hp0.family(), &out.lambda)?;
    Ok((hp, out.trace))
}
