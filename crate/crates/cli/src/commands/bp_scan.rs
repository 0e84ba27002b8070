use std::collections::BTreeMap;

use anyhow::{bail, Result};
use hyperinit_core::differentiation::{partial_derivative, CostFunction, ExpectationCost, Gradient, ZeroProjectorCost};
use hyperinit_core::distributions::{sample_params_scaled, HyperParams, Prng};
use hyperinit_core::scoring::score;
use hyperinit_core::simulator::{Circuit, Observable};
use rayon::prelude::*;
use serde::Serialize;

use super::{build_ansatz, expand_methods, fmt_f64, initial_guess, resolve, Output, STREAM_SCAN};
use crate::config::{AnsatzKind, RunConfig, ScanObservable};
use crate::record::Table;

#[derive(Debug, Serialize)]
struct ScanRow {
    qubits: usize,
    method: String,
    hyperparams: HyperParams,
    /// Sample variance of `dC/dtheta_0` over the draws.
    variance: f64,
    mean: f64,
    search_iterations: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Slope {
    method: String,
    /// Least-squares slope of `ln variance` against the qubit count.
    slope: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ScanResults {
    observable: ScanObservable,
    layers: usize,
    samples: usize,
    rows: Vec<ScanRow>,
    slopes: Vec<Slope>,
}

/// Slope of the least-squares line through `(x, y)`; `None` for fewer than
/// two distinct `x` or any non-finite `y`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(_, y)| !y.is_finite()) {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

enum ScanCost {
    Projector(ZeroProjectorCost),
    Pauli(ExpectationCost),
}

impl ScanCost {
    fn new(kind: ScanObservable, circuit: Circuit) -> Result<Self> {
        Ok(match kind {
            ScanObservable::ZeroProjector => ScanCost::Projector(ZeroProjectorCost { circuit }),
            ScanObservable::Z0z1 => {
                let n = circuit.num_qubits();
                ScanCost::Pauli(ExpectationCost::new(circuit, Observable::z_product(n, &[0, 1])?)?)
            }
        })
    }

    fn circuit(&self) -> &Circuit {
        match self {
            ScanCost::Projector(c) => &c.circuit,
            ScanCost::Pauli(c) => &c.circuit,
        }
    }

    fn first_partial(&self, theta: &[f64]) -> hyperinit_core::Result<f64> {
        match self {
            ScanCost::Projector(c) => c.partial(theta, 0),
            ScanCost::Pauli(c) => partial_derivative(&c.circuit, theta, None, &c.observable, 0),
        }
    }
}

impl CostFunction for ScanCost {
    fn num_params(&self) -> usize {
        self.circuit().num_params()
    }

    fn value(&self, theta: &[f64]) -> hyperinit_core::Result<f64> {
        match self {
            ScanCost::Projector(c) => c.value(theta),
            ScanCost::Pauli(c) => c.value(theta),
        }
    }

    fn gradient(&self, theta: &[f64]) -> hyperinit_core::Result<Gradient> {
        match self {
            ScanCost::Projector(c) => c.gradient(theta),
            ScanCost::Pauli(c) => c.gradient(theta),
        }
    }
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Gradient variance of the first parameter against register size for a
/// layered two-design ansatz.
pub fn cmd_bp_scan(cfg: &RunConfig) -> Result<Output> {
    let bp = &cfg.bp_scan;
    if let Some(&n) = bp.qubits.iter().find(|&&n| n < 2) {
        bail!("bp_scan.qubits entries must be >= 2, got {n}");
    }
    let hp0 = initial_guess(cfg)?;
    let specs = expand_methods(&bp.methods, &cfg.score, &bp.omegas);

    let mut rows = Vec::new();
    let mut table = Table::new("bp_table", &["qubits", "method", "variance"]);
    for &n in &bp.qubits {
        let circuit = build_ansatz(AnsatzKind::TwoDesign, bp.layers, n, cfg.seed)?;
        let cost = ScanCost::new(bp.observable, circuit)?;
        let p = cost.num_params();
        for spec in &specs {
            let label = spec.label();
            let resolved = resolve(spec, cfg, &hp0, p, &[n as u64], |s, theta| {
                Ok(score(cost.circuit(), None, theta, Some(&cost), s)?.raw)
            })?;
            let hp = resolved.hyperparams;
            let derivs: Vec<f64> = (0..bp.samples)
                .into_par_iter()
                .map(|m| {
                    let mut rng = Prng::derive(cfg.seed, &[STREAM_SCAN, n as u64, m as u64]);
                    let theta = sample_params_scaled(&hp, p, cfg.distribution.beta_scale, &mut rng)?;
                    cost.first_partial(&theta)
                })
                .collect::<hyperinit_core::Result<_>>()?;
            let (mean, variance) = mean_and_variance(&derivs);
            table.push(vec![n.to_string(), label.clone(), fmt_f64(variance)]);
            rows.push(ScanRow {
                qubits: n,
                method: label,
                hyperparams: hp,
                variance,
                mean,
                search_iterations: resolved.search.map(|t| t.iterations.len()),
            });
        }
    }

    let mut by_method: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        by_method
            .entry(r.method.clone())
            .or_default()
            .push((r.qubits as f64, r.variance.ln()));
    }
    let slopes = specs
        .iter()
        .map(|s| {
            let method = s.label();
            let slope = least_squares_slope(&by_method[&method]);
            Slope { method, slope }
        })
        .collect();
    let results = ScanResults {
        observable: bp.observable,
        layers: bp.layers,
        samples: bp.samples,
        rows,
        slopes,
    };
    Ok(Output {
        results: serde_json::to_value(results)?,
        tables: vec![table],
    })
}
