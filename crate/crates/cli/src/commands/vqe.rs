use anyhow::Result;
use hyperinit_core::differentiation::CostFunction;
use hyperinit_core::distributions::HyperParams;
use hyperinit_core::es::EsTrace;
use hyperinit_core::tasks::train;
use serde::Serialize;

use super::{
    es_trace_table, expand_methods, fmt_f64, initial_guess, resolve, sample_theta0, setup_vqe, slug, vqe_theta_score,
    Output,
};
use crate::config::RunConfig;
use crate::record::Table;

#[derive(Debug, Serialize)]
struct VqeMethod {
    method: String,
    hyperparams: HyperParams,
    search: Option<EsTrace>,
    curve: Vec<f64>,
    final_energy: f64,
    final_gap: f64,
    /// First iteration whose gap is below the threshold.
    iters_to_threshold: Option<usize>,
}

#[derive(Debug, Serialize)]
struct VqeResults {
    hamiltonian: String,
    num_qubits: usize,
    num_params: usize,
    exact_ground_energy: f64,
    gap_threshold: f64,
    methods: Vec<VqeMethod>,
}

/// Searches hyperparameters per method, trains from one draw of each, and
/// tracks the energy gap to the dense ground energy.
pub fn cmd_vqe(cfg: &RunConfig) -> Result<Output> {
    let task = setup_vqe(cfg)?;
    let p = task.num_params();
    let hp0 = initial_guess(cfg)?;
    let e0 = task.exact_ground_energy;
    let names = cfg.distribution.family.param_names();

    let mut curves = Table::new("training_curve", &["iter", "cost", "method"]);
    let mut tables = Vec::new();
    let mut methods = Vec::new();
    for spec in expand_methods(&cfg.vqe.methods, &cfg.score, &[cfg.score.omega]) {
        let label = spec.label();
        let resolved = resolve(&spec, cfg, &hp0, p, &[], |s, theta| vqe_theta_score(&task, s, theta))?;
        let theta0 = sample_theta0(cfg, &resolved.hyperparams, p, &[])?;
        let run = train(&task, &theta0, cfg.train.iters, cfg.train.lr)?;
        for (k, c) in run.curve.iter().enumerate() {
            curves.push(vec![k.to_string(), fmt_f64(*c), label.clone()]);
        }
        if let Some(trace) = &resolved.search {
            tables.push(es_trace_table(&format!("es_trace_{}", slug(&label)), names, trace));
        }
        let final_energy = *run.curve.last().expect("curve is never empty");
        methods.push(VqeMethod {
            iters_to_threshold: run.curve.iter().position(|c| c - e0 < cfg.vqe.gap_threshold),
            method: label,
            hyperparams: resolved.hyperparams,
            search: resolved.search,
            final_gap: final_energy - e0,
            final_energy,
            curve: run.curve,
        });
    }
    tables.insert(0, curves);
    let results = VqeResults {
        hamiltonian: cfg.vqe.hamiltonian.display().to_string(),
        num_qubits: task.hamiltonian.num_qubits(),
        num_params: p,
        exact_ground_energy: e0,
        gap_threshold: cfg.vqe.gap_threshold,
        methods,
    };
    Ok(Output {
        results: serde_json::to_value(results)?,
        tables,
    })
}
