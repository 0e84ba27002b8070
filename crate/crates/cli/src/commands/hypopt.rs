use anyhow::{bail, Result};
use hyperinit_core::distributions::HyperParams;
use hyperinit_core::es::EsTrace;
use serde::Serialize;

use super::{es_trace_table, initial_guess, qml_theta_score, resolve, setup_qml, setup_vqe, vqe_theta_score, MethodSpec, Output};
use crate::config::{HypoptTask, Method, RunConfig};
use crate::record::Table;

#[derive(Debug, Serialize)]
struct HypoptResults {
    task: HypoptTask,
    score: String,
    num_params: usize,
    initial: HyperParams,
    lambda_star: HyperParams,
    converged: bool,
    trace: EsTrace,
}

/// One hyperparameter search with the configured score.
pub fn cmd_hypopt(cfg: &RunConfig) -> Result<Output> {
    let method = match cfg.score.kind {
        hyperinit_core::scoring::ScoreKind::S1 => Method::S1,
        hyperinit_core::scoring::ScoreKind::S2 => Method::S2,
        hyperinit_core::scoring::ScoreKind::S3 => Method::S3,
    };
    let spec = MethodSpec {
        method,
        score: Some(cfg.score.clone()),
    };
    let hp0 = initial_guess(cfg)?;
    let resolved = match cfg.hypopt.task {
        HypoptTask::Vqe => {
            let task = setup_vqe(cfg)?;
            let p = task.circuit.num_params();
            (p, resolve(&spec, cfg, &hp0, p, &[], |s, theta| vqe_theta_score(&task, s, theta))?)
        }
        HypoptTask::Qml => {
            let setup = setup_qml(cfg)?;
            let p = setup.task.circuit.num_params();
            (p, resolve(&spec, cfg, &hp0, p, &[], |s, theta| qml_theta_score(&setup, s, theta))?)
        }
    };
    let (num_params, resolved) = resolved;
    let Some(trace) = resolved.search else {
        bail!("score method produced no search trace");
    };
    let table: Table = es_trace_table("es_trace", cfg.distribution.family.param_names(), &trace);
    let results = HypoptResults {
        task: cfg.hypopt.task,
        score: spec.label(),
        num_params,
        initial: hp0,
        lambda_star: resolved.hyperparams,
        converged: trace.converged,
        trace,
    };
    Ok(Output {
        results: serde_json::to_value(results)?,
        tables: vec![table],
    })
}
