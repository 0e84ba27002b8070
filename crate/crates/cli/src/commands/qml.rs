use anyhow::Result;
use hyperinit_core::distributions::HyperParams;
use hyperinit_core::es::EsTrace;
use hyperinit_core::tasks::train;
use serde::Serialize;

use super::{
    es_trace_table, expand_methods, fmt_f64, initial_guess, qml_theta_score, resolve, sample_theta0, setup_qml, slug,
    Output,
};
use crate::config::RunConfig;
use crate::record::Table;

#[derive(Debug, Serialize)]
struct QmlMethod {
    method: String,
    hyperparams: HyperParams,
    search: Option<EsTrace>,
    /// Mean training cross-entropy after each Adam step.
    curve: Vec<f64>,
    final_loss: f64,
    train_accuracy: f64,
    test_accuracy: f64,
}

#[derive(Debug, Serialize)]
struct QmlResults {
    dataset: String,
    num_classes: usize,
    n_train: usize,
    n_test: usize,
    components: usize,
    explained_variance_ratio: Vec<f64>,
    num_params: usize,
    score_batch: Vec<usize>,
    methods: Vec<QmlMethod>,
}

/// Classification: search, draw, train on the (sub-sampled) training split,
/// report the loss curve and both accuracies.
pub fn cmd_qml(cfg: &RunConfig) -> Result<Output> {
    let setup = setup_qml(cfg)?;
    let task = &setup.task;
    let p = task.circuit.num_params();
    let hp0 = initial_guess(cfg)?;
    let names = cfg.distribution.family.param_names();
    let full = task.batch_cost(task.full_batch());

    let mut curves = Table::new("training_curve", &["iter", "cost", "method"]);
    let mut tables = Vec::new();
    let mut methods = Vec::new();
    for spec in expand_methods(&cfg.qml.methods, &cfg.score, &[cfg.score.omega]) {
        let label = spec.label();
        let resolved = resolve(&spec, cfg, &hp0, p, &[], |s, theta| qml_theta_score(&setup, s, theta))?;
        let theta0 = sample_theta0(cfg, &resolved.hyperparams, p, &[])?;
        let run = train(&full, &theta0, cfg.train.iters, cfg.train.lr)?;
        for (k, c) in run.curve.iter().enumerate() {
            curves.push(vec![k.to_string(), fmt_f64(*c), label.clone()]);
        }
        if let Some(trace) = &resolved.search {
            tables.push(es_trace_table(&format!("es_trace_{}", slug(&label)), names, trace));
        }
        methods.push(QmlMethod {
            train_accuracy: task.accuracy(&run.theta, &task.train_x, &task.train_y)?,
            test_accuracy: task.test_accuracy(&run.theta)?,
            final_loss: *run.curve.last().expect("curve is never empty"),
            method: label,
            hyperparams: resolved.hyperparams,
            search: resolved.search,
            curve: run.curve,
        });
    }
    tables.insert(0, curves);
    let results = QmlResults {
        dataset: setup.dataset.clone(),
        num_classes: setup.data.num_classes,
        n_train: task.train_y.len(),
        n_test: task.test_y.len(),
        components: cfg.qml.components,
        explained_variance_ratio: setup.data.explained_variance_ratio.clone(),
        num_params: p,
        score_batch: setup.score_batch.clone(),
        methods,
    };
    Ok(Output {
        results: serde_json::to_value(results)?,
        tables,
    })
}
