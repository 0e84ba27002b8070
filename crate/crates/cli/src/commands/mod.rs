mod bp_scan;
mod grad_profile;
mod hypopt;
mod qml;
mod vqe;

pub use bp_scan::{cmd_bp_scan, least_squares_slope};
pub use grad_profile::{cmd_grad_profile, histogram, total_variation};
pub use hypopt::cmd_hypopt;
pub use qml::cmd_qml;
pub use vqe::cmd_vqe;

use anyhow::{bail, Context, Result};
use hyperinit_core::data::{load_csv, load_hamiltonian, prepare_classification, PreparedData};
use hyperinit_core::distributions::{init_guess, manual_baseline, sample_params_scaled, HyperParams, Prng};
use hyperinit_core::es::{optimize_hyperparams, EsTrace};
use hyperinit_core::scoring::{score, Omega, ScoreKind, ScoreSpec};
use hyperinit_core::simulator::{build_hea, build_strongly_entangling, build_two_design, with_angle_embedding, Circuit};
use hyperinit_core::tasks::{readout_qubits, QmlTask, VqeTask};
use serde::Serialize;
use serde_json::Value;

use crate::config::{AnsatzKind, Method, RunConfig};
use crate::record::Table;

const STREAM_INIT: u64 = 0x11;
const STREAM_ES: u64 = 0x12;
const STREAM_THETA0: u64 = 0x13;
const STREAM_ANSATZ: u64 = 0x14;
const STREAM_DATA: u64 = 0x15;
const STREAM_SCORE_BATCH: u64 = 0x16;
pub(crate) const STREAM_PROFILE: u64 = 0x17;
pub(crate) const STREAM_SCAN: u64 = 0x18;

/// What a command hands back before it is wrapped into a record.
pub struct Output {
    pub results: Value,
    pub tables: Vec<Table>,
}

pub(crate) fn sub_seed(seed: u64, labels: &[u64]) -> u64 {
    Prng::derive(seed, labels).next_u64()
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// A method with its score settings resolved.
#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub method: Method,
    pub score: Option<ScoreSpec>,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match &self.score {
            Some(s) => s.label(),
            None => self.method.to_string(),
        }
    }

    fn tag(&self) -> u64 {
        let omega = match &self.score {
            Some(s) if s.kind != ScoreKind::S2 => match s.omega {
                Omega::Trace => 0,
                Omega::LogDet => 1,
                Omega::Harmonic => 2,
            },
            _ => 0,
        };
        self.method.code() * 16 + omega
    }
}

/// One entry per method, and per omega for the QFIM-based scores.
pub fn expand_methods(methods: &[Method], base: &ScoreSpec, omegas: &[Omega]) -> Vec<MethodSpec> {
    let mut out = Vec::new();
    for &m in methods {
        match m.score_kind() {
            None => out.push(MethodSpec { method: m, score: None }),
            Some(ScoreKind::S2) => out.push(MethodSpec {
                method: m,
                score: Some(ScoreSpec {
                    kind: ScoreKind::S2,
                    ..base.clone()
                }),
            }),
            Some(kind) => out.extend(omegas.iter().map(|&omega| MethodSpec {
                method: m,
                score: Some(ScoreSpec {
                    kind,
                    omega,
                    ..base.clone()
                }),
            })),
        }
    }
    out
}

pub(crate) fn initial_guess(cfg: &RunConfig) -> Result<HyperParams> {
    let family = cfg.distribution.family;
    match cfg.distribution.initial {
        Some(v) => HyperParams::new(family, v).context("distribution.initial"),
        None => Ok(init_guess(family, &mut Prng::derive(cfg.seed, &[STREAM_INIT]))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub hyperparams: HyperParams,
    pub search: Option<EsTrace>,
}

/// Hyperparameters for `spec`: fixed for the baselines, searched otherwise.
/// `scope` separates independent searches of one run.
pub(crate) fn resolve<F>(
    spec: &MethodSpec,
    cfg: &RunConfig,
    hp0: &HyperParams,
    num_params: usize,
    scope: &[u64],
    theta_score: F,
) -> Result<Resolved>
where
    F: Fn(&ScoreSpec, &[f64]) -> hyperinit_core::Result<f64> + Sync,
{
    let family = cfg.distribution.family;
    let hyperparams = match spec.method {
        Method::Manual => manual_baseline(family),
        Method::Uniform => HyperParams::beta(1.0, 1.0)?,
        _ => {
            let s = spec.score.as_ref().expect("score methods carry a spec");
            let seed = sub_seed(cfg.seed, &[&[STREAM_ES, spec.tag()], scope].concat());
            let (hp, trace) = optimize_hyperparams(
                |theta: &[f64]| theta_score(s, theta),
                num_params,
                cfg.distribution.beta_scale,
                hp0,
                &cfg.es,
                seed,
            )
            .with_context(|| format!("hyperparameter search for {}", spec.label()))?;
            return Ok(Resolved {
                hyperparams: hp,
                search: Some(trace),
            });
        }
    };
    Ok(Resolved {
        hyperparams,
        search: None,
    })
}

/// Initial parameters drawn from a stream shared by every method, so methods
/// differ only through their hyperparameters.
pub(crate) fn sample_theta0(cfg: &RunConfig, hp: &HyperParams, num_params: usize, scope: &[u64]) -> Result<Vec<f64>> {
    let mut rng = Prng::derive(cfg.seed, &[&[STREAM_THETA0], scope].concat());
    Ok(sample_params_scaled(hp, num_params, cfg.distribution.beta_scale, &mut rng)?)
}

pub(crate) fn build_ansatz(kind: AnsatzKind, layers: usize, qubits: usize, seed: u64) -> Result<Circuit> {
    Ok(match kind {
        AnsatzKind::StronglyEntangling => build_strongly_entangling(layers, qubits)?,
        AnsatzKind::Hea => build_hea(layers, qubits)?,
        AnsatzKind::TwoDesign => build_two_design(layers, qubits, sub_seed(seed, &[STREAM_ANSATZ, qubits as u64]))?,
    })
}

pub(crate) fn setup_vqe(cfg: &RunConfig) -> Result<VqeTask> {
    let h = load_hamiltonian(&cfg.vqe.hamiltonian)
        .with_context(|| format!("loading Hamiltonian {}", cfg.vqe.hamiltonian.display()))?;
    let q = h.num_qubits();
    if let Some(aq) = cfg.ansatz.qubits {
        if aq != q {
            bail!("ansatz.qubits = {aq} but the Hamiltonian acts on {q} qubits");
        }
    }
    let circuit = build_ansatz(cfg.ansatz.kind, cfg.ansatz.layers, q, cfg.seed)?;
    Ok(VqeTask::new(h, circuit)?)
}

pub(crate) struct QmlSetup {
    pub task: QmlTask,
    pub data: PreparedData,
    pub dataset: String,
    /// Training rows the scores look at.
    pub score_batch: Vec<usize>,
}

pub(crate) fn setup_qml(cfg: &RunConfig) -> Result<QmlSetup> {
    let q = &cfg.qml;
    let ds = load_csv(&q.dataset, &q.label_column).with_context(|| format!("loading {}", q.dataset.display()))?;
    let data = prepare_classification(&ds, q.components, q.max_train, sub_seed(cfg.seed, &[STREAM_DATA]))?;
    let qubits = cfg.ansatz.qubits.unwrap_or(q.components);
    if qubits < q.components {
        bail!("{} features need at least as many qubits, ansatz has {qubits}", q.components);
    }
    if qubits < readout_qubits(data.num_classes) {
        bail!("{} classes need {} readout qubits", data.num_classes, readout_qubits(data.num_classes));
    }
    let base = build_ansatz(cfg.ansatz.kind, cfg.ansatz.layers, qubits, cfg.seed)?;
    let circuit = with_angle_embedding(&base, q.components)?;
    let task = QmlTask::new(
        circuit,
        (data.train_x.clone(), data.train_y.clone()),
        (data.test_x.clone(), data.test_y.clone()),
        data.num_classes,
    )?;
    let mut idx: Vec<usize> = (0..data.train_y.len()).collect();
    Prng::derive(cfg.seed, &[STREAM_SCORE_BATCH]).shuffle(&mut idx);
    idx.truncate(q.score_batch.min(idx.len()));
    idx.sort_unstable();
    Ok(QmlSetup {
        task,
        data,
        dataset: ds.name,
        score_batch: idx,
    })
}

/// Score of `theta` on the classification task: the QFIM is taken at the
/// first score-batch row, the gradient over the whole score batch.
pub(crate) fn qml_theta_score(setup: &QmlSetup, spec: &ScoreSpec, theta: &[f64]) -> hyperinit_core::Result<f64> {
    let cost = setup.task.batch_cost(setup.score_batch.clone());
    let x0 = &setup.task.train_x[setup.score_batch[0]];
    Ok(score(&setup.task.circuit, Some(x0), theta, Some(&cost), spec)?.raw)
}

pub(crate) fn vqe_theta_score(task: &VqeTask, spec: &ScoreSpec, theta: &[f64]) -> hyperinit_core::Result<f64> {
    Ok(score(&task.circuit, None, theta, Some(task), spec)?.raw)
}

pub(crate) fn es_trace_table(name: &str, family_names: [&str; 2], trace: &EsTrace) -> Table {
    let mut t = Table::new(
        name,
        &["iter", "lambda_0", "lambda_1", family_names[0], family_names[1], "mean_score", "best_score", "delta_l1"],
    );
    for it in &trace.iterations {
        t.push(vec![
            it.iter.to_string(),
            fmt_f64(it.lambda[0]),
            fmt_f64(it.lambda[1]),
            fmt_f64(it.constrained[0]),
            fmt_f64(it.constrained[1]),
            fmt_f64(it.mean_score),
            fmt_f64(it.best_score),
            fmt_f64(it.delta_l1),
        ]);
    }
    t
}

/// File-name-safe version of a method label.
pub(crate) fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
