//! Run configuration: one TOML document, `--set key=value` overrides, and
//! strict key checking.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use hyperinit_core::distributions::{Family, DEFAULT_BETA_SCALE};
use hyperinit_core::es::EsConfig;
use hyperinit_core::scoring::{Omega, ScoreKind, ScoreSpec};
use hyperinit_core::tasks::{DEFAULT_LR, DEFAULT_TRAIN_ITERS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzKind {
    StronglyEntangling,
    Hea,
    TwoDesign,
}

/// Where an initialization comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    S1,
    S2,
    S3,
    #[serde(rename = "manual")]
    Manual,
    /// `Beta(1, 1)` over the full scaled support.
    #[serde(rename = "uniform")]
    Uniform,
}

impl Method {
    pub fn score_kind(self) -> Option<ScoreKind> {
        match self {
            Method::S1 => Some(ScoreKind::S1),
            Method::S2 => Some(ScoreKind::S2),
            Method::S3 => Some(ScoreKind::S3),
            Method::Manual | Method::Uniform => None,
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Method::S1 => 1,
            Method::S2 => 2,
            Method::S3 => 3,
            Method::Manual => 4,
            Method::Uniform => 5,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::S1 => "S1",
            Method::S2 => "S2",
            Method::S3 => "S3",
            Method::Manual => "manual",
            Method::Uniform => "uniform",
        })
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "S1" => Method::S1,
            "S2" => Method::S2,
            "S3" => Method::S3,
            "manual" => Method::Manual,
            "uniform" => Method::Uniform,
            other => bail!("unknown method {other:?}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub kind: AnsatzKind,
    pub layers: usize,
    /// Defaults to the task's register size.
    pub qubits: Option<usize>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            kind: AnsatzKind::StronglyEntangling,
            layers: 8,
            qubits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionConfig {
    pub family: Family,
    /// Beta draws are multiplied by this.
    pub beta_scale: f64,
    /// Constrained starting point of the search; drawn when absent.
    pub initial: Option<[f64; 2]>,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        Self {
            family: Family::Beta,
            beta_scale: DEFAULT_BETA_SCALE,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lr: f64,
    pub iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: DEFAULT_LR,
            iters: DEFAULT_TRAIN_ITERS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypoptTask {
    Vqe,
    Qml,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HypoptConfig {
    pub task: HypoptTask,
}

impl Default for HypoptConfig {
    fn default() -> Self {
        Self { task: HypoptTask::Vqe }
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::S1, Method::S2, Method::S3, Method::Manual]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VqeConfig {
    pub hamiltonian: PathBuf,
    pub methods: Vec<Method>,
    /// Energy gap used for the iterations-to-threshold metric.
    pub gap_threshold: f64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            hamiltonian: PathBuf::from("data/h2_0.70.ham"),
            methods: default_methods(),
            gap_threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QmlConfig {
    pub dataset: PathBuf,
    pub label_column: String,
    pub components: usize,
    /// Stratified cap on the training split.
    pub max_train: Option<usize>,
    /// Training rows used by the scores during the search.
    pub score_batch: usize,
    pub methods: Vec<Method>,
}

impl Default for QmlConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::from("data/wine.csv"),
            label_column: "label".into(),
            components: 4,
            max_train: Some(300),
            score_batch: 16,
            methods: default_methods(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradProfileConfig {
    pub layers: usize,
    pub qubits: usize,
    /// Constrained hyperparameters of the reference distribution.
    pub hyperparams: [f64; 2],
    /// Added to both hyperparameters for the perturbed profile.
    pub delta: f64,
    pub samples: usize,
    pub bins: usize,
}

impl Default for GradProfileConfig {
    fn default() -> Self {
        Self {
            layers: 5,
            qubits: 4,
            hyperparams: [0.1, 1.5],
            delta: 0.05,
            samples: 200,
            bins: 20,
        }
    }
}

/// Cost whose first-parameter gradient the scan probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanObservable {
    /// `|0...0><0...0|`.
    ZeroProjector,
    /// `Z_0 Z_1`.
    Z0z1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpScanConfig {
    pub observable: ScanObservable,
    pub qubits: Vec<usize>,
    pub layers: usize,
    pub samples: usize,
    pub methods: Vec<Method>,
    /// Reductions tried for the QFIM-based scores.
    pub omegas: Vec<Omega>,
}

impl Default for BpScanConfig {
    fn default() -> Self {
        Self {
            observable: ScanObservable::ZeroProjector,
            qubits: vec![2, 4, 6, 8],
            layers: 5,
            samples: 200,
            methods: vec![Method::Uniform, Method::Manual, Method::S1, Method::S2, Method::S3],
            omegas: vec![Omega::Trace],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Thread cap; 0 uses every core. Never affects results.
    pub workers: usize,
    pub ansatz: AnsatzConfig,
    pub distribution: DistributionConfig,
    pub score: ScoreSpec,
    pub es: EsConfig,
    pub train: TrainConfig,
    pub hypopt: HypoptConfig,
    pub vqe: VqeConfig,
    pub qml: QmlConfig,
    pub grad_profile: GradProfileConfig,
    pub bp_scan: BpScanConfig,
}

impl RunConfig {
    /// Parses a TOML document, reporting the path of any offending key.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
            .map_err(|e| anyhow!("config key `{}`: {}", e.path(), e.inner()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path` (if any) and applies `key=value` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("{} is not valid TOML", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn validate(&self) -> Result<()> {
        self.score.validate().context("score")?;
        self.es.validate().context("es")?;
        if !(self.distribution.beta_scale > 0.0 && self.distribution.beta_scale <= 4.0 * PI) {
            bail!("distribution.beta_scale must lie in (0, 4 pi]");
        }
        if self.ansatz.layers == 0 {
            bail!("ansatz.layers must be >= 1");
        }
        if !(self.train.lr >= 0.0 && self.train.lr.is_finite()) {
            bail!("train.lr must be a non-negative number");
        }
        if self.qml.score_batch == 0 {
            bail!("qml.score_batch must be >= 1");
        }
        if self.grad_profile.samples == 0 || self.grad_profile.bins == 0 {
            bail!("grad_profile.samples and grad_profile.bins must be >= 1");
        }
        if self.bp_scan.samples < 2 {
            bail!("bp_scan.samples must be >= 2");
        }
        if self.bp_scan.omegas.is_empty() {
            bail!("bp_scan.omegas must not be empty");
        }
        Ok(())
    }
}

/// `a.b.c=value`; the value is read as a TOML literal, falling back to a bare
/// string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        bail!("override `{assignment}` has an empty key segment");
    }
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    for (i, part) in parts.iter().enumerate() {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{}` is not a table", parts[..=i].join(".")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_names_its_path() {
        let err = RunConfig::from_toml_str("[es]\netaa = 0.1\n").unwrap_err().to_string();
        assert!(err.contains("es.etaa") || err.contains("es"), "{err}");
        assert!(err.contains("etaa"), "{err}");
        let err = RunConfig::from_toml_str("sed = 3\n").unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg = RunConfig::load(
            None,
            &[
                "es.n_iters=3".into(),
                "score.kind=\"S2\"".into(),
                "score.omega=log-det".into(),
                "vqe.methods=[\"S1\",\"manual\"]".into(),
                "es.n_iters=4".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.es.n_iters, 4);
        assert_eq!(cfg.score.kind, ScoreKind::S2);
        assert_eq!(cfg.score.omega, Omega::LogDet);
        assert_eq!(cfg.vqe.methods, vec![Method::S1, Method::Manual]);
    }

    #[test]
    fn bad_overrides() {
        assert!(RunConfig::load(None, &["es.n_iters".into()]).is_err());
        assert!(RunConfig::load(None, &["es..eta=1".into()]).is_err());
        assert!(RunConfig::load(None, &["seed=1".into(), "seed.x=2".into()]).is_err());
        assert!(RunConfig::load(None, &["es.eta=-1".into()]).is_err());
        let err = RunConfig::load(None, &["es.n_samples=\"many\"".into()]).unwrap_err().to_string();
        assert!(err.contains("es.n_samples"), "{err}");
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.distribution.initial = Some([2.0, 3.0]);
        cfg.ansatz.qubits = Some(3);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
