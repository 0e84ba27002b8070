//! Score functions over sampled circuit parameters.
//!
//! * `S1 = Omega(F + eps I)` summarizes the QFIM `F`.
//! * `S2 = M^t(grad C)`, the `t`-th raw moment of gradient magnitudes.
//! * `S3 = (1 - w) S1 + w S2`.
//!
//! All scores are maximized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::differentiation::{qfim, CostFunction, Gradient, QfimMatrix, DEFAULT_STABILIZER};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::simulator::Circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreKind {
    S1,
    S2,
    S3,
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::S1 => "S1",
            ScoreKind::S2 => "S2",
            ScoreKind::S3 => "S3",
        })
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S1" | "s1" => Ok(ScoreKind::S1),
            "S2" | "s2" => Ok(ScoreKind::S2),
            "S3" | "s3" => Ok(ScoreKind::S3),
            other => Err(Error::InvalidArgument(format!("unknown score function {other:?}"))),
        }
    }
}

/// Scalar reduction of a QFIM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Omega {
    Trace,
    LogDet,
    Harmonic,
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Omega::Trace => "trace",
            Omega::LogDet => "log-det",
            Omega::Harmonic => "harmonic",
        })
    }
}

impl FromStr for Omega {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(Omega::Trace),
            "log-det" => Ok(Omega::LogDet),
            "harmonic" => Ok(Omega::Harmonic),
            other => Err(Error::InvalidArgument(format!("unknown omega variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreSpec {
    pub kind: ScoreKind,
    pub omega: Omega,
    /// Moment order for the gradient statistic.
    pub t: u32,
    /// Mixing weight of the gradient term in `S3`.
    pub w: f64,
    pub eps: f64,
    /// Number of leading eigenvalues in the harmonic reduction.
    pub k_eigs: usize,
    /// Prefactor `K` of the harmonic reduction.
    pub harmonic_scale: f64,
}

impl Default for ScoreSpec {
    fn default() -> Self {
        Self {
            kind: ScoreKind::S1,
            omega: Omega::Trace,
            t: 2,
            w: 0.9,
            eps: DEFAULT_STABILIZER,
            k_eigs: 5,
            harmonic_scale: 1.0,
        }
    }
}

impl ScoreSpec {
    pub fn new(kind: ScoreKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(Error::InvalidArgument("moment order t must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::InvalidArgument(format!("mixing weight w={} outside [0, 1]", self.w)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps={} must be positive", self.eps)));
        }
        if self.k_eigs < 1 {
            return Err(Error::InvalidArgument("k_eigs must be >= 1".into()));
        }
        if !self.harmonic_scale.is_finite() {
            return Err(Error::InvalidArgument("harmonic_scale must be finite".into()));
        }
        Ok(())
    }

    /// Short label such as `S1/trace` or `S2`.
    pub fn label(&self) -> String {
        match self.kind {
            ScoreKind::S2 => "S2".to_string(),
            k => format!("{k}/{}", self.omega),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreValue {
    pub raw: f64,
    pub utility: Option<f64>,
}

/// `Omega(F + eps I)`. Eigenvalues below zero (numerical noise on a PSD
/// matrix) are clamped to zero before the spectral reductions.
pub fn omega_reduce(f: &QfimMatrix, omega: Omega, eps: f64, k_eigs: usize, harmonic_scale: f64) -> Result<f64> {
    let p = f.dim();
    match omega {
        Omega::Trace => Ok(f.matrix.trace() + p as f64 * eps),
        Omega::LogDet => {
            let ev = hermitian_eigenvalues(&f.matrix)?;
            Ok(ev.iter().map(|l| (l.max(0.0) + eps).ln()).sum())
        }
        Omega::Harmonic => {
            let ev = hermitian_eigenvalues(&f.matrix)?;
            let s: f64 = ev.iter().take(k_eigs.min(p)).map(|l| 1.0 / (l.max(0.0) + eps)).sum();
            Ok(harmonic_scale * s)
        }
    }
}

/// `(1/p) sum |g_mu|^t`.
pub fn order_statistic(g: &Gradient, t: u32) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::InvalidArgument("empty gradient".into()));
    }
    if t < 1 {
        return Err(Error::InvalidArgument("moment order t must be >= 1".into()));
    }
    let s: f64 = g.values().iter().map(|x| x.abs().powi(t as i32)).sum();
    Ok(s / g.len() as f64)
}

/// Evaluates the configured score at `theta`. `cost` is required for `S2`,
/// `S3`, and for `S1` when the QFIM ladder falls back to the empirical form.
pub fn score(
    circuit: &Circuit,
    features: Option<&[f64]>,
    theta: &[f64],
    cost: Option<&dyn CostFunction>,
    spec: &ScoreSpec,
) -> Result<ScoreValue> {
    let needs_gradient = spec.kind != ScoreKind::S1 || (circuit.num_params() > crate::differentiation::EXACT_QFIM_MAX_PARAMS && circuit.layers().is_none());
    let grad = if needs_gradient {
        let cost = cost.ok_or_else(|| {
            Error::InvalidArgument(format!("score {} needs a task cost", spec.kind))
        })?;
        Some(cost.gradient(theta)?)
    } else {
        None
    };

    let qfim_part = || -> Result<f64> {
        let f = qfim(circuit, theta, features, grad.as_ref())?;
        omega_reduce(&f, spec.omega, spec.eps, spec.k_eigs, spec.harmonic_scale)
    };
    let grad_part = || order_statistic(grad.as_ref().expect("gradient computed"), spec.t);

    let raw = match spec.kind {
        ScoreKind::S1 => qfim_part()?,
        ScoreKind::S2 => grad_part()?,
        ScoreKind::S3 => {
            let w = spec.w;
            let q = if w < 1.0 { qfim_part()? } else { 0.0 };
            let g = if w > 0.0 { grad_part()? } else { 0.0 };
            (1.0 - w) * q + w * g
        }
    };
    if !raw.is_finite() {
        return Err(Error::InvalidArgument(format!("score {} is not finite", spec.label())));
    }
    Ok(ScoreValue { raw, utility: None })
}

/// Rank-based utilities `u_k = k / (N - 1) - 0.5`, where the lowest raw score
/// gets `k = 0` and the highest `k = N - 1`. Ties go to the lower index first.
/// The output is aligned with the input.
pub fn utility_shape(raw: &[f64]) -> Result<Vec<f64>> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("utility shaping needs >= 2 scores, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    let denom = (n - 1) as f64;
    for (k, &idx) in order.iter().enumerate() {
        out[idx] = k as f64 / denom - 0.5;
    }
    Ok(out)
}
