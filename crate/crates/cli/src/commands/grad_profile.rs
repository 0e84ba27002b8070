use anyhow::{bail, Context, Result};
use hyperinit_core::differentiation::gradient;
use hyperinit_core::distributions::{sample_params_scaled, HyperParams, Prng};
use hyperinit_core::simulator::{build_hea, Circuit, Observable};
use rayon::prelude::*;
use serde::Serialize;

use super::{fmt_f64, Output, STREAM_PROFILE};
use crate::config::RunConfig;
use crate::record::Table;

/// Normalized histogram over `[lo, hi]` with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Probability mass per bin.
    pub fn masses(&self) -> Vec<f64> {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .collect()
    }
}

pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = values.len().max(1) as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (n * (e[1] - e[0])))
        .collect();
    Histogram { edges, density }
}

/// `0.5 * sum |p_i - q_i|` over bin masses.
pub fn total_variation(a: &Histogram, b: &Histogram) -> f64 {
    0.5 * a.masses().iter().zip(b.masses()).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Serialize)]
struct LayerProfile {
    layer: usize,
    baseline: Histogram,
    perturbed: Histogram,
    tv_distance: f64,
}

#[derive(Debug, Serialize)]
struct ProfileResults {
    observable: String,
    layers: usize,
    qubits: usize,
    samples: usize,
    delta: f64,
    baseline: HyperParams,
    perturbed: HyperParams,
    profiles: Vec<LayerProfile>,
}

/// `|dC/dtheta|` for every sample; sample `m` always uses the same stream.
fn magnitudes(circuit: &Circuit, obs: &Observable, hp: &HyperParams, cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let p = circuit.num_params();
    (0..cfg.grad_profile.samples)
        .into_par_iter()
        .map(|m| {
            let mut rng = Prng::derive(cfg.seed, &[STREAM_PROFILE, m as u64]);
            let theta = sample_params_scaled(hp, p, cfg.distribution.beta_scale, &mut rng)?;
            let g = gradient(circuit, &theta, None, obs)?;
            Ok(g.values().iter().map(|v| v.abs()).collect())
        })
        .collect()
}

/// Per-layer gradient-magnitude histograms for a reference distribution and
/// for its hyperparameters shifted by `delta`.
pub fn cmd_grad_profile(cfg: &RunConfig) -> Result<Output> {
    let gp = &cfg.grad_profile;
    let family = cfg.distribution.family;
    let base = HyperParams::new(family, gp.hyperparams).context("grad_profile.hyperparams")?;
    let shifted = HyperParams::new(family, [gp.hyperparams[0] + gp.delta, gp.hyperparams[1] + gp.delta])
        .context("grad_profile.delta")?;
    let circuit = build_hea(gp.layers, gp.qubits)?;
    let obs = Observable::z_product(gp.qubits, &[0])?;
    let Some(layer_params) = circuit.layer_params() else {
        bail!("ansatz carries no layer structure");
    };

    let a = magnitudes(&circuit, &obs, &base, cfg)?;
    let b = magnitudes(&circuit, &obs, &shifted, cfg)?;

    let mut tab_a = Table::new("histogram_baseline", &["layer", "bin_left", "bin_right", "density"]);
    let mut tab_b = Table::new("histogram_perturbed", &["layer", "bin_left", "bin_right", "density"]);
    let mut profiles = Vec::new();
    for (layer, params) in layer_params.iter().enumerate() {
        let pick = |rows: &[Vec<f64>]| -> Vec<f64> { rows.iter().flat_map(|r| params.iter().map(|&i| r[i])).collect() };
        let (va, vb) = (pick(&a), pick(&b));
        let top = va.iter().chain(&vb).copied().fold(0.0, f64::max);
        let hi = if top > 0.0 { top } else { 1.0 };
        let ha = histogram(&va, 0.0, hi, gp.bins);
        let hb = histogram(&vb, 0.0, hi, gp.bins);
        for (tab, h) in [(&mut tab_a, &ha), (&mut tab_b, &hb)] {
            for (k, d) in h.density.iter().enumerate() {
                tab.push(vec![layer.to_string(), fmt_f64(h.edges[k]), fmt_f64(h.edges[k + 1]), fmt_f64(*d)]);
            }
        }
        profiles.push(LayerProfile {
            layer,
            tv_distance: total_variation(&ha, &hb),
            baseline: ha,
            perturbed: hb,
        });
    }
    let results = ProfileResults {
        observable: obs.to_string().trim().to_string(),
        layers: gp.layers,
        qubits: gp.qubits,
        samples: gp.samples,
        delta: gp.delta,
        baseline: base,
        perturbed: shifted,
        profiles,
    };
    Ok(Output {
        results: serde_json::to_value(results)?,
        tables: vec![tab_a, tab_b],
    })
}
