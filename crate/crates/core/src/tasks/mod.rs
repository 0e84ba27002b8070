//! Downstream tasks and the Adam training loop.

mod adam;
mod qml;
mod vqe;

use serde::Serialize;

pub use adam::AdamState;
pub use qml::{cross_entropy, qml_logits, readout_qubits, QmlBatchCost, QmlTask, PROB_FLOOR};
pub use vqe::{exact_ground_energy, vqe_cost, VqeTask, MAX_ORACLE_QUBITS};

use crate::differentiation::CostFunction;
use crate::error::{Error, Result};

/// Default optimizer settings for downstream training.
pub const DEFAULT_LR: f64 = 0.01;
pub const DEFAULT_TRAIN_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainResult {
    pub theta: Vec<f64>,
    /// `curve[k]` is the cost at the parameters after `k` Adam steps.
    pub curve: Vec<f64>,
}

/// `iters` Adam steps on parameter-shift gradients of `cost`.
pub fn train(cost: &dyn CostFunction, theta0: &[f64], iters: usize, lr: f64) -> Result<TrainResult> {
    if theta0.len() != cost.num_params() {
        return Err(Error::ParamLength {
            expected: cost.num_params(),
            got: theta0.len(),
        });
    }
    let mut adam = AdamState::new(theta0.len(), lr);
    let mut theta = theta0.to_vec();
    let mut curve = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let (c, g) = cost.value_and_gradient(&theta)?;
        curve.push(c);
        theta = adam.step(&theta, g.values())?;
    }
    curve.push(cost.value(&theta)?);
    if let Some(i) = curve.iter().position(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite cost at iteration {i}")));
    }
    Ok(TrainResult { theta, curve })
}
