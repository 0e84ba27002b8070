use rayon::prelude::*;

use crate::differentiation::{jacobian, CostFunction, Gradient};
use crate::error::{Error, Result};
use crate::simulator::{apply_circuit, Circuit, StateVector};

/// Probability clamp for the cross-entropy.
pub const PROB_FLOOR: f64 = 1e-10;
/// Below this retained mass the class distribution falls back to uniform.
const MASS_FLOOR: f64 = 1e-12;

/// Classification with an angle-embedded circuit. Class scores are read from
/// the computational-basis marginals of the first `ceil(log2 C)` qubits,
/// truncated to `C` outcomes and renormalized; for `C = 2` this is the
/// `<Z_0>` readout with `P(class 1) = (1 - <Z_0>) / 2`.
#[derive(Debug, Clone)]
pub struct QmlTask {
    pub circuit: Circuit,
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<usize>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<usize>,
    pub num_classes: usize,
}

/// Qubits read out for `num_classes` classes.
pub fn readout_qubits(num_classes: usize) -> usize {
    (usize::BITS - (num_classes - 1).leading_zeros()) as usize
}

impl QmlTask {
    pub fn new(
        circuit: Circuit,
        train: (Vec<Vec<f64>>, Vec<usize>),
        test: (Vec<Vec<f64>>, Vec<usize>),
        num_classes: usize,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidArgument(format!("need >= 2 classes, got {num_classes}")));
        }
        if readout_qubits(num_classes) > circuit.num_qubits() {
            return Err(Error::InvalidArgument(format!(
                "{num_classes} classes need {} readout qubits, circuit has {}",
                readout_qubits(num_classes),
                circuit.num_qubits()
            )));
        }
        for (name, (x, y)) in [("train", &train), ("test", &test)] {
            if x.len() != y.len() {
                return Err(Error::Data(format!("{name}: {} rows but {} labels", x.len(), y.len())));
            }
            if let Some(row) = x.iter().find(|r| r.len() != circuit.num_features()) {
                return Err(Error::Data(format!(
                    "{name}: feature row of length {} for {} embedding slots",
                    row.len(),
                    circuit.num_features()
                )));
            }
            if let Some(&bad) = y.iter().find(|&&l| l >= num_classes) {
                return Err(Error::Data(format!("{name}: label {bad} >= {num_classes} classes")));
            }
        }
        Ok(Self {
            circuit,
            train_x: train.0,
            train_y: train.1,
            test_x: test.0,
            test_y: test.1,
            num_classes,
        })
    }

    fn readout(&self, state: &StateVector) -> Vec<f64> {
        state.marginal_probabilities(readout_qubits(self.num_classes))
    }

    /// Class probabilities from raw marginals.
    fn normalize(&self, marginals: &[f64]) -> Vec<f64> {
        let kept = &marginals[..self.num_classes];
        let s: f64 = kept.iter().sum();
        if s <= MASS_FLOOR {
            return vec![1.0 / self.num_classes as f64; self.num_classes];
        }
        kept.iter().map(|r| r / s).collect()
    }

    pub fn class_probabilities(&self, theta: &[f64], features: &[f64]) -> Result<Vec<f64>> {
        let state = apply_circuit(&self.circuit, theta, Some(features))?;
        Ok(self.normalize(&self.readout(&state)))
    }

    /// `(loss, d loss / d theta)` for one sample.
    fn sample_loss_grad(&self, theta: &[f64], x: &[f64], y: usize) -> Result<(f64, Vec<f64>)> {
        let state = apply_circuit(&self.circuit, theta, Some(x))?;
        let r = self.readout(&state);
        let loss = sample_loss(&self.normalize(&r), y);

        let c = self.num_classes;
        let s: f64 = r[..c].iter().sum();
        let p_y = r[y] / s;
        let mut dl_dr = vec![0.0; r.len()];
        if s > MASS_FLOOR && p_y > PROB_FLOOR && p_y < 1.0 - PROB_FLOOR {
            // L = -ln(r_y / S)
            for (k, d) in dl_dr.iter_mut().enumerate().take(c) {
                *d = 1.0 / s - if k == y { 1.0 / r[y] } else { 0.0 };
            }
        }
        let jac = jacobian(&self.circuit, theta, Some(x), |st| self.readout(st))?;
        let grad = jac
            .iter()
            .map(|row| row.iter().zip(&dl_dr).map(|(a, b)| a * b).sum())
            .collect();
        Ok((loss, grad))
    }

    /// Mean cross-entropy and its gradient over the training rows `batch`.
    pub fn loss_and_gradient(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Gradient)> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty training batch".into()));
        }
        let parts: Vec<(f64, Vec<f64>)> = batch
            .par_iter()
            .map(|&i| self.sample_loss_grad(theta, &self.train_x[i], self.train_y[i]))
            .collect::<Result<_>>()?;
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for (l, g) in &parts {
            loss += l;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        grad.iter_mut().for_each(|g| *g /= n);
        Ok((loss / n, Gradient::new(grad)?))
    }

    pub fn loss(&self, theta: &[f64], batch: &[usize]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty training batch".into()));
        }
        let losses: Vec<f64> = batch
            .par_iter()
            .map(|&i| {
                self.class_probabilities(theta, &self.train_x[i])
                    .map(|p| sample_loss(&p, self.train_y[i]))
            })
            .collect::<Result<_>>()?;
        Ok(losses.iter().sum::<f64>() / losses.len() as f64)
    }

    /// Fraction of rows whose most probable class (lowest index on ties)
    /// equals the label.
    pub fn accuracy(&self, theta: &[f64], xs: &[Vec<f64>], ys: &[usize]) -> Result<f64> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument("accuracy over an empty set".into()));
        }
        let hits: Vec<bool> = xs
            .par_iter()
            .zip(ys)
            .map(|(x, &y)| {
                self.class_probabilities(theta, x).map(|p| {
                    let best = p
                        .iter()
                        .enumerate()
                        .fold(0, |b, (k, v)| if *v > p[b] { k } else { b });
                    best == y
                })
            })
            .collect::<Result<_>>()?;
        Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
    }

    pub fn test_accuracy(&self, theta: &[f64]) -> Result<f64> {
        self.accuracy(theta, &self.test_x, &self.test_y)
    }

    /// Cost over a fixed subset of training rows.
    pub fn batch_cost(&self, batch: Vec<usize>) -> QmlBatchCost<'_> {
        QmlBatchCost { task: self, batch }
    }

    pub fn full_batch(&self) -> Vec<usize> {
        (0..self.train_x.len()).collect()
    }
}

/// Binary tasks: the single logit `<Z_0>`. Otherwise the class probabilities.
pub fn qml_logits(task: &QmlTask, theta: &[f64], features: &[f64]) -> Result<Vec<f64>> {
    let state = apply_circuit(&task.circuit, theta, Some(features))?;
    if task.num_classes == 2 {
        let m = state.marginal_probabilities(1);
        return Ok(vec![m[0] - m[1]]);
    }
    Ok(task.normalize(&task.readout(&state)))
}

fn sample_loss(probs: &[f64], y: usize) -> f64 {
    -probs[y].clamp(PROB_FLOOR, 1.0 - PROB_FLOOR).ln()
}

/// Mean clamped cross-entropy of `probs` against `labels`.
pub fn cross_entropy(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    Ok(probs.iter().zip(labels).map(|(p, &y)| sample_loss(p, y)).sum::<f64>() / probs.len() as f64)
}

pub struct QmlBatchCost<'a> {
    task: &'a QmlTask,
    batch: Vec<usize>,
}

impl CostFunction for QmlBatchCost<'_> {
    fn num_params(&self) -> usize {
        self.task.circuit.num_params()
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        self.task.loss(theta, &self.batch)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Gradient> {
        Ok(self.task.loss_and_gradient(theta, &self.batch)?.1)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Gradient)> {
        self.task.loss_and_gradient(theta, &self.batch)
    }
}
