//! Parameter-shift derivatives and the quantum Fisher information matrix.
//!
//! Every trainable parameter drives exactly one Pauli rotation
//! `exp(-i theta P / 2)` (`Rot` gates are decomposed as `RZ RY RZ`), so all
//! derivatives come from circuit runs with one angle shifted by `+-pi/2`.
//! The shifted runs share a prefix: ops before the shifted rotation are
//! simulated once and snapshotted.

mod qfim;

use std::f64::consts::FRAC_PI_2;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulator::{apply_circuit, expectation, Circuit, Observable, StateVector};

pub use crate::linalg::hermitian_eigenvalues;
pub use qfim::{
    qfim, qfim_block_diagonal, qfim_empirical, qfim_exact, stabilize, QfimFidelity, QfimMatrix,
    DEFAULT_STABILIZER, EXACT_QFIM_MAX_PARAMS,
};

/// `dC/dtheta_mu` for every parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Gradient(Vec<f64>);

impl Gradient {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("gradient entry {i} is not finite")));
        }
        Ok(Gradient(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum()
    }
}

/// Runs the `+-pi/2` shifted circuits for each slot in `slots` over the op
/// window `ops`, starting from `start`, and maps each `(plus, minus)` pair
/// through `f`. Results come back in `slots` order.
pub(crate) fn shifted_pairs<T, F>(
    circuit: &Circuit,
    theta: &[f64],
    features: Option<&[f64]>,
    start: &StateVector,
    ops: Range<usize>,
    slots: &[usize],
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&StateVector, &StateVector) -> T + Sync,
{
    let mut targets: Vec<(usize, usize)> = slots
        .iter()
        .enumerate()
        .map(|(i, &s)| (circuit.slot_op(s), i))
        .collect();
    targets.sort_unstable();
    debug_assert!(targets.iter().all(|&(k, _)| ops.contains(&k)));

    // prefix snapshots taken just before each shifted op
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut state = start.clone();
    let mut pos = ops.start;
    for &(k, _) in &targets {
        circuit.run_ops(&mut state, pos..k, theta, features, None);
        pos = k;
        snapshots.push(state.clone());
    }

    let end = ops.end;
    let mut results: Vec<(usize, T)> = targets
        .par_iter()
        .zip(snapshots.into_par_iter())
        .map(|(&(k, idx), prefix)| {
            let mut plus = prefix.clone();
            circuit.run_ops(&mut plus, k..end, theta, features, Some((k, FRAC_PI_2)));
            let mut minus = prefix;
            circuit.run_ops(&mut minus, k..end, theta, features, Some((k, -FRAC_PI_2)));
            (idx, f(&plus, &minus))
        })
        .collect();
    results.sort_unstable_by_key(|(idx, _)| *idx);
    results.into_iter().map(|(_, t)| t).collect()
}

/// Parameter-shift Jacobian of a readout that is linear in the state's
/// density matrix (expectation values, basis probabilities). Row `mu` holds
/// `d readout / d theta_mu`.
pub fn jacobian<R>(circuit: &Circuit, theta: &[f64], features: Option<&[f64]>, readout: R) -> Result<Vec<Vec<f64>>>
where
    R: Fn(&StateVector) -> Vec<f64> + Sync,
{
    circuit.check_inputs(theta, features)?;
    let slots: Vec<usize> = (0..circuit.num_params()).collect();
    let start = StateVector::zero(circuit.num_qubits());
    Ok(shifted_pairs(
        circuit,
        theta,
        features,
        &start,
        0..circuit.ops().len(),
        &slots,
        |plus, minus| {
            readout(plus)
                .into_iter()
                .zip(readout(minus))
                .map(|(a, b)| 0.5 * (a - b))
                .collect()
        },
    ))
}

/// `dC/dtheta` for `C(theta) = <psi(theta)|O|psi(theta)>` by the shift rule
/// `[C(theta + pi/2 e_mu) - C(theta - pi/2 e_mu)] / 2`.
pub fn gradient(circuit: &Circuit, theta: &[f64], features: Option<&[f64]>, obs: &Observable) -> Result<Gradient> {
    if obs.num_qubits() != circuit.num_qubits() {
        return Err(Error::QubitMismatch {
            left: circuit.num_qubits(),
            right: obs.num_qubits(),
        });
    }
    let rows = jacobian(circuit, theta, features, |s| {
        vec![expectation(s, obs).expect("qubit counts checked")]
    })?;
    Gradient::new(rows.into_iter().map(|r| r[0]).collect())
}

/// Single entry `dC/dtheta_mu` of [`gradient`], using two circuit runs.
pub fn partial_derivative(
    circuit: &Circuit,
    theta: &[f64],
    features: Option<&[f64]>,
    obs: &Observable,
    mu: usize,
) -> Result<f64> {
    if obs.num_qubits() != circuit.num_qubits() {
        return Err(Error::QubitMismatch {
            left: circuit.num_qubits(),
            right: obs.num_qubits(),
        });
    }
    partial_derivative_by(circuit, theta, features, mu, |s| {
        expectation(s, obs).expect("qubit counts checked")
    })
}

/// `d readout / d theta_mu` for a readout linear in the density matrix.
pub fn partial_derivative_by<R>(
    circuit: &Circuit,
    theta: &[f64],
    features: Option<&[f64]>,
    mu: usize,
    readout: R,
) -> Result<f64>
where
    R: Fn(&StateVector) -> f64 + Sync,
{
    circuit.check_inputs(theta, features)?;
    if mu >= circuit.num_params() {
        return Err(Error::InvalidArgument(format!(
            "parameter {mu} out of range for {} parameters",
            circuit.num_params()
        )));
    }
    let start = StateVector::zero(circuit.num_qubits());
    let d = shifted_pairs(circuit, theta, features, &start, 0..circuit.ops().len(), &[mu], |p, m| {
        0.5 * (readout(p) - readout(m))
    });
    Ok(d[0])
}

/// Plain expectation cost `<psi(theta)|O|psi(theta)>`.
pub fn expectation_cost(circuit: &Circuit, theta: &[f64], features: Option<&[f64]>, obs: &Observable) -> Result<f64> {
    let state = apply_circuit(circuit, theta, features)?;
    expectation(&state, obs)
}

/// A differentiable task cost `C(theta)`.
pub trait CostFunction: Sync {
    fn num_params(&self) -> usize;

    fn value(&self, theta: &[f64]) -> Result<f64>;

    fn gradient(&self, theta: &[f64]) -> Result<Gradient>;

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Gradient)> {
        Ok((self.value(theta)?, self.gradient(theta)?))
    }
}

/// `C(theta) = <psi(theta; x)|O|psi(theta; x)>` for a fixed feature vector `x`
/// (or none).
#[derive(Debug, Clone)]
pub struct ExpectationCost {
    pub circuit: Circuit,
    pub observable: Observable,
    pub features: Option<Vec<f64>>,
}

impl ExpectationCost {
    pub fn new(circuit: Circuit, observable: Observable) -> Result<Self> {
        if circuit.num_qubits() != observable.num_qubits() {
            return Err(Error::QubitMismatch {
                left: circuit.num_qubits(),
                right: observable.num_qubits(),
            });
        }
        Ok(Self {
            circuit,
            observable,
            features: None,
        })
    }
}

impl CostFunction for ExpectationCost {
    fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        expectation_cost(&self.circuit, theta, self.features.as_deref(), &self.observable)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Gradient> {
        gradient(&self.circuit, theta, self.features.as_deref(), &self.observable)
    }
}

/// Return probability `C(theta) = |<0...0|psi(theta)>|^2`.
#[derive(Debug, Clone)]
pub struct ZeroProjectorCost {
    pub circuit: Circuit,
}

fn zero_probability(state: &StateVector) -> f64 {
    state.amplitudes()[0].norm_sqr()
}

impl CostFunction for ZeroProjectorCost {
    fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        Ok(zero_probability(&apply_circuit(&self.circuit, theta, None)?))
    }

    fn gradient(&self, theta: &[f64]) -> Result<Gradient> {
        let rows = jacobian(&self.circuit, theta, None, |s| vec![zero_probability(s)])?;
        Gradient::new(rows.into_iter().map(|r| r[0]).collect())
    }
}

impl ZeroProjectorCost {
    pub fn partial(&self, theta: &[f64], mu: usize) -> Result<f64> {
        partial_derivative_by(&self.circuit, theta, None, mu, zero_probability)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{build_hea, Gate};
    use std::f64::consts::PI;

    fn ry1() -> Circuit {
        Circuit::new(1, vec![Gate::Ry { target: 0, slot: 0 }], 1).unwrap()
    }

    #[test]
    fn single_ry_gradient() {
        let z = Observable::from_words([(1.0, "Z")]).unwrap();
        let g = gradient(&ry1(), &[PI / 2.0], None, &z).unwrap();
        assert!((g.values()[0] + 1.0).abs() < 1e-14);
        let g = gradient(&ry1(), &[0.0], None, &z).unwrap();
        assert!(g.values()[0].abs() < 1e-15);
    }

    #[test]
    fn partial_matches_gradient_entry() {
        let c = build_hea(2, 3).unwrap();
        let obs = Observable::from_words([(1.0, "ZZI"), (0.5, "XIY")]).unwrap();
        let theta: Vec<f64> = (0..c.num_params()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let g = gradient(&c, &theta, None, &obs).unwrap();
        for mu in [0, 5, 11] {
            let d = partial_derivative(&c, &theta, None, &obs, mu).unwrap();
            assert!((d - g.values()[mu]).abs() < 1e-14);
        }
        assert!(partial_derivative(&c, &theta, None, &obs, 12).is_err());
    }

    #[test]
    fn zero_projector_matches_dense_form() {
        // |0><0| on one qubit is (I + Z) / 2
        let cost = ZeroProjectorCost { circuit: ry1() };
        for th in [0.0, 0.4, 2.0] {
            assert!((cost.value(&[th]).unwrap() - 0.5 * (1.0 + th.cos())).abs() < 1e-15);
            assert!((cost.gradient(&[th]).unwrap().values()[0] + 0.5 * th.sin()).abs() < 1e-15);
            assert!((cost.partial(&[th], 0).unwrap() + 0.5 * th.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn product_gradient_ignores_idle_parameter() {
        let c = Circuit::new(
            2,
            vec![Gate::Ry { target: 0, slot: 0 }, Gate::Ry { target: 1, slot: 1 }],
            2,
        )
        .unwrap();
        let z0 = Observable::from_words([(1.0, "ZI")]).unwrap();
        for other in [0.0, 0.7, 2.9] {
            let g = gradient(&c, &[PI / 2.0, other], None, &z0).unwrap();
            assert!((g.values()[0] + 1.0).abs() < 1e-14);
            assert!(g.values()[1].abs() < 1e-15);
        }
    }

    #[test]
    fn shift_matches_finite_difference_on_hea() {
        let c = build_hea(2, 3).unwrap();
        let obs = Observable::from_words([(0.6, "ZZI"), (-0.4, "XIY"), (1.0, "IIZ")]).unwrap();
        let theta: Vec<f64> = (0..c.num_params()).map(|i| 0.37 * i as f64 - 1.0).collect();
        let g = gradient(&c, &theta, None, &obs).unwrap();
        let h = 1e-5;
        for mu in 0..theta.len() {
            let mut tp = theta.clone();
            tp[mu] += h;
            let mut tm = theta.clone();
            tm[mu] -= h;
            let fd = (expectation_cost(&c, &tp, None, &obs).unwrap()
                - expectation_cost(&c, &tm, None, &obs).unwrap())
                / (2.0 * h);
            assert!((fd - g.values()[mu]).abs() < 1e-8, "mu={mu}");
        }
    }

    #[test]
    fn gradient_rejects_bad_inputs() {
        let z2 = Observable::from_words([(1.0, "ZZ")]).unwrap();
        assert!(matches!(gradient(&ry1(), &[0.0], None, &z2), Err(Error::QubitMismatch { .. })));
        let z = Observable::from_words([(1.0, "Z")]).unwrap();
        assert!(matches!(gradient(&ry1(), &[], None, &z), Err(Error::ParamLength { .. })));
        assert!(Gradient::new(vec![f64::NAN]).is_err());
    }
}
