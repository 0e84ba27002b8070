use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{shifted_pairs, Gradient};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::simulator::{Circuit, StateVector};

/// Largest parameter count for which the full QFIM is computed.
pub const EXACT_QFIM_MAX_PARAMS: usize = 64;

/// Default `eps` for `F + eps I`.
pub const DEFAULT_STABILIZER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfimFidelity {
    Exact,
    BlockDiagonal,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QfimMatrix {
    pub matrix: SquareMatrix,
    pub fidelity: QfimFidelity,
}

impl QfimMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

// (psi(theta + pi/2) - psi(theta - pi/2)) / (4 sin(pi/4)) = d psi / d theta
const DERIVATIVE_SCALE: f64 = 1.0 / (2.0 * SQRT_2);

/// `F_{mu nu} = 4 Re(<d_mu|d_nu> - <d_mu|psi><psi|d_nu>)` over one block.
fn assemble(psi: &StateVector, derivs: &[Vec<Complex64>], out: &mut SquareMatrix, offsets: &[usize]) {
    let amps = psi.amplitudes();
    let overlaps: Vec<Complex64> = derivs
        .iter()
        .map(|d| d.iter().zip(amps).map(|(x, a)| x.conj() * a).sum())
        .collect();
    for i in 0..derivs.len() {
        for j in i..derivs.len() {
            let dd: Complex64 = derivs[i].iter().zip(&derivs[j]).map(|(x, y)| x.conj() * y).sum();
            // <d_i|psi><psi|d_j> = overlaps[i] * conj(overlaps[j])
            let v = 4.0 * (dd - overlaps[i] * overlaps[j].conj()).re;
            out.set(offsets[i], offsets[j], v);
            out.set(offsets[j], offsets[i], v);
        }
    }
}

fn derivative_states(
    circuit: &Circuit,
    theta: &[f64],
    features: Option<&[f64]>,
    start: &StateVector,
    ops: std::ops::Range<usize>,
    slots: &[usize],
) -> Vec<Vec<Complex64>> {
    shifted_pairs(circuit, theta, features, start, ops, slots, |plus, minus| {
        plus.scaled_difference(minus, DERIVATIVE_SCALE)
    })
}

/// Full pure-state QFIM. Limited to [`EXACT_QFIM_MAX_PARAMS`] parameters.
pub fn qfim_exact(circuit: &Circuit, theta: &[f64], features: Option<&[f64]>) -> Result<QfimMatrix> {
    circuit.check_inputs(theta, features)?;
    let p = circuit.num_params();
    if p > EXACT_QFIM_MAX_PARAMS {
        return Err(Error::QfimTooLarge {
            params: p,
            limit: EXACT_QFIM_MAX_PARAMS,
        });
    }
    let slots: Vec<usize> = (0..p).collect();
    let start = StateVector::zero(circuit.num_qubits());
    let all_ops = 0..circuit.ops().len();
    let derivs = derivative_states(circuit, theta, features, &start, all_ops.clone(), &slots);
    let mut psi = start;
    circuit.run_ops(&mut psi, all_ops, theta, features, None);
    let mut m = SquareMatrix::zeros(p);
    assemble(&psi, &derivs, &mut m, &slots);
    Ok(QfimMatrix {
        matrix: m,
        fidelity: QfimFidelity::Exact,
    })
}

/// One QFIM block per tagged layer, each computed on the circuit truncated
/// after that layer; cross-layer entries are zero.
pub fn qfim_block_diagonal(circuit: &Circuit, theta: &[f64], features: Option<&[f64]>) -> Result<QfimMatrix> {
    circuit.check_inputs(theta, features)?;
    let (Some(layers), Some(params)) = (circuit.layers(), circuit.layer_params()) else {
        return Err(Error::Untagged);
    };
    let p = circuit.num_params();
    if params.iter().map(Vec::len).sum::<usize>() != p {
        return Err(Error::Untagged);
    }
    let mut m = SquareMatrix::zeros(p);
    let mut state = StateVector::zero(circuit.num_qubits());
    let mut pos = 0;
    for (layer, slots) in layers.iter().zip(&params) {
        let begin = circuit.gate_op_start(layer.gates.start);
        let end = circuit.gate_op_start(layer.gates.end);
        circuit.run_ops(&mut state, pos..begin, theta, features, None);
        if !slots.is_empty() {
            let derivs = derivative_states(circuit, theta, features, &state, begin..end, slots);
            let mut after = state.clone();
            circuit.run_ops(&mut after, begin..end, theta, features, None);
            assemble(&after, &derivs, &mut m, slots);
            state = after;
        } else {
            circuit.run_ops(&mut state, begin..end, theta, features, None);
        }
        pos = end;
    }
    Ok(QfimMatrix {
        matrix: m,
        fidelity: QfimFidelity::BlockDiagonal,
    })
}

/// Rank-one surrogate `g g^T` built from a task gradient.
pub fn qfim_empirical(gradient: &Gradient) -> QfimMatrix {
    let g = gradient.values();
    let p = g.len();
    let mut m = SquareMatrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            m.set(i, j, g[i] * g[j]);
        }
    }
    QfimMatrix {
        matrix: m,
        fidelity: QfimFidelity::Empirical,
    }
}

/// Picks the most faithful QFIM the parameter count allows: exact up to
/// [`EXACT_QFIM_MAX_PARAMS`], then block-diagonal when the circuit has layer
/// tags, then the empirical surrogate from `task_gradient`.
pub fn qfim(
    circuit: &Circuit,
    theta: &[f64],
    features: Option<&[f64]>,
    task_gradient: Option<&Gradient>,
) -> Result<QfimMatrix> {
    if circuit.num_params() <= EXACT_QFIM_MAX_PARAMS {
        return qfim_exact(circuit, theta, features);
    }
    if circuit.layers().is_some() {
        return qfim_block_diagonal(circuit, theta, features);
    }
    match task_gradient {
        Some(g) => Ok(qfim_empirical(g)),
        None => Err(Error::Untagged),
    }
}

/// `F + eps I`.
pub fn stabilize(f: &QfimMatrix, eps: f64) -> Result<QfimMatrix> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("stabilizer must be positive, got {eps}")));
    }
    let mut out = f.clone();
    for i in 0..out.dim() {
        let v = out.matrix.get(i, i);
        out.matrix.set(i, i, v + eps);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use crate::simulator::{build_strongly_entangling, Gate};

    #[test]
    fn single_ry_is_one() {
        let c = Circuit::new(1, vec![Gate::Ry { target: 0, slot: 0 }], 1).unwrap();
        for theta in [0.0, 0.4, 2.0, -3.1] {
            let f = qfim_exact(&c, &[theta], None).unwrap();
            assert!((f.matrix.get(0, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rz_on_zero_has_no_information() {
        let c = Circuit::new(1, vec![Gate::Rz { target: 0, slot: 0 }], 1).unwrap();
        let f = qfim_exact(&c, &[0.8], None).unwrap();
        assert!(f.matrix.get(0, 0).abs() < 1e-15);
    }

    #[test]
    fn too_many_params_for_exact() {
        let c = build_strongly_entangling(8, 4).unwrap();
        let theta = vec![0.1; 96];
        assert!(matches!(qfim_exact(&c, &theta, None), Err(Error::QfimTooLarge { .. })));
        let f = qfim(&c, &theta, None, None).unwrap();
        assert_eq!(f.fidelity, QfimFidelity::BlockDiagonal);
    }

    #[test]
    fn single_layer_block_equals_exact() {
        let c = build_strongly_entangling(1, 3).unwrap();
        let theta: Vec<f64> = (0..9).map(|i| 0.3 * i as f64 + 0.1).collect();
        let a = qfim_exact(&c, &theta, None).unwrap();
        let b = qfim_block_diagonal(&c, &theta, None).unwrap();
        for (x, y) in a.matrix.as_slice().iter().zip(b.matrix.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn block_diagonal_off_blocks_are_zero() {
        let c = build_strongly_entangling(3, 3).unwrap();
        let theta: Vec<f64> = (0..27).map(|i| (i as f64 * 0.71).sin()).collect();
        let b = qfim_block_diagonal(&c, &theta, None).unwrap();
        for i in 0..27 {
            for j in 0..27 {
                if i / 9 != j / 9 {
                    assert_eq!(b.matrix.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn untagged_block_diagonal_errors() {
        let c = Circuit::new(1, vec![Gate::Ry { target: 0, slot: 0 }], 1).unwrap();
        assert!(matches!(qfim_block_diagonal(&c, &[0.0], None), Err(Error::Untagged)));
    }

    #[test]
    fn empirical_examples() {
        let f = qfim_empirical(&Gradient::new(vec![1.0, 2.0]).unwrap());
        assert_eq!(f.matrix.rows(), vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        let z = qfim_empirical(&Gradient::new(vec![0.0; 3]).unwrap());
        assert!(z.matrix.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stabilize_examples() {
        let zero = QfimMatrix {
            matrix: SquareMatrix::zeros(2),
            fidelity: QfimFidelity::Exact,
        };
        let s = stabilize(&zero, 1e-6).unwrap();
        assert_eq!(s.matrix.rows(), vec![vec![1e-6, 0.0], vec![0.0, 1e-6]]);
        let logdet: f64 = hermitian_eigenvalues(&s.matrix).unwrap().iter().map(|l| l.ln()).sum();
        assert!((logdet - 2.0 * 1e-6f64.ln()).abs() < 1e-9);
        let id = QfimMatrix {
            matrix: SquareMatrix::identity(2),
            fidelity: QfimFidelity::Exact,
        };
        let s = stabilize(&id, 1e-6).unwrap();
        assert_eq!(s.matrix.get(0, 0), 1.0 + 1e-6);
        assert!(stabilize(&id, 0.0).is_err());
        assert!(stabilize(&id, -1.0).is_err());
    }
}
