//! Layered ansatz constructors. Every builder tags its layers so the
//! block-diagonal QFIM can find them.

use std::f64::consts::PI;

use super::circuit::{Circuit, Gate, Layer};
use crate::distributions::Prng;
use crate::error::{Error, Result};

fn need_two_qubits(qubits: usize) -> Result<()> {
    if qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "ansatz needs at least 2 qubits, got {qubits}"
        )));
    }
    Ok(())
}

fn need_layers(layers: usize) -> Result<()> {
    if layers == 0 {
        return Err(Error::InvalidArgument("ansatz needs at least one layer".into()));
    }
    Ok(())
}

/// Strongly-entangling layers: a `Rot` on every qubit followed by a CNOT ring
/// `i -> (i + r) mod q` with range `r = 1 + (layer mod (q - 1))`.
///
/// Parameters are laid out with shape `(layers, qubits, 3)`. On two qubits the
/// ring collapses to the single CNOT `0 -> 1`.
pub fn build_strongly_entangling(layers: usize, qubits: usize) -> Result<Circuit> {
    need_layers(layers)?;
    need_two_qubits(qubits)?;
    let mut gates = Vec::new();
    let mut tags = Vec::with_capacity(layers);
    for l in 0..layers {
        let start = gates.len();
        for q in 0..qubits {
            let base = (l * qubits + q) * 3;
            gates.push(Gate::Rot {
                target: q,
                slots: [base, base + 1, base + 2],
            });
        }
        if qubits == 2 {
            gates.push(Gate::Cnot { control: 0, target: 1 });
        } else {
            let r = 1 + l % (qubits - 1);
            for q in 0..qubits {
                gates.push(Gate::Cnot {
                    control: q,
                    target: (q + r) % qubits,
                });
            }
        }
        tags.push(Layer { gates: start..gates.len() });
    }
    Circuit::new(qubits, gates, layers * qubits * 3)?.with_layers(tags)
}

/// Random-axis layered circuit of the kind used in barren-plateau studies:
/// a fixed `RY(pi/4)` on every qubit, then per layer one single-parameter
/// rotation per qubit (axis drawn from `seed`) and a CZ ladder on neighbours.
pub fn build_two_design(layers: usize, qubits: usize, seed: u64) -> Result<Circuit> {
    need_layers(layers)?;
    need_two_qubits(qubits)?;
    let mut rng = Prng::derive(seed, &[0x2de5_16e0]);
    let mut gates: Vec<Gate> = (0..qubits)
        .map(|q| Gate::FixedRy { target: q, angle: PI / 4.0 })
        .collect();
    let mut tags = Vec::with_capacity(layers);
    for l in 0..layers {
        let start = gates.len();
        for q in 0..qubits {
            let slot = l * qubits + q;
            gates.push(match rng.below(3) {
                0 => Gate::Rx { target: q, slot },
                1 => Gate::Ry { target: q, slot },
                _ => Gate::Rz { target: q, slot },
            });
        }
        for q in 0..qubits - 1 {
            gates.push(Gate::Cz { control: q, target: q + 1 });
        }
        tags.push(Layer { gates: start..gates.len() });
    }
    Circuit::new(qubits, gates, layers * qubits)?.with_layers(tags)
}

/// Hardware-efficient ansatz: per layer `RY` then `RZ` on each qubit, then a
/// CNOT chain `i -> i + 1`.
pub fn build_hea(layers: usize, qubits: usize) -> Result<Circuit> {
    need_layers(layers)?;
    need_two_qubits(qubits)?;
    let mut gates = Vec::new();
    let mut tags = Vec::with_capacity(layers);
    for l in 0..layers {
        let start = gates.len();
        for q in 0..qubits {
            let base = (l * qubits + q) * 2;
            gates.push(Gate::Ry { target: q, slot: base });
            gates.push(Gate::Rz { target: q, slot: base + 1 });
        }
        for q in 0..qubits - 1 {
            gates.push(Gate::Cnot { control: q, target: q + 1 });
        }
        tags.push(Layer { gates: start..gates.len() });
    }
    Circuit::new(qubits, gates, layers * qubits * 2)?.with_layers(tags)
}

fn prepend(circuit: &Circuit, prefix: Vec<Gate>) -> Result<Circuit> {
    if prefix.len() > circuit.num_qubits() {
        return Err(Error::InvalidArgument(format!(
            "{} features for {} qubits",
            prefix.len(),
            circuit.num_qubits()
        )));
    }
    let offset = prefix.len();
    let mut gates = prefix;
    gates.extend_from_slice(circuit.gates());
    let out = Circuit::new(circuit.num_qubits(), gates, circuit.num_params())?;
    match circuit.layers() {
        Some(layers) => out.with_layers(
            layers
                .iter()
                .map(|l| Layer {
                    gates: l.gates.start + offset..l.gates.end + offset,
                })
                .collect(),
        ),
        None => Ok(out),
    }
}

/// Prepends `RY(f_j)` on qubit `j` for each concrete feature value.
pub fn embed_angles(circuit: &Circuit, features: &[f64]) -> Result<Circuit> {
    let prefix = features
        .iter()
        .enumerate()
        .map(|(j, &f)| Gate::FixedRy { target: j, angle: f })
        .collect();
    prepend(circuit, prefix)
}

/// Like [`embed_angles`] but leaves the angles as feature slots bound at
/// execution time, so one circuit serves a whole dataset.
pub fn with_angle_embedding(circuit: &Circuit, num_features: usize) -> Result<Circuit> {
    let prefix = (0..num_features)
        .map(|j| Gate::EmbedRy { target: j, feature: j })
        .collect();
    prepend(circuit, prefix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::apply_circuit;

    fn count(c: &Circuit, pred: impl Fn(&Gate) -> bool) -> usize {
        c.gates().iter().filter(|g| pred(g)).count()
    }

    #[test]
    fn strongly_entangling_shapes() {
        assert_eq!(build_strongly_entangling(8, 4).unwrap().num_params(), 96);
        assert_eq!(build_strongly_entangling(5, 4).unwrap().num_params(), 60);
        let small = build_strongly_entangling(1, 2).unwrap();
        assert_eq!(small.num_params(), 6);
        assert_eq!(count(&small, |g| matches!(g, Gate::Rot { .. })), 2);
        assert_eq!(count(&small, |g| matches!(g, Gate::Cnot { .. })), 1);
        assert!(build_strongly_entangling(2, 1).is_err());
    }

    #[test]
    fn strongly_entangling_range_schedule() {
        let c = build_strongly_entangling(3, 4).unwrap();
        let ranges: Vec<usize> = c
            .layers()
            .unwrap()
            .iter()
            .map(|l| match c.gates()[l.gates.start + 4] {
                Gate::Cnot { control, target } => (target + 4 - control) % 4,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(ranges, vec![1, 2, 3]);
    }

    #[test]
    fn two_design_shapes_and_determinism() {
        let c = build_two_design(5, 4, 7).unwrap();
        assert_eq!(c.num_params(), 20);
        let small = build_two_design(1, 2, 3).unwrap();
        assert_eq!(small.num_params(), 2);
        assert_eq!(count(&small, |g| matches!(g, Gate::FixedRy { .. })), 2);
        assert_eq!(count(&small, |g| matches!(g, Gate::Cz { .. })), 1);
        assert_eq!(build_two_design(5, 4, 11).unwrap(), build_two_design(5, 4, 11).unwrap());
    }

    #[test]
    fn hea_shapes() {
        assert_eq!(build_hea(5, 4).unwrap().num_params(), 40);
        assert_eq!(build_hea(1, 2).unwrap().num_params(), 4);
        let c = build_hea(1, 3).unwrap();
        assert_eq!(count(&c, |g| !g.is_entangler()), 6);
        assert_eq!(count(&c, Gate::is_entangler), 2);
    }

    #[test]
    fn embedding_examples() {
        let empty = Circuit::new(1, vec![], 0).unwrap();
        let s = apply_circuit(&embed_angles(&empty, &[PI]).unwrap(), &[], None).unwrap();
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);

        let two = Circuit::new(2, vec![], 0).unwrap();
        let s = apply_circuit(&embed_angles(&two, &[0.0, 0.0]).unwrap(), &[], None).unwrap();
        assert_eq!(s, crate::simulator::StateVector::zero(2));

        let s = apply_circuit(&embed_angles(&two, &[PI / 2.0, 0.0]).unwrap(), &[], None).unwrap();
        let h = 0.5f64.sqrt();
        assert!((s.amplitudes()[0b00].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[0b10].re - h).abs() < 1e-15);
        assert!(s.amplitudes()[0b01].norm() < 1e-15);

        assert!(embed_angles(&two, &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn slot_embedding_matches_concrete_embedding() {
        let base = build_hea(2, 3).unwrap();
        let f = [0.4, 1.9, 2.7];
        let theta: Vec<f64> = (0..base.num_params()).map(|i| 0.1 * i as f64).collect();
        let a = apply_circuit(&embed_angles(&base, &f).unwrap(), &theta, None).unwrap();
        let slotted = with_angle_embedding(&base, 3).unwrap();
        assert_eq!(slotted.num_features(), 3);
        let b = apply_circuit(&slotted, &theta, Some(&f)).unwrap();
        assert_eq!(a, b);
        assert_eq!(slotted.layers().unwrap()[0].gates.start, 3);
    }
}
