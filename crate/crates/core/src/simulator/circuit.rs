use std::ops::Range;

use serde::Serialize;

use super::state::{Axis, StateVector};
use crate::error::{Error, Result};

/// One gate of a circuit description. Parameterized gates reference slots of
/// the flat parameter vector; `EmbedRy` references a slot of the feature
/// vector supplied at execution time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Gate {
    Rx { target: usize, slot: usize },
    Ry { target: usize, slot: usize },
    Rz { target: usize, slot: usize },
    /// `RZ(slots[2]) · RY(slots[1]) · RZ(slots[0])`.
    Rot { target: usize, slots: [usize; 3] },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
    FixedRy { target: usize, angle: f64 },
    EmbedRy { target: usize, feature: usize },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::Rot { .. } => "Rot",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cz { .. } => "CZ",
            Gate::FixedRy { .. } => "RY-fixed",
            Gate::EmbedRy { .. } => "RY-embed",
        }
    }

    pub fn param_slots(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { slot, .. } | Gate::Ry { slot, .. } | Gate::Rz { slot, .. } => vec![slot],
            Gate::Rot { slots, .. } => slots.to_vec(),
            _ => Vec::new(),
        }
    }

    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rx { target, .. }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::Rot { target, .. }
            | Gate::FixedRy { target, .. }
            | Gate::EmbedRy { target, .. } => (target, None),
            Gate::Cnot { control, target } | Gate::Cz { control, target } => (target, Some(control)),
        }
    }

    pub fn is_entangler(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Angle {
    Param(usize),
    Feature(usize),
    Fixed(f64),
}

/// Primitive operation after `Rot` decomposition. Every parameter slot maps
/// to exactly one rotation op, so each slot is individually shiftable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    Rotation { axis: Axis, target: usize, angle: Angle },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

/// A contiguous run of gates forming one ansatz layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    pub gates: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    num_params: usize,
    num_features: usize,
    layers: Option<Vec<Layer>>,
    ops: Vec<Op>,
    // gate index -> first op index; one extra entry for the end
    gate_op_start: Vec<usize>,
    // parameter slot -> op index
    slot_op: Vec<usize>,
}

impl Circuit {
    /// Validates and compiles a gate list. Every slot in `0..num_params` must be
    /// referenced by exactly one gate; feature slots must cover `0..f` once each.
    pub fn new(num_qubits: usize, gates: Vec<Gate>, num_params: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit needs at least one qubit".into()));
        }
        let mut slot_seen = vec![false; num_params];
        let mut features: Vec<usize> = Vec::new();
        for (gi, g) in gates.iter().enumerate() {
            let (t, c) = g.qubits();
            if t >= num_qubits || c.is_some_and(|c| c >= num_qubits) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {gi} ({}) acts outside {num_qubits} qubits",
                    g.name()
                )));
            }
            if c == Some(t) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {gi} ({}) has control equal to target",
                    g.name()
                )));
            }
            for s in g.param_slots() {
                if s >= num_params {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {gi} references slot {s} >= {num_params}"
                    )));
                }
                if std::mem::replace(&mut slot_seen[s], true) {
                    return Err(Error::InvalidCircuit(format!("slot {s} used by more than one gate")));
                }
            }
            if let Gate::EmbedRy { feature, .. } = *g {
                features.push(feature);
            }
        }
        if let Some(s) = slot_seen.iter().position(|seen| !seen) {
            return Err(Error::InvalidCircuit(format!("slot {s} is not used by any gate")));
        }
        features.sort_unstable();
        if features.iter().enumerate().any(|(i, &f)| i != f) {
            return Err(Error::InvalidCircuit(
                "embedding slots must cover 0..f exactly once".into(),
            ));
        }

        let mut ops = Vec::with_capacity(gates.len() * 2);
        let mut gate_op_start = Vec::with_capacity(gates.len() + 1);
        let mut slot_op = vec![0; num_params];
        for g in &gates {
            gate_op_start.push(ops.len());
            let mut rot = |axis, target, slot: usize, ops: &mut Vec<Op>| {
                slot_op[slot] = ops.len();
                ops.push(Op::Rotation { axis, target, angle: Angle::Param(slot) });
            };
            match *g {
                Gate::Rx { target, slot } => rot(Axis::X, target, slot, &mut ops),
                Gate::Ry { target, slot } => rot(Axis::Y, target, slot, &mut ops),
                Gate::Rz { target, slot } => rot(Axis::Z, target, slot, &mut ops),
                Gate::Rot { target, slots } => {
                    rot(Axis::Z, target, slots[0], &mut ops);
                    rot(Axis::Y, target, slots[1], &mut ops);
                    rot(Axis::Z, target, slots[2], &mut ops);
                }
                Gate::Cnot { control, target } => ops.push(Op::Cnot { control, target }),
                Gate::Cz { control, target } => ops.push(Op::Cz { control, target }),
                Gate::FixedRy { target, angle } => ops.push(Op::Rotation {
                    axis: Axis::Y,
                    target,
                    angle: Angle::Fixed(angle),
                }),
                Gate::EmbedRy { target, feature } => ops.push(Op::Rotation {
                    axis: Axis::Y,
                    target,
                    angle: Angle::Feature(feature),
                }),
            }
        }
        gate_op_start.push(ops.len());

        Ok(Self {
            num_qubits,
            gates,
            num_params,
            num_features: features.len(),
            layers: None,
            ops,
            gate_op_start,
            slot_op,
        })
    }

    /// Attaches layer tags. Layers must be ordered, disjoint gate ranges.
    pub fn with_layers(mut self, layers: Vec<Layer>) -> Result<Self> {
        let mut prev_end = 0;
        for l in &layers {
            if l.gates.start < prev_end || l.gates.end > self.gates.len() || l.gates.is_empty() {
                return Err(Error::InvalidCircuit(format!(
                    "layer range {:?} is empty, overlapping or out of bounds",
                    l.gates
                )));
            }
            prev_end = l.gates.end;
        }
        self.layers = Some(layers);
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// Number of data-feature (embedding) slots.
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layers(&self) -> Option<&[Layer]> {
        self.layers.as_deref()
    }

    /// Parameter slots owned by each layer, in op order.
    pub fn layer_params(&self) -> Option<Vec<Vec<usize>>> {
        self.layers.as_ref().map(|layers| {
            layers
                .iter()
                .map(|l| l.gates.clone().flat_map(|g| self.gates[g].param_slots()).collect())
                .collect()
        })
    }

    pub(crate) fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub(crate) fn gate_op_start(&self, gate: usize) -> usize {
        self.gate_op_start[gate]
    }

    pub(crate) fn slot_op(&self, slot: usize) -> usize {
        self.slot_op[slot]
    }

    pub(crate) fn check_inputs(&self, theta: &[f64], features: Option<&[f64]>) -> Result<()> {
        if theta.len() != self.num_params {
            return Err(Error::ParamLength {
                expected: self.num_params,
                got: theta.len(),
            });
        }
        let got = features.map_or(0, <[f64]>::len);
        if got != self.num_features {
            return Err(Error::FeatureLength {
                expected: self.num_features,
                got,
            });
        }
        Ok(())
    }

    /// Applies ops `range` to `state`. When `shift` is `Some((op, delta))`,
    /// that op's angle is offset by `delta`.
    pub(crate) fn run_ops(
        &self,
        state: &mut StateVector,
        range: Range<usize>,
        theta: &[f64],
        features: Option<&[f64]>,
        shift: Option<(usize, f64)>,
    ) {
        for k in range {
            match self.ops[k] {
                Op::Rotation { axis, target, angle } => {
                    let mut a = match angle {
                        Angle::Param(s) => theta[s],
                        Angle::Feature(f) => features.map_or(0.0, |x| x[f]),
                        Angle::Fixed(v) => v,
                    };
                    if let Some((op, delta)) = shift {
                        if op == k {
                            a += delta;
                        }
                    }
                    state.apply_rotation(axis, target, a);
                }
                Op::Cnot { control, target } => state.apply_cnot(control, target),
                Op::Cz { control, target } => state.apply_cz(control, target),
            }
        }
    }
}

/// Runs `circuit` on `|0...0>`.
pub fn apply_circuit(circuit: &Circuit, theta: &[f64], features: Option<&[f64]>) -> Result<StateVector> {
    circuit.check_inputs(theta, features)?;
    let mut state = StateVector::zero(circuit.num_qubits());
    circuit.run_ops(&mut state, 0..circuit.ops().len(), theta, features, None);
    Ok(state)
}
