#![allow(dead_code)]

use hyperinit_core::distributions::Prng;
use hyperinit_core::simulator::{Circuit, Gate, Observable};

/// Random gate list over `qubits` wires with `depth` gates drawn from every
/// gate kind. Parameter slots are numbered in order of appearance.
pub fn random_circuit(qubits: usize, depth: usize, rng: &mut Prng) -> Circuit {
    let mut gates = Vec::with_capacity(depth);
    let mut slot = 0;
    for _ in 0..depth {
        let t = rng.below(qubits as u64) as usize;
        let kind = if qubits > 1 { rng.below(7) } else { rng.below(5) };
        let gate = match kind {
            0 => Gate::Rx { target: t, slot },
            1 => Gate::Ry { target: t, slot },
            2 => Gate::Rz { target: t, slot },
            3 => Gate::Rot { target: t, slots: [slot, slot + 1, slot + 2] },
            4 => Gate::FixedRy { target: t, angle: rng.uniform(-3.0, 3.0) },
            k => {
                let mut c = rng.below(qubits as u64 - 1) as usize;
                if c >= t {
                    c += 1;
                }
                if k == 5 {
                    Gate::Cnot { control: c, target: t }
                } else {
                    Gate::Cz { control: c, target: t }
                }
            }
        };
        slot += gate.param_slots().len();
        gates.push(gate);
    }
    Circuit::new(qubits, gates, slot).expect("generated circuit is valid")
}

pub fn random_theta(p: usize, rng: &mut Prng) -> Vec<f64> {
    (0..p).map(|_| rng.uniform(-std::f64::consts::PI, std::f64::consts::PI)).collect()
}

/// A sum of `terms` random Pauli words with coefficients in [-1, 1].
pub fn random_observable(qubits: usize, terms: usize, rng: &mut Prng) -> Observable {
    let letters = ['I', 'X', 'Y', 'Z'];
    let words: Vec<(f64, String)> = (0..terms)
        .map(|_| {
            let w: String = (0..qubits).map(|_| letters[rng.below(4) as usize]).collect();
            (rng.uniform(-1.0, 1.0), w)
        })
        .collect();
    Observable::from_words(words.iter().map(|(c, w)| (*c, w.as_str()))).unwrap()
}
