//! Dense statevector simulation of parameterized circuits.

mod ansatz;
mod circuit;
mod observable;
mod state;

pub use ansatz::{build_hea, build_strongly_entangling, build_two_design, embed_angles, with_angle_embedding};
pub use circuit::{apply_circuit, Circuit, Gate, Layer};
pub use observable::{expectation, Observable, Pauli, PauliTerm};
pub use state::{Axis, StateVector};
