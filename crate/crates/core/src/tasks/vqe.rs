use crate::differentiation::{expectation_cost, gradient, CostFunction, Gradient};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, SquareMatrix};
use crate::simulator::{Circuit, Observable};

/// Largest register the dense oracle accepts.
pub const MAX_ORACLE_QUBITS: usize = 10;

/// Minimum eigenvalue of `H` by dense diagonalization.
///
/// A complex Hermitian `H = A + iB` has the same spectrum (each value doubled)
/// as the real symmetric `[[A, -B], [B, A]]`; when `B = 0` the real part is
/// diagonalized directly.
pub fn exact_ground_energy(h: &Observable) -> Result<f64> {
    let q = h.num_qubits();
    if q > MAX_ORACLE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "dense diagonalization limited to {MAX_ORACLE_QUBITS} qubits, got {q}"
        )));
    }
    let n = 1usize << q;
    let (re, im) = h.to_dense();
    let m = if im.iter().all(|&x| x == 0.0) {
        SquareMatrix::from_row_major(n, re)?
    } else {
        let mut big = SquareMatrix::zeros(2 * n);
        for r in 0..n {
            for c in 0..n {
                let a = re[r * n + c];
                let b = im[r * n + c];
                big.set(r, c, a);
                big.set(r + n, c + n, a);
                big.set(r, c + n, -b);
                big.set(r + n, c, b);
            }
        }
        big
    };
    let ev = hermitian_eigenvalues(&m)?;
    Ok(*ev.last().expect("non-empty spectrum"))
}

/// Energy minimization `C(theta) = <psi(theta)|H|psi(theta)>`.
#[derive(Debug, Clone)]
pub struct VqeTask {
    pub hamiltonian: Observable,
    pub circuit: Circuit,
    pub exact_ground_energy: f64,
}

impl VqeTask {
    pub fn new(hamiltonian: Observable, circuit: Circuit) -> Result<Self> {
        if hamiltonian.num_qubits() != circuit.num_qubits() {
            return Err(Error::QubitMismatch {
                left: hamiltonian.num_qubits(),
                right: circuit.num_qubits(),
            });
        }
        let exact_ground_energy = exact_ground_energy(&hamiltonian)?;
        Ok(Self {
            hamiltonian,
            circuit,
            exact_ground_energy,
        })
    }
}

pub fn vqe_cost(task: &VqeTask, theta: &[f64]) -> Result<f64> {
    expectation_cost(&task.circuit, theta, None, &task.hamiltonian)
}

impl CostFunction for VqeTask {
    fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        vqe_cost(self, theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Gradient> {
        gradient(&self.circuit, theta, None, &self.hamiltonian)
    }
}
