use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::state::StateVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub word: Vec<Pauli>,
}

impl PauliTerm {
    /// Bit masks (flip, phase) and the count of `Y` factors, using the
    /// qubit-0-is-MSB convention.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.word.len();
        let (mut flip, mut phase, mut ny) = (0usize, 0usize, 0u32);
        for (k, p) in self.word.iter().enumerate() {
            let bit = 1 << (n - 1 - k);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ny += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, ny)
    }

    /// `P|i> = i^ny (-1)^popcount(i & phase) |i ^ flip>`.
    fn action(&self) -> impl Fn(usize) -> (usize, Complex64) {
        let (flip, phase, ny) = self.masks();
        let base = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        move |i| {
            let sign = if (i & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (i ^ flip, base * sign)
        }
    }
}

/// Real linear combination of Pauli words, Hermitian by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Observable {
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidObservable("zero qubits".into()));
        }
        for t in &terms {
            if t.word.len() != num_qubits {
                return Err(Error::InvalidObservable(format!(
                    "word of length {} in a {num_qubits}-qubit observable",
                    t.word.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidObservable("non-finite coefficient".into()));
            }
        }
        Ok(Self { num_qubits, terms })
    }

    /// Builds from `(coefficient, word)` pairs such as `(0.5, "ZI")`.
    pub fn from_words<'a>(terms: impl IntoIterator<Item = (f64, &'a str)>) -> Result<Self> {
        let mut parsed = Vec::new();
        for (coeff, w) in terms {
            let word = w
                .chars()
                .map(|c| {
                    Pauli::from_char(c)
                        .ok_or_else(|| Error::InvalidObservable(format!("illegal Pauli character {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            parsed.push(PauliTerm { coeff, word });
        }
        let q = parsed
            .first()
            .map(|t| t.word.len())
            .ok_or_else(|| Error::InvalidObservable("no terms".into()))?;
        Self::new(q, parsed)
    }

    /// Tensor product of `Z` on the listed qubits.
    pub fn z_product(num_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut word = vec![Pauli::I; num_qubits];
        for &q in qubits {
            if q >= num_qubits {
                return Err(Error::InvalidObservable(format!("qubit {q} out of range")));
            }
            word[q] = Pauli::Z;
        }
        Self::new(num_qubits, vec![PauliTerm { coeff: 1.0, word }])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Dense `2^q x 2^q` matrix as separate real and imaginary parts
    /// (row-major).
    pub fn to_dense(&self) -> (Vec<f64>, Vec<f64>) {
        let dim = 1usize << self.num_qubits;
        let mut re = vec![0.0; dim * dim];
        let mut im = vec![0.0; dim * dim];
        for t in &self.terms {
            let act = t.action();
            for col in 0..dim {
                let (row, ph) = act(col);
                re[row * dim + col] += t.coeff * ph.re;
                im[row * dim + col] += t.coeff * ph.im;
            }
        }
        (re, im)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let w: String = t.word.iter().map(|p| p.as_char()).collect();
            write!(f, "{} {}", t.coeff, w)?;
        }
        Ok(())
    }
}

/// `<psi|O|psi>`.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    if state.num_qubits() != obs.num_qubits() {
        return Err(Error::QubitMismatch {
            left: state.num_qubits(),
            right: obs.num_qubits(),
        });
    }
    let amps = state.amplitudes();
    let mut total = Complex64::new(0.0, 0.0);
    for t in &obs.terms {
        let act = t.action();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in amps.iter().enumerate() {
            let (j, ph) = act(i);
            acc += amps[j].conj() * ph * a;
        }
        total += acc * t.coeff;
    }
    let scale: f64 = 1.0 + obs.terms.iter().map(|t| t.coeff.abs()).sum::<f64>();
    debug_assert!(total.im.abs() <= 1e-10 * scale, "imaginary residue {}", total.im);
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::state::Axis;
    use std::f64::consts::PI;

    #[test]
    fn z_on_basis_states() {
        let z = Observable::from_words([(1.0, "Z")]).unwrap();
        assert_eq!(expectation(&StateVector::zero(1), &z).unwrap(), 1.0);
        assert_eq!(expectation(&StateVector::basis(1, 1), &z).unwrap(), -1.0);
        let mut s = StateVector::zero(1);
        s.apply_rotation(Axis::Y, 0, PI / 2.0);
        assert!(expectation(&s, &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn identity_has_unit_expectation() {
        let id = Observable::from_words([(1.0, "III")]).unwrap();
        let mut s = StateVector::zero(3);
        s.apply_rotation(Axis::X, 0, 0.4);
        s.apply_rotation(Axis::Y, 2, 2.1);
        s.apply_cnot(0, 1);
        assert!((expectation(&s, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_dense_matrix() {
        let obs = Observable::from_words([(0.3, "XY"), (-0.7, "YZ"), (0.25, "XX"), (1.1, "IZ")]).unwrap();
        let mut s = StateVector::zero(2);
        s.apply_rotation(Axis::X, 0, 0.9);
        s.apply_rotation(Axis::Y, 1, -1.3);
        s.apply_cnot(0, 1);
        s.apply_rotation(Axis::Z, 1, 0.6);
        let (re, im) = obs.to_dense();
        let a = s.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                acc += a[r].conj() * Complex64::new(re[r * 4 + c], im[r * 4 + c]) * a[c];
            }
        }
        assert!(acc.im.abs() < 1e-12);
        assert!((acc.re - expectation(&s, &obs).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn word_length_checks() {
        assert!(Observable::from_words([(1.0, "ZI"), (1.0, "Z")]).is_err());
        assert!(Observable::from_words([(1.0, "ZQ")]).is_err());
        let z = Observable::from_words([(1.0, "Z")]).unwrap();
        assert!(matches!(
            expectation(&StateVector::zero(2), &z),
            Err(Error::QubitMismatch { .. })
        ));
    }
}
