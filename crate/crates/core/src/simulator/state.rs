use num_complex::Complex64;

use crate::error::{Error, Result};

/// Rotation axis of a single-qubit Pauli rotation `exp(-i θ P / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Dense pure state over `num_qubits` qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index, so the basis
/// state `|q0 q1 ... q_{n-1}>` lives at index `q0 * 2^(n-1) + ... + q_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    num_qubits: usize,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "a state needs at least one qubit");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps, num_qubits }
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut s = Self::zero(num_qubits);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        s
    }

    /// Wraps raw amplitudes. The length must be a power of two and the
    /// vector must be normalized within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized (norm^2 = {norm})"
            )));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.amps.len(), other.amps.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Computational-basis distribution of the first `m` qubits, traced over
    /// the rest. Index `k` of the result is the `m`-bit string of qubits
    /// `0..m` read most-significant first.
    pub fn marginal_probabilities(&self, m: usize) -> Vec<f64> {
        assert!(m >= 1 && m <= self.num_qubits);
        let shift = self.num_qubits - m;
        let mut out = vec![0.0; 1 << m];
        for (i, a) in self.amps.iter().enumerate() {
            out[i >> shift] += a.norm_sqr();
        }
        out
    }

    #[inline]
    fn stride(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies an arbitrary 2x2 matrix `[[m00, m01], [m10, m11]]` to `target`.
    pub fn apply_single(&mut self, target: usize, m: [[Complex64; 2]; 2]) {
        let stride = self.stride(target);
        for chunk in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    /// Applies `exp(-i angle P / 2)` with `P` the Pauli operator for `axis`.
    pub fn apply_rotation(&mut self, axis: Axis, target: usize, angle: f64) {
        let (s, c) = (0.5 * angle).sin_cos();
        let stride = self.stride(target);
        match axis {
            Axis::X => {
                for chunk in self.amps.chunks_exact_mut(2 * stride) {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a0, *a1);
                        // -i s y  ==  (s y.im, -s y.re)
                        *a0 = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                        *a1 = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
                    }
                }
            }
            Axis::Y => {
                for chunk in self.amps.chunks_exact_mut(2 * stride) {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a0, *a1);
                        *a0 = x * c - y * s;
                        *a1 = x * s + y * c;
                    }
                }
            }
            Axis::Z => {
                let p0 = Complex64::new(c, -s);
                let p1 = Complex64::new(c, s);
                for chunk in self.amps.chunks_exact_mut(2 * stride) {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    for a in lo.iter_mut() {
                        *a *= p0;
                    }
                    for a in hi.iter_mut() {
                        *a *= p1;
                    }
                }
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = self.stride(control);
        let tmask = self.stride(target);
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = self.stride(a) | self.stride(b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// `(self - other) * scale`, used for finite-shift state derivatives.
    pub(crate) fn scaled_difference(&self, other: &StateVector, scale: f64) -> Vec<Complex64> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b) * scale)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        a.amps
            .iter()
            .zip(&b.amps)
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let mut s = StateVector::zero(1);
        s.apply_rotation(Axis::Y, 0, PI);
        assert!(s.amps[0].norm() < 1e-15);
        assert!((s.amps[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = StateVector::zero(3);
        s.apply_rotation(Axis::X, 0, PI);
        assert!((s.amps[0b100].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotations_match_dense_matrices() {
        let theta = 0.731;
        let (s, c) = (theta / 2.0_f64).sin_cos();
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let mats = [
            (Axis::X, [[one * c, -i * s], [-i * s, one * c]]),
            (Axis::Y, [[one * c, -one * s], [one * s, one * c]]),
            (
                Axis::Z,
                [
                    [(-i * theta / 2.0).exp(), Complex64::new(0.0, 0.0)],
                    [Complex64::new(0.0, 0.0), (i * theta / 2.0).exp()],
                ],
            ),
        ];
        let mut start = StateVector::zero(2);
        start.apply_rotation(Axis::Y, 0, 1.1);
        start.apply_rotation(Axis::X, 1, 0.4);
        start.apply_rotation(Axis::Z, 1, 0.9);
        for (axis, m) in mats {
            for target in 0..2 {
                let mut a = start.clone();
                a.apply_rotation(axis, target, theta);
                let mut b = start.clone();
                b.apply_single(target, m);
                assert!(close(&a, &b, 1e-14), "{axis:?} on {target}");
            }
        }
    }

    #[test]
    fn cnot_and_cz_truth_tables() {
        for q in 2..=3 {
            for c in 0..q {
                for t in 0..q {
                    if c == t {
                        continue;
                    }
                    for idx in 0..(1usize << q) {
                        let bit = |k: usize| (idx >> (q - 1 - k)) & 1;
                        let mut s = StateVector::basis(q, idx);
                        s.apply_cnot(c, t);
                        let expect = if bit(c) == 1 { idx ^ (1 << (q - 1 - t)) } else { idx };
                        assert!((s.amps[expect].re - 1.0).abs() < 1e-15);

                        let mut z = StateVector::basis(q, idx);
                        z.apply_cz(c, t);
                        let sign = if bit(c) == 1 && bit(t) == 1 { -1.0 } else { 1.0 };
                        assert_eq!(z.amps[idx].re, sign);
                    }
                }
            }
        }
    }

    #[test]
    fn gate_then_inverse_is_identity() {
        let mut start = StateVector::zero(3);
        for (k, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
            start.apply_rotation(Axis::Y, k, 0.3 + k as f64);
            start.apply_rotation(axis, (k + 1) % 3, 1.7);
        }
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut s = start.clone();
            s.apply_rotation(axis, 1, 2.2);
            s.apply_rotation(axis, 1, -2.2);
            assert!(close(&s, &start, 1e-10));
        }
        let mut s = start.clone();
        s.apply_cnot(0, 2);
        s.apply_cnot(0, 2);
        assert!(close(&s, &start, 1e-15));
        s.apply_cz(1, 2);
        s.apply_cz(1, 2);
        assert!(close(&s, &start, 1e-15));
    }

    #[test]
    fn marginals_sum_to_one() {
        let mut s = StateVector::zero(3);
        s.apply_rotation(Axis::Y, 0, PI / 2.0);
        s.apply_rotation(Axis::X, 2, 0.3);
        let m = s.marginal_probabilities(1);
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
        assert!((s.marginal_probabilities(2).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_amplitudes_rejects_bad_input() {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        assert!(StateVector::from_amplitudes(vec![o, z, z]).is_err());
        assert!(StateVector::from_amplitudes(vec![o, o]).is_err());
        assert_eq!(StateVector::from_amplitudes(vec![z, o]).unwrap().num_qubits(), 1);
    }
}
