use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register we allocate a statevector for.
pub const MAX_STATE_QUBITS: usize = 26;

/// Dense statevector over `2^n` computational basis states, first qubit = LSB.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(
            (1..=MAX_STATE_QUBITS).contains(&n_qubits),
            "statevector qubit count {n_qubits} outside 1..={MAX_STATE_QUBITS}"
        );
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if !(1..=MAX_STATE_QUBITS).contains(&n_qubits) {
            return Err(Error::TooManyQubits {
                n: n_qubits,
                limit: MAX_STATE_QUBITS,
            });
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the previous norm. Zero vectors are left alone.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        n
    }

    pub fn scale(&mut self, c: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= c);
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.scale(c);
        self
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: Complex64, other: &StateVector) -> Result<()> {
        check_same(self.n_qubits, other.n_qubits)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
        Ok(())
    }

    /// `⟨self|ket⟩`.
    pub fn inner(&self, ket: &StateVector) -> Result<Complex64> {
        check_same(self.n_qubits, ket.n_qubits)?;
        Ok(dot(&self.amps, &ket.amps))
    }

    /// Largest amplitude-wise distance `max_b |self_b − other_b|`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `⟨bra|ket⟩`, conjugate-linear in `bra`.
pub fn inner(bra: &StateVector, ket: &StateVector) -> Result<Complex64> {
    bra.inner(ket)
}

#[inline]
pub(crate) fn dot(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter()
        .zip(ket)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

pub(crate) fn check_same(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::QubitMismatch { expected, found })
    }
}
