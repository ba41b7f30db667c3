//! Dense oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use vqspec::pauli::{Pauli, PauliOperator, PauliString, StateVector};

pub const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// Kronecker product with the last qubit leftmost (qubit 0 is the low bit).
pub fn kron_string(s: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..s.n_qubits()).rev() {
        m = m.kronecker(&pauli_matrix(s.letter(q)));
    }
    m
}

pub fn kron_operator(op: &PauliOperator) -> DMatrix<Complex64> {
    let d = 1 << op.n_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (coef, s) in op.terms() {
        m += kron_string(s) * *coef;
    }
    m
}

/// `exp(-i H t / ħ)` by Hermitian eigendecomposition.
pub fn propagator(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = eig
        .eigenvalues
        .map(|e| Complex64::from_polar(1.0, -e * t / vqspec::units::HBAR_EV_FS));
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn column(s: &StateVector) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(s.dim(), 1, s.amplitudes())
}

pub fn string_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(0usize..4, n)
        .prop_map(|v| PauliString::from_letters(&v.iter().map(|&k| LETTERS[k]).collect::<Vec<_>>()).unwrap())
}

pub fn operator_strategy(n: usize, max_terms: usize) -> impl Strategy<Value = PauliOperator> {
    proptest::collection::vec((string_strategy(n), -1.0f64..1.0, -1.0f64..1.0), 1..=max_terms).prop_map(
        move |terms| PauliOperator::from_terms(n, terms.into_iter().map(|(s, re, im)| (c(re, im), s))).unwrap(),
    )
}

/// Hermitian: real coefficients only.
pub fn hermitian_strategy(n: usize, max_terms: usize) -> impl Strategy<Value = PauliOperator> {
    proptest::collection::vec((string_strategy(n), -1.0f64..1.0), 1..=max_terms)
        .prop_map(move |terms| PauliOperator::from_terms(n, terms.into_iter().map(|(s, re)| (c(re, 0.0), s))).unwrap())
}

pub fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("nonzero", move |v| {
        let mut s = StateVector::from_amplitudes(n, v.into_iter().map(|(a, b)| c(a, b)).collect()).ok()?;
        (s.normalize() > 1e-3).then_some(s)
    })
}
