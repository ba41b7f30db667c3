//! Pauli-string algebra, operator sums and statevectors.
//!
//! Bit convention: qubit `q` (0-based) is bit `q` of the basis-state index,
//! i.e. `m = x₁·2⁰ + x₂·2¹ + …`. Text forms list the first qubit leftmost.

mod operator;
mod state;
mod string;

pub use operator::{apply_operator, to_dense, PauliOperator, DROP_TOLERANCE, MAX_DENSE_QUBITS};
pub use state::{inner, StateVector, MAX_STATE_QUBITS};
pub use string::{mul_strings, Pauli, PauliString, MAX_QUBITS};

pub(crate) use state::dot;
