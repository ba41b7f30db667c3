//! Condensed-phase linear absorption spectra from time-dependent exciton
//! Hamiltonians encoded on qubits.
//!
//! The pipeline: chromophore trajectories ([`trajectory`]) feed qubit
//! Hamiltonians and dipole operators ([`exciton`]); states are propagated
//! either exactly ([`exact`]) or with McLachlan variational evolution
//! ([`vqa`]); dipole correlation functions ([`correlation`]) are Fourier
//! transformed into lineshapes ([`spectrum`]). [`job`] strings it together.

pub mod correlation;
pub mod error;
pub mod exact;
pub mod exciton;
pub mod job;
pub mod pauli;
pub mod spectrum;
pub mod trajectory;
pub mod units;
pub mod vqa;

pub use error::{Error, Result};
