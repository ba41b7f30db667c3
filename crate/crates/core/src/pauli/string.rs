use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap from the `u64` bit masks.
pub const MAX_QUBITS: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^k`.
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Tensor product of single-qubit Paulis stored as symplectic bit masks.
///
/// Qubit `q` (0-based) is bit `q` of a basis-state index, so the first qubit is
/// the least-significant bit. The string acts as `i^{#Y} X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(
            n_qubits >= 1 && n_qubits <= MAX_QUBITS,
            "n_qubits must be in 1..={MAX_QUBITS}"
        );
        Self { n_qubits, x: 0, z: 0 }
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        Self::identity(n_qubits).with(qubit, p)
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "Pauli string length {} outside 1..={MAX_QUBITS}",
                letters.len()
            )));
        }
        let mut s = Self::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            s = s.with(q, p);
        }
        Ok(s)
    }

    /// Returns a copy with `qubit` set to `p`. Panics if `qubit` is out of range.
    pub fn with(mut self, qubit: usize, p: Pauli) -> Self {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let bit = 1u64 << qubit;
        let (xb, zb) = p.bits();
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// True when the string contains only `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// `P |b⟩ = phase · |b'⟩`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let flips = ((b as u64) & self.z).count_ones();
        let k = self.y_count() + 2 * (flips & 1);
        (i_pow(k), b ^ self.x as usize)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product `self · other = phase · product`, with `phase ∈ {±1, ±i}`.
    pub fn mul(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let product = PauliString {
            n_qubits: self.n_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // i^{ya} X^xa Z^za · i^{yb} X^xb Z^zb; moving Z^za past X^xb costs (-1)^{|za & xb|}.
        let swap = (self.z & other.x).count_ones();
        let k = 4 + self.y_count() + other.y_count() + 2 * swap - product.y_count() % 4;
        Ok((i_pow(k), product))
    }
}

/// Free-function form of [`PauliString::mul`].
pub fn mul_strings(a: &PauliString, b: &PauliString) -> Result<(Complex64, PauliString)> {
    a.mul(b)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses letters over `{I, X, Y, Z}` with the first qubit leftmost.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::invalid(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}
