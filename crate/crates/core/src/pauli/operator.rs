use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{check_same, StateVector};
use super::string::PauliString;
use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped by [`PauliOperator::canonicalize`].
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Dense realization is refused above this many qubits.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        Self::from_string(coeff.into(), PauliString::identity(n_qubits))
    }

    pub fn from_string(coeff: Complex64, s: PauliString) -> Self {
        Self {
            n_qubits: s.n_qubits(),
            terms: vec![(coeff, s)],
        }
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (Complex64, PauliString)>,
    ) -> Result<Self> {
        let mut op = Self::zero(n_qubits);
        for (c, s) in terms {
            op.push(c, s)?;
        }
        Ok(op)
    }

    /// Appends a raw term; no merging.
    pub fn push(&mut self, coeff: Complex64, s: PauliString) -> Result<()> {
        check_same(self.n_qubits, s.n_qubits())?;
        self.terms.push((coeff, s));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges duplicate strings, drops negligible coefficients, and sorts terms.
    pub fn canonicalize(&self) -> Self {
        let mut merged: HashMap<PauliString, Complex64> = HashMap::with_capacity(self.terms.len());
        for &(c, s) in &self.terms {
            *merged.entry(s).or_default() += c;
        }
        let mut terms: Vec<_> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= DROP_TOLERANCE)
            .map(|(s, c)| (c, s))
            .collect();
        terms.sort_by(|a, b| a.1.cmp(&b.1));
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, t)| t == s)
            .map(|(c, _)| *c)
            .sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|&(a, s)| (a * c, s)).collect(),
        }
    }

    /// Raw concatenation of term lists (call [`canonicalize`](Self::canonicalize) to merge).
    pub fn plus(&self, other: &PauliOperator) -> Result<Self> {
        check_same(self.n_qubits, other.n_qubits)?;
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(Self {
            n_qubits: self.n_qubits,
            terms,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|&(c, s)| (c.conj(), s)).collect(),
        }
    }

    /// Operator product, canonicalized.
    pub fn product(&self, other: &PauliOperator) -> Result<Self> {
        check_same(self.n_qubits, other.n_qubits)?;
        let mut out = Self::zero(self.n_qubits);
        for &(a, sa) in &self.terms {
            for &(b, sb) in &other.terms {
                let (phase, s) = sa.mul(&sb)?;
                out.terms.push((a * b * phase, s));
            }
        }
        Ok(out.canonicalize())
    }

    /// `[self, other]`, canonicalized.
    pub fn commutator(&self, other: &PauliOperator) -> Result<Self> {
        let ab = self.product(other)?;
        let ba = other.product(self)?;
        Ok(ab.plus(&ba.scaled((-1.0).into()))?.canonicalize())
    }

    /// Largest `|Im c|` over the canonical terms. A Pauli sum is Hermitian exactly
    /// when every canonical coefficient is real.
    pub fn hermiticity_defect(&self) -> f64 {
        self.canonicalize()
            .terms
            .iter()
            .map(|(c, _)| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_defect();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NonHermitian { deviation })
        }
    }

    /// `⟨0…0| self |0…0⟩`: the sum of coefficients on strings without X/Y.
    pub fn ground_diagonal(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, s)| s.is_diagonal())
            .map(|(c, _)| *c)
            .sum()
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        check_same(self.n_qubits, s.n_qubits())?;
        let mut out = vec![Complex64::default(); s.dim()];
        self.apply_into(s.amplitudes(), &mut out);
        StateVector::from_amplitudes(self.n_qubits, out)
    }

    /// `out = self · input` without allocation; `out` is overwritten.
    pub(crate) fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|a| *a = Complex64::default());
        self.accumulate_into(Complex64::new(1.0, 0.0), input, out);
    }

    /// `out += scale · self · input`.
    pub(crate) fn accumulate_into(&self, scale: Complex64, input: &[Complex64], out: &mut [Complex64]) {
        for &(c, s) in &self.terms {
            let cs = c * scale;
            for (b, &amp) in input.iter().enumerate() {
                if amp.re == 0.0 && amp.im == 0.0 {
                    continue;
                }
                let (phase, b2) = s.apply_to_basis(b);
                out[b2] += cs * phase * amp;
            }
        }
    }

    /// Dense `2^n × 2^n` matrix; row/column index = basis-state index.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                n: self.n_qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for &(c, s) in &self.terms {
            for col in 0..dim {
                let (phase, row) = s.apply_to_basis(col);
                m[(row, col)] += c * phase;
            }
        }
        Ok(m)
    }

    /// One term per line, `coeff_re coeff_im letters`, first qubit leftmost.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, s) in &self.terms {
            let _ = writeln!(out, "{} {} {}", c.re, c.im, s);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |message: String| Error::Parse { line: i + 1, message };
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", fields.len())));
            }
            let re: f64 = fields[0].parse().map_err(|e| bad(format!("coeff_re: {e}")))?;
            let im: f64 = fields[1].parse().map_err(|e| bad(format!("coeff_im: {e}")))?;
            let s: PauliString = fields[2].parse().map_err(|e| bad(format!("{e}")))?;
            terms.push((Complex64::new(re, im), s));
        }
        let n = terms
            .first()
            .map(|(_, s): &(Complex64, PauliString)| s.n_qubits())
            .ok_or_else(|| Error::Parse { line: 0, message: "no terms".into() })?;
        Self::from_terms(n, terms)
    }
}

/// `op · s`, applied termwise.
pub fn apply_operator(op: &PauliOperator, s: &StateVector) -> Result<StateVector> {
    op.apply(s)
}

pub fn to_dense(op: &PauliOperator) -> Result<DMatrix<Complex64>> {
    op.to_dense()
}
