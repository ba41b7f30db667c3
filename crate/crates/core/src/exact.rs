//! Reference propagation of statevectors under a time-dependent Hamiltonian.
//!
//! Every substep is a product of matrix exponentials applied through a
//! scaled Taylor series, so the propagator is unitary to rounding. The
//! default scheme is the fourth-order commutator-free Magnus pair
//! `exp(−iΔ(a₁H₁ + a₂H₂)/ħ) · exp(−iΔ(a₂H₁ + a₁H₂)/ħ)` with `H₁, H₂` at
//! the Gauss nodes; the midpoint-frozen `exp(−iH(t+Δ/2)Δ/ħ)` is available.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, StateVector};
use crate::trajectory::TimeDependentOperator;
use crate::units::HBAR_EV_FS;

pub const DEFAULT_SUBSTEP_FS: f64 = 0.005;
/// Largest imaginary Pauli coefficient tolerated in a Hamiltonian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const NORM_TOLERANCE: f64 = 1e-10;

pub fn ground_state(n_qubits: usize) -> StateVector {
    StateVector::zero_state(n_qubits)
}

/// Uniform integration grid with a coarser recording cadence, all in fs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationGrid {
    t0: f64,
    t1: f64,
    substep: f64,
    record_every: f64,
}

impl PropagationGrid {
    pub fn new(t0: f64, t1: f64, substep: f64, record_every: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::invalid(format!("grid needs t0 < t1, got [{t0}, {t1}]")));
        }
        if !(substep > 0.0) || !(record_every > 0.0) {
            return Err(Error::invalid("substep and record_every must be positive"));
        }
        if substep > record_every * (1.0 + 1e-12) {
            return Err(Error::invalid("substep must not exceed record_every"));
        }
        let ratio = record_every / substep;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::invalid(format!(
                "record_every {record_every} fs is not an integer multiple of substep {substep} fs"
            )));
        }
        Ok(Self {
            t0,
            t1,
            substep,
            record_every,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn substep(&self) -> f64 {
        self.substep
    }

    pub fn record_every(&self) -> f64 {
        self.record_every
    }

    pub fn steps_per_record(&self) -> usize {
        (self.record_every / self.substep).round() as usize
    }

    /// Recorded points including `t0`; the last one is at or before `t1`.
    pub fn n_records(&self) -> usize {
        ((self.t1 - self.t0) / self.record_every + 1e-9).floor() as usize + 1
    }

    pub fn record_time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.record_every
    }

    pub fn record_times(&self) -> Vec<f64> {
        (0..self.n_records()).map(|k| self.record_time(k)).collect()
    }

    /// Time of substep `i` counted from `t0`.
    pub fn step_time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.substep
    }

    pub fn n_steps(&self) -> usize {
        (self.n_records() - 1) * self.steps_per_record()
    }

    pub fn refined(&self) -> Self {
        Self {
            substep: self.substep / 2.0,
            ..*self
        }
    }

    /// Index of `t` among the recorded points.
    pub fn record_index(&self, t: f64) -> Result<usize> {
        let x = (t - self.t0) / self.record_every;
        let k = x.round();
        if (x - k).abs() > 1e-9 || k < 0.0 || k as usize >= self.n_records() {
            return Err(Error::OffGrid { t });
        }
        Ok(k as usize)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Second order; exact for constant `H`.
    Midpoint,
    /// Fourth-order commutator-free Magnus, two exponentials per substep.
    #[default]
    Magnus4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactOptions {
    pub scheme: Scheme,
    /// Rerun at half the substep and require agreement.
    pub convergence_gate: bool,
    pub gate_tolerance: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Magnus4,
            convergence_gate: true,
            gate_tolerance: 1e-8,
        }
    }
}

/// `v ← exp(scale · op) v`.
pub(crate) fn expm_action(op: &PauliOperator, scale: Complex64, v: &mut [Complex64]) {
    let bound: f64 = op.terms().iter().map(|(c, _)| c.norm()).sum::<f64>() * scale.norm();
    if bound == 0.0 {
        return;
    }
    let pieces = bound.ceil().max(1.0) as usize;
    let s = scale / pieces as f64;
    let mut term = vec![Complex64::default(); v.len()];
    let mut next = vec![Complex64::default(); v.len()];
    for _ in 0..pieces {
        term.copy_from_slice(v);
        let v_norm = inf_norm(v);
        for k in 1..60 {
            op.apply_into(&term, &mut next);
            let f = s / k as f64;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = n * f;
            }
            for (a, t) in v.iter_mut().zip(&term) {
                *a += t;
            }
            if inf_norm(&term) <= 1e-17 * v_norm {
                break;
            }
        }
    }
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

fn check_hamiltonian(h: &TimeDependentOperator) -> Result<()> {
    let d = h.hermiticity_defect();
    if d > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { deviation: d });
    }
    Ok(())
}

/// Registers up to this many qubits are stepped as one dense block of states.
const DENSE_MAX_QUBITS: usize = 6;

/// Applies `exp(scale · Σ c_i P_i)` to a set of states.
enum Stepper<'a> {
    Sparse {
        h: &'a TimeDependentOperator,
    },
    Dense {
        /// `(row, phase)` of `P_i|col⟩` for every template string and column.
        tables: Vec<Vec<(usize, Complex64)>>,
        block: DMatrix<Complex64>,
        term: DMatrix<Complex64>,
        next: DMatrix<Complex64>,
        mat: DMatrix<Complex64>,
    },
}

impl<'a> Stepper<'a> {
    fn new(h: &'a TimeDependentOperator, states: &[Vec<Complex64>]) -> Self {
        if h.n_qubits() > DENSE_MAX_QUBITS || states.is_empty() {
            return Stepper::Sparse { h };
        }
        let dim = 1usize << h.n_qubits();
        let tables = h
            .template()
            .iter()
            .map(|p| {
                (0..dim)
                    .map(|col| {
                        let (phase, row) = p.apply_to_basis(col);
                        (row, phase)
                    })
                    .collect()
            })
            .collect();
        let block = DMatrix::from_fn(dim, states.len(), |r, c| states[c][r]);
        Stepper::Dense {
            tables,
            term: block.clone(),
            next: block.clone(),
            mat: DMatrix::zeros(dim, dim),
            block,
        }
    }

    fn exp(&mut self, coeffs: &[Complex64], scale: Complex64, states: &mut [Vec<Complex64>]) {
        match self {
            Stepper::Sparse { h } => {
                let op = PauliOperator::from_terms(h.n_qubits(), coeffs.iter().copied().zip(h.template().iter().copied()))
                    .expect("template shares the register");
                for s in states.iter_mut() {
                    expm_action(&op, scale, s);
                }
            }
            Stepper::Dense {
                tables,
                block,
                term,
                next,
                mat,
            } => {
                mat.fill(Complex64::default());
                for (c, table) in coeffs.iter().zip(tables.iter()) {
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    for (col, &(row, phase)) in table.iter().enumerate() {
                        mat[(row, col)] += c * phase;
                    }
                }
                let bound: f64 = coeffs.iter().map(|c| c.norm()).sum::<f64>() * scale.norm();
                expm_block(mat, bound, scale, block, term, next);
            }
        }
    }

    fn finish(self, states: &mut [Vec<Complex64>]) {
        if let Stepper::Dense { block, .. } = self {
            for (c, s) in states.iter_mut().enumerate() {
                s.copy_from_slice(block.column(c).as_slice());
            }
        }
    }
}

/// Dense counterpart of [`expm_action`] on the columns of `v`, same pieces and cutoff.
fn expm_block(
    h: &DMatrix<Complex64>,
    bound: f64,
    scale: Complex64,
    v: &mut DMatrix<Complex64>,
    term: &mut DMatrix<Complex64>,
    next: &mut DMatrix<Complex64>,
) {
    if bound == 0.0 {
        return;
    }
    let pieces = bound.ceil().max(1.0) as usize;
    let s = scale / pieces as f64;
    let zero = Complex64::default();
    for _ in 0..pieces {
        term.copy_from(v);
        let v_norm = column_inf_norm_min(v);
        for k in 1..60 {
            next.gemm(s / k as f64, h, term, zero);
            std::mem::swap(term, next);
            *v += &*term;
            if term.iter().map(|a| a.norm()).fold(0.0, f64::max) <= 1e-17 * v_norm {
                break;
            }
        }
    }
}

fn column_inf_norm_min(v: &DMatrix<Complex64>) -> f64 {
    v.column_iter()
        .map(|c| c.iter().map(|a| a.norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Steps `states` from `t_from` to `t_to` (either direction) in `n` equal substeps.
fn step_all(
    h: &TimeDependentOperator,
    states: &mut [Vec<Complex64>],
    t_from: f64,
    t_to: f64,
    n: usize,
    scheme: Scheme,
) {
    let dt = (t_to - t_from) / n as f64;
    let scale = Complex64::new(0.0, -dt / HBAR_EV_FS);
    let mut stepper = Stepper::new(h, states);
    if h.is_constant() {
        let coeffs = h.frame_coefficients(0).to_vec();
        for _ in 0..n {
            stepper.exp(&coeffs, scale, states);
        }
        stepper.finish(states);
        return;
    }
    let r3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
    let (a1, a2) = ((3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0);
    for i in 0..n {
        let t = t_from + i as f64 * dt;
        match scheme {
            Scheme::Midpoint => {
                let coeffs = h.coefficients_at(t + 0.5 * dt);
                stepper.exp(&coeffs, scale, states);
            }
            Scheme::Magnus4 => {
                let h1 = h.coefficients_at(t + c1 * dt);
                let h2 = h.coefficients_at(t + c2 * dt);
                let mix = |w1: f64, w2: f64| -> Vec<Complex64> { h1.iter().zip(&h2).map(|(x, y)| x * w1 + y * w2).collect() };
                stepper.exp(&mix(a2, a1), scale, states);
                stepper.exp(&mix(a1, a2), scale, states);
            }
        }
    }
    stepper.finish(states);
}

fn run(h: &TimeDependentOperator, states: &[StateVector], grid: &PropagationGrid, scheme: Scheme) -> Vec<Vec<StateVector>> {
    let n_qubits = h.n_qubits();
    let mut work: Vec<Vec<Complex64>> = states.iter().map(|s| s.amplitudes().to_vec()).collect();
    let mut records: Vec<Vec<StateVector>> = states.iter().map(|s| vec![s.clone()]).collect();
    let per = grid.steps_per_record();
    for k in 1..grid.n_records() {
        step_all(h, &mut work, grid.record_time(k - 1), grid.record_time(k), per, scheme);
        for (rec, w) in records.iter_mut().zip(&work) {
            rec.push(StateVector::from_amplitudes(n_qubits, w.clone()).expect("dimension preserved"));
        }
    }
    records
}

/// Propagates several initial states under the same Hamiltonian.
/// Returns `records[state][k]` at `grid.record_time(k)`.
pub fn propagate_many(
    h: &TimeDependentOperator,
    states: &[StateVector],
    grid: &PropagationGrid,
    opts: &ExactOptions,
) -> Result<Vec<Vec<StateVector>>> {
    check_hamiltonian(h)?;
    for s in states {
        if s.n_qubits() != h.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: h.n_qubits(),
                found: s.n_qubits(),
            });
        }
    }
    h.ensure_covers(grid.t0(), grid.record_time(grid.n_records() - 1))?;
    let records = run(h, states, grid, opts.scheme);

    for (s0, rec) in states.iter().zip(&records) {
        let n0 = s0.norm();
        for (k, s) in rec.iter().enumerate() {
            let drift = (s.norm() - n0).abs();
            if drift > NORM_TOLERANCE * n0.max(1.0) {
                return Err(Error::Numeric(format!(
                    "norm drift {drift:e} at t = {} fs",
                    grid.record_time(k)
                )));
            }
        }
    }

    if opts.convergence_gate {
        let fine = run(h, states, &grid.refined(), opts.scheme);
        let deviation = records
            .iter()
            .flatten()
            .zip(fine.iter().flatten())
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max);
        if deviation > opts.gate_tolerance {
            return Err(Error::ConvergenceGate { deviation });
        }
        log::debug!("exact convergence gate passed, deviation {deviation:e}");
    }
    Ok(records)
}

/// Propagates one state with the convergence gate enabled.
pub fn propagate(h: &TimeDependentOperator, s0: &StateVector, grid: &PropagationGrid) -> Result<Vec<(f64, StateVector)>> {
    let mut records = propagate_many(h, std::slice::from_ref(s0), grid, &ExactOptions::default())?;
    let states = records.pop().expect("one state");
    Ok(grid.record_times().into_iter().zip(states).collect())
}

/// Evolves `s` from `t_from` to `t_to` with roughly `substep`-sized steps.
/// Both schemes are symmetric, so `t_to < t_from` inverts a forward run.
pub fn evolve_between(
    h: &TimeDependentOperator,
    s: &StateVector,
    t_from: f64,
    t_to: f64,
    substep: f64,
    scheme: Scheme,
) -> Result<StateVector> {
    check_hamiltonian(h)?;
    if s.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: s.n_qubits(),
        });
    }
    if !(substep > 0.0) {
        return Err(Error::invalid("substep must be positive"));
    }
    h.ensure_covers(t_from, t_to)?;
    let n = ((t_to - t_from).abs() / substep).round().max(1.0) as usize;
    let mut work = vec![s.amplitudes().to_vec()];
    step_all(h, &mut work, t_from, t_to, n, scheme);
    StateVector::from_amplitudes(s.n_qubits(), work.pop().expect("one state"))
}
