//! McLachlan variational time evolution on the ansatz
//! `|ψ(θ)⟩ = e^{iθ_K R_K} ⋯ e^{iθ_1 R_1} |ψ₀⟩`.
//!
//! The evolved state carries an extra global phase parameter φ, treated as
//! one more McLachlan direction with generator `I`, so that the returned
//! state `e^{iφ}|ψ(θ)⟩` tracks the exact state including its phase.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::PropagationGrid;
use crate::pauli::{dot, Pauli, PauliOperator, PauliString, StateVector};
use crate::trajectory::TimeDependentOperator;
use crate::units::HBAR_EV_FS;

/// Abort threshold for `‖M θ̇ − V‖`.
pub const MAX_RESIDUAL: f64 = 0.1;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    n_qubits: usize,
    generators: Vec<PauliString>,
    initial_state: StateVector,
}

impl Ansatz {
    pub fn new(generators: Vec<PauliString>, initial_state: StateVector) -> Result<Self> {
        let n_qubits = initial_state.n_qubits();
        for g in &generators {
            if g.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch {
                    expected: n_qubits,
                    found: g.n_qubits(),
                });
            }
        }
        Ok(Self {
            n_qubits,
            generators,
            initial_state,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    /// Same generators acting on a different initial state.
    pub fn with_initial_state(&self, initial_state: StateVector) -> Result<Self> {
        Self::new(self.generators.clone(), initial_state)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.generators.len() {
            return Err(Error::LengthMismatch {
                expected: self.generators.len(),
                found: theta.len(),
            });
        }
        Ok(())
    }
}

/// Singles `X_m, Z_m` per qubit, then `P_m Q_n` for `m < n`, `P, Q ∈ {X, Y, Z}`.
pub fn build_ansatz(n_qubits: usize, initial_state: StateVector) -> Result<Ansatz> {
    if n_qubits == 0 {
        return Err(Error::invalid("ansatz needs at least one qubit"));
    }
    if initial_state.n_qubits() != n_qubits {
        return Err(Error::QubitMismatch {
            expected: n_qubits,
            found: initial_state.n_qubits(),
        });
    }
    const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut generators = Vec::with_capacity(2 * n_qubits + 9 * n_qubits * (n_qubits - 1) / 2);
    for m in 0..n_qubits {
        generators.push(PauliString::single(n_qubits, m, Pauli::X));
        generators.push(PauliString::single(n_qubits, m, Pauli::Z));
    }
    for m in 0..n_qubits {
        for n in m + 1..n_qubits {
            for p in XYZ {
                for q in XYZ {
                    generators.push(PauliString::identity(n_qubits).with(m, p).with(n, q));
                }
            }
        }
    }
    Ansatz::new(generators, initial_state)
}

/// `out = R · input`.
fn apply_string(r: &PauliString, input: &[Complex64], out: &mut [Complex64]) {
    for (b, &a) in input.iter().enumerate() {
        let (phase, b2) = r.apply_to_basis(b);
        out[b2] = phase * a;
    }
}

/// `v ← e^{iθR} v = cos θ · v + i sin θ · R v`.
fn rotate(r: &PauliString, theta: f64, v: &mut [Complex64], tmp: &mut [Complex64]) {
    if theta == 0.0 {
        return;
    }
    apply_string(r, v, tmp);
    let (s, c) = theta.sin_cos();
    let is = I * s;
    for (a, t) in v.iter_mut().zip(tmp.iter()) {
        *a = *a * c + is * t;
    }
}

/// Final state and all tangents `∂ψ/∂θ_k`, in `O(K² d)`.
fn state_and_tangents(a: &Ansatz, theta: &[f64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let d = a.initial_state.dim();
    let mut cur = a.initial_state.amplitudes().to_vec();
    let mut tmp = vec![Complex64::default(); d];
    let mut tangents: Vec<Vec<Complex64>> = Vec::with_capacity(a.generators.len());
    for (r, &th) in a.generators.iter().zip(theta) {
        rotate(r, th, &mut cur, &mut tmp);
        for t in tangents.iter_mut() {
            rotate(r, th, t, &mut tmp);
        }
        let mut t = vec![Complex64::default(); d];
        apply_string(r, &cur, &mut t);
        t.iter_mut().for_each(|x| *x *= I);
        tangents.push(t);
    }
    (cur, tangents)
}

pub fn ansatz_state(a: &Ansatz, theta: &[f64]) -> Result<StateVector> {
    a.check_theta(theta)?;
    let mut cur = a.initial_state.amplitudes().to_vec();
    let mut tmp = vec![Complex64::default(); cur.len()];
    for (r, &th) in a.generators.iter().zip(theta) {
        rotate(r, th, &mut cur, &mut tmp);
    }
    StateVector::from_amplitudes(a.n_qubits, cur)
}

/// `∂ψ/∂θ_k = [∏_{j>k} e^{iθ_j R_j}] (iR_k) [∏_{j≤k} e^{iθ_j R_j}] |ψ₀⟩`.
pub fn tangent_state(a: &Ansatz, theta: &[f64], k: usize) -> Result<StateVector> {
    a.check_theta(theta)?;
    if k >= a.n_params() {
        return Err(Error::IndexOutOfRange {
            index: k,
            n_qubits: a.n_params(),
        });
    }
    let mut cur = a.initial_state.amplitudes().to_vec();
    let mut tmp = vec![Complex64::default(); cur.len()];
    for (j, (r, &th)) in a.generators.iter().zip(theta).enumerate() {
        rotate(r, th, &mut cur, &mut tmp);
        if j == k {
            apply_string(r, &cur, &mut tmp);
            cur.iter_mut().zip(&tmp).for_each(|(c, t)| *c = I * t);
        }
    }
    StateVector::from_amplitudes(a.n_qubits, cur)
}

fn check_h(a: &Ansatz, h: &PauliOperator) -> Result<()> {
    if h.n_qubits() != a.n_qubits {
        return Err(Error::QubitMismatch {
            expected: a.n_qubits,
            found: h.n_qubits(),
        });
    }
    h.ensure_hermitian(crate::exact::HERMITIAN_TOLERANCE)
}

/// `M_kl = Re⟨∂_kψ|∂_lψ⟩`, `V_k = Im⟨∂_kψ|H|ψ⟩ / ħ`.
pub fn mclachlan_system(a: &Ansatz, theta: &[f64], h: &PauliOperator) -> Result<(DMatrix<f64>, DVector<f64>)> {
    a.check_theta(theta)?;
    check_h(a, h)?;
    let sys = assemble(a, theta, h, false);
    Ok((sys.m, sys.v))
}

/// As [`mclachlan_system`] with a trailing global-phase direction:
/// `M_φφ = 1`, `M_kφ = Im⟨ψ|∂_kψ⟩`, `V_φ = −⟨ψ|H|ψ⟩/ħ`.
pub fn mclachlan_system_with_phase(
    a: &Ansatz,
    theta: &[f64],
    h: &PauliOperator,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    a.check_theta(theta)?;
    check_h(a, h)?;
    let sys = assemble(a, theta, h, true);
    Ok((sys.m, sys.v))
}

struct System {
    m: DMatrix<f64>,
    v: DVector<f64>,
    /// `⟨ψ|H²|ψ⟩ / ħ²`
    h2: f64,
}

fn assemble(a: &Ansatz, theta: &[f64], h: &PauliOperator, with_phase: bool) -> System {
    let (psi, tangents) = state_and_tangents(a, theta);
    let mut h_psi = vec![Complex64::default(); psi.len()];
    h.apply_into(&psi, &mut h_psi);
    let k = tangents.len();
    let dim = if with_phase { k + 1 } else { k };
    let mut m = DMatrix::zeros(dim, dim);
    let mut v = DVector::zeros(dim);
    for i in 0..k {
        for j in i..k {
            let x = dot(&tangents[i], &tangents[j]).re;
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
        v[i] = dot(&tangents[i], &h_psi).im / HBAR_EV_FS;
    }
    if with_phase {
        for i in 0..k {
            let x = dot(&psi, &tangents[i]).im;
            m[(i, k)] = x;
            m[(k, i)] = x;
        }
        m[(k, k)] = dot(&psi, &psi).re;
        v[k] = -dot(&psi, &h_psi).re / HBAR_EV_FS;
    }
    let h2 = dot(&h_psi, &h_psi).re / (HBAR_EV_FS * HBAR_EV_FS);
    System { m, v, h2 }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepSolution {
    pub theta_dot: DVector<f64>,
    /// `‖M θ̇ − V‖`
    pub residual: f64,
    /// Ratio of the largest to smallest squared Cholesky pivot of `M + εI`;
    /// infinite when the SVD fallback was needed.
    pub condition: f64,
}

pub fn default_regularization(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows().max(1) as f64;
    1e-8 * (m.trace() / n).max(1.0)
}

/// Solves `(M + εI) θ̇ = V` with the default ε.
pub fn solve_step(m: &DMatrix<f64>, v: &DVector<f64>) -> StepSolution {
    solve_step_with(m, v, default_regularization(m))
}

pub fn solve_step_with(m: &DMatrix<f64>, v: &DVector<f64>, eps: f64) -> StepSolution {
    let n = m.nrows();
    let reg = m + DMatrix::identity(n, n) * eps;
    let (theta_dot, condition) = match reg.clone().cholesky() {
        Some(ch) => {
            let diag = ch.l_dirty().diagonal();
            let (lo, hi) = diag
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x * x), hi.max(x * x)));
            (ch.solve(v), if n == 0 { 1.0 } else { hi / lo })
        }
        None => {
            let svd = reg.svd(true, true);
            let x = svd
                .solve(v, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(n));
            (x, f64::INFINITY)
        }
    };
    let residual = (m * &theta_dot - v).norm();
    StepSolution {
        theta_dot,
        residual,
        condition,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VqaOptions {
    pub integrator: Integrator,
    pub max_residual: f64,
}

impl Default for VqaOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk4,
            max_residual: MAX_RESIDUAL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    pub theta_norm: f64,
    pub residual: f64,
    pub condition: f64,
    /// `‖Σ_k ∂_kψ θ̇_k + iHψ/ħ‖`, the McLachlan distance left at this step.
    pub mclachlan_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTrajectory {
    pub times: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    /// Global phase φ per recorded time.
    pub phase: Vec<f64>,
    /// One entry per substep, evaluated at the start of the step.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl ThetaTrajectory {
    /// `e^{iφ}|ψ(θ)⟩` at every recorded time.
    pub fn states(&self, a: &Ansatz) -> Result<Vec<StateVector>> {
        self.theta
            .iter()
            .zip(&self.phase)
            .map(|(th, &ph)| Ok(ansatz_state(a, th)?.scaled(Complex64::from_polar(1.0, ph))))
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.residual).fold(0.0, f64::max)
    }

    /// Text records `t theta_norm residual`, one per substep.
    pub fn write_diagnostics(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# t theta_norm residual")?;
        for d in &self.diagnostics {
            writeln!(w, "{:.6} {:.12e} {:.6e}", d.t, d.theta_norm, d.residual)?;
        }
        Ok(())
    }
}

struct Rhs {
    deriv: DVector<f64>,
    diag: StepDiagnostics,
}

/// The phase direction is eliminated exactly (Schur complement) before the
/// regularized solve, so θ̇ carries no global-phase component and φ absorbs
/// the dynamical phase instead of the Z-type generators.
fn rhs(a: &Ansatz, h: &TimeDependentOperator, t: f64, y: &DVector<f64>) -> Rhs {
    let k = a.n_params();
    let theta = &y.as_slice()[..k];
    let op = h.at(t);
    let sys = assemble(a, theta, &op, true);
    let m_pp = sys.m[(k, k)];
    let m_tp = sys.m.view((0, k), (k, 1)).clone_owned();
    let v_p = sys.v[k];
    let m_red = sys.m.view((0, 0), (k, k)) - &m_tp * m_tp.transpose() / m_pp;
    let v_red = sys.v.rows(0, k) - &m_tp * (v_p / m_pp);
    let sol = solve_step(&m_red, &v_red.column(0).clone_owned());
    let phase_dot = (v_p - m_tp.column(0).dot(&sol.theta_dot)) / m_pp;
    let mut x = DVector::zeros(k + 1);
    x.rows_mut(0, k).copy_from(&sol.theta_dot);
    x[k] = phase_dot;
    let dist2 = x.dot(&(&sys.m * &x)) - 2.0 * x.dot(&sys.v) + sys.h2;
    Rhs {
        diag: StepDiagnostics {
            t,
            theta_norm: DVector::from_column_slice(theta).norm(),
            residual: sol.residual,
            condition: sol.condition,
            mclachlan_distance: dist2.max(0.0).sqrt(),
        },
        deriv: x,
    }
}

/// Integrates `θ̇ = M⁻¹V` (plus the phase) from `θ(t0) = 0`.
pub fn evolve_variational(
    h: &TimeDependentOperator,
    a: &Ansatz,
    grid: &PropagationGrid,
    opts: &VqaOptions,
) -> Result<ThetaTrajectory> {
    if h.n_qubits() != a.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: a.n_qubits(),
            found: h.n_qubits(),
        });
    }
    let defect = h.hermiticity_defect();
    if defect > crate::exact::HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { deviation: defect });
    }
    let n_rec = grid.n_records();
    h.ensure_covers(grid.t0(), grid.record_time(n_rec - 1))?;

    let k = a.n_params();
    let mut y = DVector::zeros(k + 1);
    let mut out = ThetaTrajectory {
        times: grid.record_times(),
        theta: vec![vec![0.0; k]],
        phase: vec![0.0],
        diagnostics: Vec::with_capacity(grid.n_steps()),
    };
    let dt = grid.substep();
    let per = grid.steps_per_record();
    let check = |r: &Rhs| -> Result<()> {
        if !(r.diag.residual <= opts.max_residual) || r.deriv.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence {
                t: r.diag.t,
                residual: r.diag.residual,
            });
        }
        Ok(())
    };
    for rec in 1..n_rec {
        for s in 0..per {
            let t = grid.record_time(rec - 1) + s as f64 * dt;
            let k1 = rhs(a, h, t, &y);
            check(&k1)?;
            out.diagnostics.push(k1.diag);
            match opts.integrator {
                Integrator::Euler => y += &k1.deriv * dt,
                Integrator::Rk4 => {
                    let k2 = rhs(a, h, t + dt / 2.0, &(&y + &k1.deriv * (dt / 2.0)));
                    check(&k2)?;
                    let k3 = rhs(a, h, t + dt / 2.0, &(&y + &k2.deriv * (dt / 2.0)));
                    check(&k3)?;
                    let k4 = rhs(a, h, t + dt, &(&y + &k3.deriv * dt));
                    check(&k4)?;
                    y += (k1.deriv + k2.deriv * 2.0 + k3.deriv * 2.0 + k4.deriv) * (dt / 6.0);
                }
            }
        }
        out.theta.push(y.as_slice()[..k].to_vec());
        out.phase.push(y[k]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ground_state;

    fn x_only() -> Ansatz {
        Ansatz::new(vec!["X".parse().unwrap()], ground_state(1)).unwrap()
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(build_ansatz(1, ground_state(1)).unwrap().n_params(), 2);
        assert_eq!(build_ansatz(2, ground_state(2)).unwrap().n_params(), 13);
        assert_eq!(build_ansatz(4, ground_state(4)).unwrap().n_params(), 62);
        let a = build_ansatz(2, ground_state(2)).unwrap();
        let names: Vec<String> = a.generators().iter().map(|g| g.to_string()).collect();
        assert_eq!(&names[..6], &["XI", "ZI", "IX", "IZ", "XX", "XY"]);
        assert_eq!(names[12], "ZZ");
    }

    #[test]
    fn zero_theta_gives_initial_state() {
        let a = build_ansatz(2, StateVector::basis(2, 3)).unwrap();
        let s = ansatz_state(&a, &vec![0.0; 13]).unwrap();
        assert_eq!(s, StateVector::basis(2, 3));
    }

    #[test]
    fn x_rotation_by_half_pi() {
        let s = ansatz_state(&x_only(), &[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - I).norm() < 1e-15);
    }

    #[test]
    fn last_tangent_at_zero() {
        let a = build_ansatz(2, StateVector::basis(2, 1)).unwrap();
        let k = a.n_params() - 1;
        let t = tangent_state(&a, &vec![0.0; 13], k).unwrap();
        let want = PauliOperator::from_string(I, a.generators()[k]).apply(&StateVector::basis(2, 1)).unwrap();
        assert!(t.distance(&want) < 1e-15);
    }

    #[test]
    fn single_generator_system() {
        let a = x_only();
        let x = PauliOperator::from_string(Complex64::new(1.0, 0.0), "X".parse().unwrap());
        let (m, v) = mclachlan_system(&a, &[0.0], &x).unwrap();
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((v[0] + 1.0 / HBAR_EV_FS).abs() < 1e-15);
    }

    #[test]
    fn identity_hamiltonian_gives_zero_force_on_x_ansatz() {
        let a = x_only();
        let id = PauliOperator::identity(1, 1.0);
        for th in [0.0, 0.3, 1.1, -2.0] {
            let (_, v) = mclachlan_system(&a, &[th], &id).unwrap();
            assert!(v[0].abs() < 1e-15);
        }
    }

    #[test]
    fn solve_trivial_systems() {
        let v = DVector::from_vec(vec![0.3, -1.2, 2.0]);
        let s = solve_step(&DMatrix::identity(3, 3), &v);
        assert!((s.theta_dot - &v).norm() < 1e-7);
        let s = solve_step(&DMatrix::zeros(3, 3), &DVector::zeros(3));
        assert_eq!(s.theta_dot.norm(), 0.0);
    }

    #[test]
    fn singular_system_stays_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let v = DVector::from_vec(vec![0.5, 0.5]);
        let s = solve_step(&m, &v);
        assert!(s.theta_dot.iter().all(|x| x.is_finite()));
        assert!(s.residual < 1e-6);
    }

    #[test]
    fn zero_hamiltonian_keeps_theta_zero() {
        let a = build_ansatz(2, StateVector::basis(2, 1)).unwrap();
        let h = TimeDependentOperator::constant(&PauliOperator::zero(2));
        let grid = PropagationGrid::new(0.0, 0.5, 0.01, 0.1).unwrap();
        let tr = evolve_variational(&h, &a, &grid, &VqaOptions::default()).unwrap();
        for th in &tr.theta {
            assert!(th.iter().all(|&x| x == 0.0));
        }
        assert_eq!(tr.times.len(), 6);
        assert_eq!(tr.diagnostics.len(), 50);
    }

    #[test]
    fn single_x_generator_reproduces_exact_evolution() {
        let a = x_only();
        let x = PauliOperator::from_string(Complex64::new(0.8, 0.0), "X".parse().unwrap());
        let h = TimeDependentOperator::constant(&x);
        let grid = PropagationGrid::new(0.0, 2.0, 0.01, 0.5).unwrap();
        let tr = evolve_variational(&h, &a, &grid, &VqaOptions::default()).unwrap();
        for (t, th) in tr.times.iter().zip(&tr.theta) {
            assert!((th[0] + 0.8 * t / HBAR_EV_FS).abs() < 1e-7);
        }
    }

    #[test]
    fn diagnostics_dump_format() {
        let a = x_only();
        let h = TimeDependentOperator::constant(&PauliOperator::zero(1));
        let grid = PropagationGrid::new(0.0, 0.02, 0.01, 0.01).unwrap();
        let tr = evolve_variational(&h, &a, &grid, &VqaOptions::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_diagnostics(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 3);
    }
}
