use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::exciton::{Axis, Basis};
use crate::pauli::{PauliOperator, PauliString};

/// Pauli operator whose coefficients are sampled on a uniform time grid and
/// linearly interpolated in between.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeDependentOperator {
    n_qubits: usize,
    template: Vec<PauliString>,
    t0: f64,
    dt: f64,
    /// `coeffs[frame][term]`
    coeffs: Vec<Vec<Complex64>>,
}

impl TimeDependentOperator {
    /// Time-independent operator.
    pub fn constant(op: &PauliOperator) -> Self {
        let op = op.canonicalize();
        Self {
            n_qubits: op.n_qubits(),
            template: op.terms().iter().map(|(_, s)| *s).collect(),
            t0: 0.0,
            dt: 1.0,
            coeffs: vec![op.terms().iter().map(|(c, _)| *c).collect()],
        }
    }

    /// One operator per frame at `t0 + j·dt`, recorded on the union of their strings.
    pub fn from_frames(t0: f64, dt: f64, ops: &[PauliOperator]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::invalid("no frames for time-dependent operator"))?;
        if !(dt > 0.0) {
            return Err(Error::invalid("frame spacing must be positive"));
        }
        let n_qubits = first.n_qubits();
        let canonical: Vec<PauliOperator> = ops.iter().map(|o| o.canonicalize()).collect();
        let mut strings = BTreeSet::new();
        for op in &canonical {
            if op.n_qubits() != n_qubits {
                return Err(Error::Numeric("term template mismatch across frames".into()));
            }
            strings.extend(op.terms().iter().map(|(_, s)| *s));
        }
        let template: Vec<PauliString> = strings.into_iter().collect();
        let coeffs = canonical
            .iter()
            .map(|op| template.iter().map(|s| op.coefficient(s)).collect())
            .collect();
        Ok(Self {
            n_qubits,
            template,
            t0,
            dt,
            coeffs,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn template(&self) -> &[PauliString] {
        &self.template
    }

    pub fn n_frames(&self) -> usize {
        self.coeffs.len()
    }

    pub fn frame_coefficients(&self, j: usize) -> &[Complex64] {
        &self.coeffs[j]
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    /// Last sampled time; infinite for a constant operator.
    pub fn t_end(&self) -> f64 {
        if self.coeffs.len() == 1 {
            f64::INFINITY
        } else {
            self.t0 + (self.coeffs.len() - 1) as f64 * self.dt
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// Checks `[t_from, t_to]` lies inside the sampled window.
    pub fn ensure_covers(&self, t_from: f64, t_to: f64) -> Result<()> {
        if self.is_constant() {
            return Ok(());
        }
        let tol = 1e-9 * self.dt;
        let (lo, hi) = (t_from.min(t_to), t_from.max(t_to));
        if lo < self.t0 - tol || hi > self.t_end() + tol {
            return Err(Error::invalid(format!(
                "requested window [{lo}, {hi}] fs exceeds trajectory window [{}, {}] fs",
                self.t0,
                self.t_end()
            )));
        }
        Ok(())
    }

    /// Interpolated coefficients at `t`, clamped to the sampled window.
    pub fn coefficients_at(&self, t: f64) -> Vec<Complex64> {
        let n = self.coeffs.len();
        if n == 1 {
            return self.coeffs[0].clone();
        }
        let x = ((t - self.t0) / self.dt).clamp(0.0, (n - 1) as f64);
        let j = (x.floor() as usize).min(n - 2);
        let w = x - j as f64;
        if w == 0.0 {
            return self.coeffs[j].clone();
        }
        self.coeffs[j]
            .iter()
            .zip(&self.coeffs[j + 1])
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect()
    }

    pub fn at(&self, t: f64) -> PauliOperator {
        let coeffs = self.coefficients_at(t);
        PauliOperator::from_terms(self.n_qubits, coeffs.into_iter().zip(self.template.iter().copied()))
            .expect("template shares the register")
    }

    /// Largest imaginary coefficient over all frames.
    pub fn hermiticity_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// Adds the same operator to every frame.
    pub fn plus_constant(&self, op: &PauliOperator) -> Result<Self> {
        let frames: Vec<PauliOperator> = (0..self.n_frames())
            .map(|j| {
                let base = PauliOperator::from_terms(
                    self.n_qubits,
                    self.coeffs[j].iter().copied().zip(self.template.iter().copied()),
                )?;
                base.plus(op)
            })
            .collect::<Result<_>>()?;
        Self::from_frames(self.t0, self.dt, &frames)
    }

    /// Per-frame operators (the constant case yields one).
    pub fn frame_operators(&self) -> Vec<PauliOperator> {
        (0..self.n_frames())
            .map(|j| {
                PauliOperator::from_terms(
                    self.n_qubits,
                    self.coeffs[j].iter().copied().zip(self.template.iter().copied()),
                )
                .expect("template shares the register")
            })
            .collect()
    }
}

/// How dipole coefficients follow the trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DipoleMode {
    /// Trajectory-averaged, held constant.
    #[default]
    Averaged,
    /// Per-frame values, linearly interpolated.
    Instant,
}

/// Per-frame Hamiltonian shifted so that `⟨0…0|H(t)|0…0⟩ = 0`.
pub fn hamiltonian_series(traj: &Trajectory, basis: Basis) -> Result<TimeDependentOperator> {
    let n = basis.n_qubits(traj.n_chromophores());
    let ops = traj
        .frames()
        .iter()
        .map(|f| {
            let h = basis.hamiltonian(f)?;
            let shift = h.ground_diagonal();
            h.plus(&PauliOperator::identity(n, 1.0).scaled(-shift))
        })
        .collect::<Result<Vec<_>>>()?;
    TimeDependentOperator::from_frames(traj.t0_fs(), traj.dt_fs(), &ops)
}

pub fn dipole_series(
    traj: &Trajectory,
    basis: Basis,
    axis: Axis,
    mode: DipoleMode,
) -> Result<TimeDependentOperator> {
    let ops = traj
        .frames()
        .iter()
        .map(|f| basis.dipole(f, axis))
        .collect::<Result<Vec<_>>>()?;
    let series = TimeDependentOperator::from_frames(traj.t0_fs(), traj.dt_fs(), &ops)?;
    match mode {
        DipoleMode::Instant => Ok(series),
        DipoleMode::Averaged => {
            let n_frames = series.n_frames() as f64;
            let mut mean = vec![Complex64::default(); series.template.len()];
            for frame in &series.coeffs {
                for (m, c) in mean.iter_mut().zip(frame) {
                    *m += c;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n_frames);
            Ok(TimeDependentOperator {
                coeffs: vec![mean],
                ..series
            })
        }
    }
}
