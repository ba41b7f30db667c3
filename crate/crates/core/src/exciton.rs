//! Exciton Hamiltonians and dipole operators as qubit operators.
//!
//! Two encodings are supported:
//!
//! * **Full space**: one qubit per two-level chromophore (`|0⟩` ground,
//!   `|1⟩` excited). One- and two-body matrix elements are written in the
//!   `I/Z/X` basis of each site; two-body elements use the point-dipole
//!   approximation with the ground, excited and transition dipoles.
//! * **Frenkel**: ground state plus the `N` singly excited states, binary
//!   encoded into `⌈log₂(N+1)⌉` qubits. Basis index `0` is the ground state,
//!   index `m` is the excitation on chromophore `m` (1-based).
//!
//! Units: energies in eV, dipoles in atomic units (e·a₀), positions in Å.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator, PauliString, MAX_DENSE_QUBITS};
use crate::units::DIPOLE_AU2_PER_ANG3_EV;

pub type Vec3 = [f64; 3];

/// Minimum allowed separation between chromophore centers, Å.
pub const MIN_SEPARATION_ANG: f64 = 0.1;

/// Largest chromophore count for the one-qubit-per-site encoding.
pub const MAX_FULL_SPACE_SITES: usize = MAX_DENSE_QUBITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Electronic data for one chromophore at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chromophore {
    #[serde(rename = "E_ev")]
    pub energy_ev: f64,
    /// Ground-state permanent dipole.
    pub mu00: Vec3,
    /// Excited-state permanent dipole.
    pub mu11: Vec3,
    /// Transition dipole.
    pub mu01: Vec3,
    #[serde(rename = "com_ang")]
    pub com_ang: Vec3,
}

impl Chromophore {
    /// `μ_pq` for `p, q ∈ {0, 1}`.
    pub fn dipole(&self, p: u8, q: u8) -> Vec3 {
        match (p, q) {
            (0, 0) => self.mu00,
            (1, 1) => self.mu11,
            _ => self.mu01,
        }
    }

    /// `(μ00 + μ11)/2`, paired with the identity on this site.
    pub fn dipole_sum(&self) -> Vec3 {
        lin(0.5, &self.mu00, 0.5, &self.mu11)
    }

    /// `(μ00 − μ11)/2`, paired with `Z` on this site.
    pub fn dipole_diff(&self) -> Vec3 {
        lin(0.5, &self.mu00, -0.5, &self.mu11)
    }
}

fn lin(a: f64, u: &Vec3, b: f64, v: &Vec3) -> Vec3 {
    [a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]]
}

fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// All chromophores at one trajectory frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChromophoreFrame {
    pub chromophores: Vec<Chromophore>,
}

impl ChromophoreFrame {
    pub fn new(chromophores: Vec<Chromophore>) -> Result<Self> {
        let frame = Self { chromophores };
        frame.validate()?;
        Ok(frame)
    }

    pub fn len(&self) -> usize {
        self.chromophores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chromophores.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.chromophores.is_empty() {
            return Err(Error::invalid("frame has no chromophores"));
        }
        for (m, c) in self.chromophores.iter().enumerate() {
            let finite = c.energy_ev.is_finite()
                && [c.mu00, c.mu11, c.mu01, c.com_ang]
                    .iter()
                    .all(|v| v.iter().all(|x| x.is_finite()));
            if !finite {
                return Err(Error::invalid(format!("chromophore {m} has non-finite data")));
            }
        }
        for (m, a) in self.chromophores.iter().enumerate() {
            for b in &self.chromophores[m + 1..] {
                let d = distance(&a.com_ang, &b.com_ang);
                if d <= MIN_SEPARATION_ANG {
                    return Err(Error::CoincidentCenters { distance: d });
                }
            }
        }
        Ok(())
    }
}

fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let d = lin(1.0, b, -1.0, a);
    dot3(&d, &d).sqrt()
}

/// Point-dipole interaction energy in eV for dipoles in a.u. at positions in Å:
/// `[μa·μb − 3(μa·r̂)(μb·r̂)] / r³`.
pub fn dipole_dipole_coupling(mu_a: &Vec3, mu_b: &Vec3, r_a: &Vec3, r_b: &Vec3) -> Result<f64> {
    let d = lin(1.0, r_b, -1.0, r_a);
    let r = dot3(&d, &d).sqrt();
    if !(r > MIN_SEPARATION_ANG) {
        return Err(Error::CoincidentCenters { distance: r });
    }
    let u = [d[0] / r, d[1] / r, d[2] / r];
    let value = (dot3(mu_a, mu_b) - 3.0 * dot3(mu_a, &u) * dot3(mu_b, &u)) / (r * r * r);
    Ok(value * DIPOLE_AU2_PER_ANG3_EV)
}

/// Coefficients of the full-space Hamiltonian in the site `I/Z/X` basis.
///
/// Two-body arrays are indexed `[m][n]` and only `n < m` is populated; the
/// `XZ[m][n]` entry multiplies `X_m ⊗ Z_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullSpaceCoefficients {
    pub e: f64,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub xx: Vec<Vec<f64>>,
    pub xz: Vec<Vec<f64>>,
    pub zx: Vec<Vec<f64>>,
    pub zz: Vec<Vec<f64>>,
}

/// Site-basis components of a chromophore's charge distribution fed to the
/// dipole formula: sum `(00+11)/2`, difference `(00−11)/2`, transition `01`.
#[derive(Clone, Copy)]
enum Channel {
    Sum,
    Diff,
    Transition,
}

fn channel_dipole(c: &Chromophore, ch: Channel) -> Vec3 {
    match ch {
        Channel::Sum => c.dipole_sum(),
        Channel::Diff => c.dipole_diff(),
        Channel::Transition => c.mu01,
    }
}

fn pair_element(frame: &ChromophoreFrame, m: usize, a: Channel, n: usize, b: Channel) -> Result<f64> {
    let cm = &frame.chromophores[m];
    let cn = &frame.chromophores[n];
    dipole_dipole_coupling(
        &channel_dipole(cm, a),
        &channel_dipole(cn, b),
        &cm.com_ang,
        &cn.com_ang,
    )
}

/// One-body terms use `(0|h|0) = (0|h|1) = 0` and `(1|h|1) = E_m`.
pub fn full_space_coefficients(frame: &ChromophoreFrame) -> Result<FullSpaceCoefficients> {
    frame.validate()?;
    let n = frame.len();
    let mut out = FullSpaceCoefficients {
        e: 0.0,
        z: vec![0.0; n],
        x: vec![0.0; n],
        xx: vec![vec![0.0; n]; n],
        xz: vec![vec![0.0; n]; n],
        zx: vec![vec![0.0; n]; n],
        zz: vec![vec![0.0; n]; n],
    };
    for (m, c) in frame.chromophores.iter().enumerate() {
        let h00 = 0.0;
        let h11 = c.energy_ev;
        let h01 = 0.0;
        out.e += 0.5 * (h00 + h11);
        out.z[m] += 0.5 * (h00 - h11);
        out.x[m] += h01;
    }
    for m in 0..n {
        for k in 0..n {
            if k == m {
                continue;
            }
            out.z[m] += pair_element(frame, m, Channel::Diff, k, Channel::Sum)?;
            out.x[m] += pair_element(frame, m, Channel::Transition, k, Channel::Sum)?;
        }
        for k in 0..m {
            out.e += pair_element(frame, m, Channel::Sum, k, Channel::Sum)?;
            out.xx[m][k] = pair_element(frame, m, Channel::Transition, k, Channel::Transition)?;
            out.xz[m][k] = pair_element(frame, m, Channel::Transition, k, Channel::Diff)?;
            out.zx[m][k] = pair_element(frame, m, Channel::Diff, k, Channel::Transition)?;
            out.zz[m][k] = pair_element(frame, m, Channel::Diff, k, Channel::Diff)?;
        }
    }
    Ok(out)
}

fn check_full_space_size(n: usize) -> Result<()> {
    if n > MAX_FULL_SPACE_SITES {
        return Err(Error::TooManyQubits {
            n,
            limit: MAX_FULL_SPACE_SITES,
        });
    }
    Ok(())
}

/// Full-space Hamiltonian, one qubit per chromophore. All coefficients are real.
pub fn full_space_hamiltonian(frame: &ChromophoreFrame) -> Result<PauliOperator> {
    let n = frame.len();
    check_full_space_size(n)?;
    let k = full_space_coefficients(frame)?;
    let mut op = PauliOperator::identity(n, k.e);
    let re = |v: f64| Complex64::new(v, 0.0);
    for m in 0..n {
        op.push(re(k.z[m]), PauliString::single(n, m, Pauli::Z))?;
        op.push(re(k.x[m]), PauliString::single(n, m, Pauli::X))?;
        for l in 0..m {
            let pair = |pm: Pauli, pl: Pauli| PauliString::identity(n).with(m, pm).with(l, pl);
            op.push(re(k.xx[m][l]), pair(Pauli::X, Pauli::X))?;
            op.push(re(k.xz[m][l]), pair(Pauli::X, Pauli::Z))?;
            op.push(re(k.zx[m][l]), pair(Pauli::Z, Pauli::X))?;
            op.push(re(k.zz[m][l]), pair(Pauli::Z, Pauli::Z))?;
        }
    }
    Ok(op.canonicalize())
}

/// Full-space dipole component: `Σ_m μ_I I + μ_Z Z_m + μ_X X_m`.
pub fn dipole_full(frame: &ChromophoreFrame, axis: Axis) -> Result<PauliOperator> {
    let n = frame.len();
    check_full_space_size(n)?;
    frame.validate()?;
    let k = axis.index();
    let mut op = PauliOperator::zero(n);
    for (m, c) in frame.chromophores.iter().enumerate() {
        op.push(c.dipole_sum()[k].into(), PauliString::identity(n))?;
        op.push(c.dipole_diff()[k].into(), PauliString::single(n, m, Pauli::Z))?;
        op.push(c.mu01[k].into(), PauliString::single(n, m, Pauli::X))?;
    }
    Ok(op.canonicalize())
}

/// Frenkel (single-excitation) Hamiltonian in the site basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FrenkelMatrix {
    /// Site excitation energies `E_m`, eV.
    pub energies: Vec<f64>,
    /// Symmetric coupling matrix with zero diagonal, eV.
    pub couplings: DMatrix<f64>,
}

impl FrenkelMatrix {
    pub fn new(energies: Vec<f64>, couplings: DMatrix<f64>) -> Result<Self> {
        let n = energies.len();
        if n == 0 || couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::invalid("coupling matrix must be N×N with N ≥ 1"));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::invalid("coupling diagonal must be zero"));
            }
            for j in 0..i {
                if couplings[(i, j)] != couplings[(j, i)] {
                    return Err(Error::invalid("coupling matrix must be symmetric"));
                }
            }
        }
        Ok(Self { energies, couplings })
    }

    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    /// `(N+1) × (N+1)` matrix with the ground state at index 0 and zero energy.
    pub fn embedded(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            m[(i + 1, i + 1)] = self.energies[i];
            for j in 0..n {
                if i != j {
                    m[(i + 1, j + 1)] = self.couplings[(i, j)];
                }
            }
        }
        m
    }
}

/// Site energies from the frame, couplings from transition dipoles.
pub fn frenkel_hamiltonian(frame: &ChromophoreFrame) -> Result<FrenkelMatrix> {
    frame.validate()?;
    let n = frame.len();
    let mut v = DMatrix::zeros(n, n);
    for m in 0..n {
        for k in 0..m {
            let a = &frame.chromophores[m];
            let b = &frame.chromophores[k];
            let j = dipole_dipole_coupling(&a.mu01, &b.mu01, &a.com_ang, &b.com_ang)?;
            v[(m, k)] = j;
            v[(k, m)] = j;
        }
    }
    FrenkelMatrix::new(frame.chromophores.iter().map(|c| c.energy_ev).collect(), v)
}

/// Qubits needed to binary-encode `n_sites` excited states plus the ground state.
pub fn frenkel_qubits(n_sites: usize) -> usize {
    let states = n_sites + 1;
    let mut l = 1;
    while (1usize << l) < states {
        l += 1;
    }
    l
}

/// `|m⟩⟨n|` on `n_qubits` qubits as a sum of `2^L` Pauli strings.
pub fn encode_projector(m: usize, n: usize, n_qubits: usize) -> Result<PauliOperator> {
    if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n: n_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    for idx in [m, n] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, n_qubits });
        }
    }
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let mut terms = vec![(Complex64::new(1.0, 0.0), PauliString::identity(n_qubits))];
    for q in 0..n_qubits {
        let (row, col) = ((m >> q) & 1, (n >> q) & 1);
        // |0⟩⟨0| = (I+Z)/2, |0⟩⟨1| = (X+iY)/2, |1⟩⟨0| = (X−iY)/2, |1⟩⟨1| = (I−Z)/2
        let factor = match (row, col) {
            (0, 0) => [(half, Pauli::I), (half, Pauli::Z)],
            (0, 1) => [(half, Pauli::X), (half_i, Pauli::Y)],
            (1, 0) => [(half, Pauli::X), (-half_i, Pauli::Y)],
            _ => [(half, Pauli::I), (-half, Pauli::Z)],
        };
        terms = terms
            .into_iter()
            .flat_map(|(c, s)| factor.iter().map(move |&(f, p)| (c * f, s.with(q, p))))
            .collect();
    }
    PauliOperator::from_terms(n_qubits, terms)
}

/// Binary encoding on the minimal register, `⌈log₂(N+1)⌉` qubits.
pub fn encode_frenkel(h: &FrenkelMatrix) -> Result<PauliOperator> {
    encode_frenkel_on(h, frenkel_qubits(h.n_sites()))
}

/// Binary encoding on `n_qubits` qubits. Padding states get zero energy and no coupling.
pub fn encode_frenkel_on(h: &FrenkelMatrix, n_qubits: usize) -> Result<PauliOperator> {
    check_frenkel_register(h.n_sites(), n_qubits)?;
    let n = h.n_sites();
    let mut op = PauliOperator::zero(n_qubits);
    for i in 0..n {
        for j in 0..n {
            let value = if i == j { h.energies[i] } else { h.couplings[(i, j)] };
            if value == 0.0 {
                continue;
            }
            let proj = encode_projector(i + 1, j + 1, n_qubits)?;
            op = op.plus(&proj.scaled(value.into()))?;
        }
    }
    Ok(op.canonicalize())
}

fn check_frenkel_register(n_sites: usize, n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n: n_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    if n_sites + 1 > (1usize << n_qubits) {
        return Err(Error::invalid(format!(
            "{n_sites} sites plus ground state do not fit in {n_qubits} qubits"
        )));
    }
    Ok(())
}

/// Frenkel dipole component: `Σ_m μ_m^k (|G⟩⟨m| + |m⟩⟨G|)`.
pub fn dipole_frenkel(frame: &ChromophoreFrame, axis: Axis) -> Result<PauliOperator> {
    dipole_frenkel_on(frame, axis, frenkel_qubits(frame.len()))
}

pub fn dipole_frenkel_on(frame: &ChromophoreFrame, axis: Axis, n_qubits: usize) -> Result<PauliOperator> {
    frame.validate()?;
    check_frenkel_register(frame.len(), n_qubits)?;
    let k = axis.index();
    let mut op = PauliOperator::zero(n_qubits);
    for (m, c) in frame.chromophores.iter().enumerate() {
        let mu = c.mu01[k];
        if mu == 0.0 {
            continue;
        }
        let up = encode_projector(0, m + 1, n_qubits)?;
        let down = encode_projector(m + 1, 0, n_qubits)?;
        op = op.plus(&up.plus(&down)?.scaled(mu.into()))?;
    }
    Ok(op.canonicalize())
}

/// Which qubit encoding of the electronic problem to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Full,
    Frenkel,
}

impl Basis {
    pub fn n_qubits(self, n_sites: usize) -> usize {
        match self {
            Basis::Full => n_sites,
            Basis::Frenkel => frenkel_qubits(n_sites),
        }
    }

    pub fn hamiltonian(self, frame: &ChromophoreFrame) -> Result<PauliOperator> {
        match self {
            Basis::Full => full_space_hamiltonian(frame),
            Basis::Frenkel => encode_frenkel(&frenkel_hamiltonian(frame)?),
        }
    }

    pub fn dipole(self, frame: &ChromophoreFrame, axis: Axis) -> Result<PauliOperator> {
        match self {
            Basis::Full => dipole_full(frame, axis),
            Basis::Frenkel => dipole_frenkel(frame, axis),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::Full => "full",
            Basis::Frenkel => "frenkel",
        }
    }
}
