//! Dipole time-correlation functions `C(t) = ⟨G| μ(t) U(t) μ(0) |G⟩`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{expm_action, propagate_many, ExactOptions, PropagationGrid};
use crate::pauli::{PauliOperator, PauliString, StateVector};
use crate::trajectory::TimeDependentOperator;
use crate::units::HBAR_EV_FS;
use crate::vqa::{build_ansatz, evolve_variational, VqaOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    Z,
    Iso,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Z => "z",
            Component::Iso => "iso",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Exact,
    Vqa,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Vqa => "vqa",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TcfMethod {
    #[default]
    Direct,
    SmallLambda,
}

/// Complex series on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TcfSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
    pub component: Component,
    pub ensemble_size: usize,
}

impl TcfSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<Complex64>, component: Component) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("TCF grid spacing must be positive"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numeric("non-finite TCF value".into()));
        }
        Ok(Self {
            t0,
            dt,
            values,
            component,
            ensemble_size: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn check_grid(&self, other: &TcfSeries) -> Result<()> {
        let tol = 1e-9 * self.dt;
        if self.len() != other.len() || (self.t0 - other.t0).abs() > tol || (self.dt - other.dt).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "{} points from {} by {} vs {} points from {} by {}",
                self.len(),
                self.t0,
                self.dt,
                other.len(),
                other.t0,
                other.dt
            )));
        }
        Ok(())
    }
}

/// Engine choice and its knobs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TcfOptions {
    pub engine: Engine,
    pub exact: ExactOptions,
    pub vqa: VqaOptions,
    /// Evolve under `H − Ē(I − |G⟩⟨G|)` and restore the phase afterwards.
    pub rotating_frame_ev: Option<f64>,
}

/// Recorded evolution of one prepared state `A|G⟩ / ‖A|G⟩‖`.
#[derive(Clone, Debug)]
pub struct EvolvedState {
    grid: PropagationGrid,
    records: Vec<StateVector>,
    /// `‖A|G⟩‖`, factored out at preparation.
    prep_norm: f64,
}

impl EvolvedState {
    pub fn new(grid: PropagationGrid, records: Vec<StateVector>, prep_norm: f64) -> Result<Self> {
        if records.len() != grid.n_records() {
            return Err(Error::LengthMismatch {
                expected: grid.n_records(),
                found: records.len(),
            });
        }
        Ok(Self {
            grid,
            records,
            prep_norm,
        })
    }

    pub fn at(&self, t: f64) -> Result<&StateVector> {
        Ok(&self.records[self.grid.record_index(t)?])
    }

    pub fn records(&self) -> &[StateVector] {
        &self.records
    }

    pub fn prep_norm(&self) -> f64 {
        self.prep_norm
    }
}

/// `⟨G| B |U(t) A G⟩`, with the preparation norm restored.
pub fn transition_amplitude_direct(
    evolved: &EvolvedState,
    b: &PauliOperator,
    g: &StateVector,
    t: f64,
) -> Result<Complex64> {
    let s = evolved.at(t)?;
    let bra = b.adjoint().apply(g)?;
    Ok(bra.inner(s)? * evolved.prep_norm)
}

/// One quadrature of `⟨g|B|e⟩` from the ancilla-assisted interferometer.
///
/// The ancilla (highest bit) starts in `(|0⟩ + e^{iφ}|1⟩)/√2` over `|g⟩`.
/// Controlled on the ancilla being `|0⟩`, a unitary `V` with `V|g⟩ = |e⟩`
/// and then `B` are applied. `⟨X_anc⟩ = Re(e^{iφ} ⟨g|B|e⟩*)`, so
/// `φ = 0` reads the real part and `φ = π/2` the imaginary part.
pub fn transition_amplitude_hadamard(b: &PauliOperator, evolved: &StateVector, g: &StateVector, phi: f64) -> Result<f64> {
    let b = b.canonicalize();
    let unitary = b.len() == 1 && (b.terms()[0].0.norm() - 1.0).abs() < 1e-12;
    if !unitary {
        return Err(Error::NonUnitary(format!(
            "expected a single Pauli string with unit coefficient, got {} terms",
            b.len()
        )));
    }
    let n = g.n_qubits();
    if evolved.n_qubits() != n || b.n_qubits() != n {
        return Err(Error::QubitMismatch {
            expected: n,
            found: evolved.n_qubits(),
        });
    }
    for (name, s) in [("reference", g), ("evolved", evolved)] {
        if (s.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("{name} state must be normalized")));
        }
    }
    let d = g.dim();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut reg = vec![Complex64::default(); 2 * d];
    let tail = Complex64::from_polar(r, phi);
    for (i, &a) in g.amplitudes().iter().enumerate() {
        reg[i] = a * r;
        reg[d + i] = a * tail;
    }

    // Anti-controlled V: phase-aligned Householder reflection taking g to e.
    let overlap = g.inner(evolved)?;
    let p = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let w: Vec<Complex64> = g
        .amplitudes()
        .iter()
        .zip(evolved.amplitudes())
        .map(|(gi, ei)| gi - p.conj() * ei)
        .collect();
    let w2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let low = &mut reg[..d];
    if w2 > 1e-30 {
        let proj: Complex64 = w.iter().zip(low.iter()).map(|(wi, xi)| wi.conj() * xi).sum();
        let f = proj * (2.0 / w2);
        for (x, wi) in low.iter_mut().zip(&w) {
            *x = p * (*x - f * wi);
        }
    } else {
        low.iter_mut().for_each(|x| *x *= p);
    }

    // Anti-controlled B.
    let (coeff, string) = b.terms()[0];
    let mut moved = vec![Complex64::default(); d];
    for (i, &a) in reg[..d].iter().enumerate() {
        let (phase, j) = string.apply_to_basis(i);
        moved[j] = coeff * phase * a;
    }
    reg[..d].copy_from_slice(&moved);

    let x_anc: f64 = (0..d).map(|i| 2.0 * (reg[i].conj() * reg[d + i]).re).sum();
    Ok(x_anc)
}

/// `Re + i·Im` assembled from the two interferometer quadratures.
pub fn hadamard_amplitude(b: &PauliOperator, evolved: &StateVector, g: &StateVector) -> Result<Complex64> {
    let re = transition_amplitude_hadamard(b, evolved, g, 0.0)?;
    let im = transition_amplitude_hadamard(b, evolved, g, std::f64::consts::FRAC_PI_2)?;
    Ok(Complex64::new(re, im))
}

/// `I − |0…0⟩⟨0…0|` as a Pauli sum.
fn excited_projector(n_qubits: usize) -> PauliOperator {
    let mut ground = PauliOperator::identity(n_qubits, 1.0);
    for q in 0..n_qubits {
        let half = PauliOperator::from_terms(
            n_qubits,
            [
                (Complex64::new(0.5, 0.0), PauliString::identity(n_qubits)),
                (Complex64::new(0.5, 0.0), PauliString::single(n_qubits, q, crate::pauli::Pauli::Z)),
            ],
        )
        .expect("same register");
        ground = ground.product(&half).expect("same register");
    }
    PauliOperator::identity(n_qubits, 1.0)
        .plus(&ground.scaled(Complex64::new(-1.0, 0.0)))
        .expect("same register")
        .canonicalize()
}

/// `H − Ē·P` with `P = I − |G⟩⟨G|`; requires `[H(t), P] = 0` on every frame.
fn rotating_hamiltonian(h: &TimeDependentOperator, e_bar: f64) -> Result<TimeDependentOperator> {
    let p = excited_projector(h.n_qubits());
    for frame in h.frame_operators() {
        let comm = frame.commutator(&p)?.canonicalize();
        let worst = comm.terms().iter().map(|(c, _)| c.norm()).fold(0.0, f64::max);
        if worst > 1e-12 {
            return Err(Error::invalid(
                "rotating frame needs a Hamiltonian that does not couple the ground state (use the frenkel basis)",
            ));
        }
    }
    h.plus_constant(&p.scaled(Complex64::new(-e_bar, 0.0)))
}

/// Cache of evolved states keyed by the prepared state up to a global phase.
struct Evolutions {
    evolved: Vec<EvolvedState>,
}

impl Evolutions {
    /// Returns the cache slot of `state` (normalized) and the phase `c` with `state = c · prepared[slot]`.
    fn slot(prepared: &mut Vec<StateVector>, state: &StateVector) -> (usize, Complex64) {
        for (i, p) in prepared.iter().enumerate() {
            let ov = p.inner(state).expect("same register");
            if (ov.norm() - 1.0).abs() < 1e-12 {
                return (i, ov);
            }
        }
        prepared.push(state.clone());
        (prepared.len() - 1, Complex64::new(1.0, 0.0))
    }

    fn run(
        h: &TimeDependentOperator,
        prepared: Vec<StateVector>,
        grid: &PropagationGrid,
        opts: &TcfOptions,
    ) -> Result<Self> {
        let (h_eff, e_bar) = match opts.rotating_frame_ev {
            Some(e) => (rotating_hamiltonian(h, e)?, e),
            None => (h.clone(), 0.0),
        };
        let mut records: Vec<Vec<StateVector>> = match opts.engine {
            Engine::Exact => propagate_many(&h_eff, &prepared, grid, &opts.exact)?,
            Engine::Vqa => prepared
                .par_iter()
                .map(|s| {
                    let a = build_ansatz(s.n_qubits(), s.clone())?;
                    let tr = evolve_variational(&h_eff, &a, grid, &opts.vqa)?;
                    log::debug!(
                        "vqa evolution: {} steps, max residual {:.3e}",
                        tr.diagnostics.len(),
                        tr.max_residual()
                    );
                    tr.states(&a)
                })
                .collect::<Result<_>>()?,
        };
        if e_bar != 0.0 {
            for rec in records.iter_mut() {
                for (k, s) in rec.iter_mut().enumerate() {
                    let t = grid.record_time(k) - grid.t0();
                    let phase = Complex64::from_polar(1.0, -e_bar * t / HBAR_EV_FS);
                    s.amplitudes_mut().iter_mut().skip(1).for_each(|a| *a *= phase);
                }
            }
        }
        let evolved = records
            .into_iter()
            .map(|r| EvolvedState::new(*grid, r, 1.0))
            .collect::<Result<_>>()?;
        Ok(Self { evolved })
    }
}

/// `⟨G|B|ψ⟩` for each Pauli term, `G = |0…0⟩`.
fn bra_ground(b: &PauliOperator, psi: &[Complex64]) -> Complex64 {
    b.terms()
        .iter()
        .map(|(c, s)| {
            let (phase, idx) = s.apply_to_basis(0);
            // ⟨G|c·P|ψ⟩ = c · conj(⟨idx|P|G⟩) · ψ[idx] for Hermitian P.
            c * phase.conj() * psi[idx]
        })
        .sum()
}

fn check_shapes(h: &TimeDependentOperator, mus: &[&TimeDependentOperator]) -> Result<()> {
    for mu in mus {
        if mu.n_qubits() != h.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: h.n_qubits(),
                found: mu.n_qubits(),
            });
        }
    }
    Ok(())
}

/// Direct TCF for several dipole components sharing one set of evolutions.
pub fn tcf_direct_components(
    h: &TimeDependentOperator,
    mus: &[(&TimeDependentOperator, Component)],
    grid: &PropagationGrid,
    opts: &TcfOptions,
) -> Result<Vec<TcfSeries>> {
    let ops: Vec<&TimeDependentOperator> = mus.iter().map(|(m, _)| *m).collect();
    check_shapes(h, &ops)?;
    let n = h.n_qubits();
    // Per component: (cache slot, weight a_j · phase) per Pauli term of μ(0).
    let mut prepared = Vec::new();
    let mut plans: Vec<Vec<(usize, Complex64)>> = Vec::new();
    for mu in &ops {
        let mu0 = mu.at(grid.t0());
        let mut plan = Vec::new();
        for &(a, s) in mu0.terms() {
            if a.norm() == 0.0 {
                continue;
            }
            let (phase, idx) = s.apply_to_basis(0);
            let state = StateVector::basis(n, idx);
            let (slot, c) = Evolutions::slot(&mut prepared, &state);
            plan.push((slot, a * phase * c));
        }
        plans.push(plan);
    }
    let ev = Evolutions::run(h, prepared, grid, opts)?;
    let times = grid.record_times();
    let mut out = Vec::with_capacity(ops.len());
    for ((mu, comp), plan) in mus.iter().zip(&plans) {
        let mut values = vec![Complex64::default(); times.len()];
        for (k, &t) in times.iter().enumerate() {
            let b = mu.at(t);
            values[k] = plan
                .iter()
                .map(|&(slot, w)| w * bra_ground(&b, ev.evolved[slot].records[k].amplitudes()))
                .sum();
        }
        out.push(TcfSeries::new(grid.t0(), grid.record_every(), values, *comp)?);
    }
    Ok(out)
}

pub fn tcf_direct(
    h: &TimeDependentOperator,
    mu: &TimeDependentOperator,
    grid: &PropagationGrid,
    opts: &TcfOptions,
) -> Result<TcfSeries> {
    Ok(tcf_direct_components(h, &[(mu, Component::X)], grid, opts)?.remove(0))
}

/// `e^{iλμ}|G⟩`.
fn exp_dipole_ground(mu: &PauliOperator, lambda: f64) -> StateVector {
    let mut v = StateVector::zero_state(mu.n_qubits()).into_amplitudes();
    expm_action(mu, Complex64::new(0.0, lambda), &mut v);
    StateVector::from_amplitudes(mu.n_qubits(), v).expect("dimension preserved")
}

/// Small-λ estimator
/// `C ≈ (1/4λ²) ⟨G|(e^{−iλμ(t)} − e^{iλμ(t)}) U(t) (e^{iλμ(0)} − e^{−iλμ(0)})|G⟩`.
pub fn tcf_small_lambda_components(
    h: &TimeDependentOperator,
    mus: &[(&TimeDependentOperator, Component)],
    grid: &PropagationGrid,
    lambda: f64,
    opts: &TcfOptions,
) -> Result<Vec<TcfSeries>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be positive"));
    }
    let ops: Vec<&TimeDependentOperator> = mus.iter().map(|(m, _)| *m).collect();
    check_shapes(h, &ops)?;
    let mut prepared = Vec::new();
    let mut plans = Vec::new();
    for mu in &ops {
        let mu0 = mu.at(grid.t0());
        let plus = Evolutions::slot(&mut prepared, &exp_dipole_ground(&mu0, lambda));
        let minus = Evolutions::slot(&mut prepared, &exp_dipole_ground(&mu0, -lambda));
        plans.push([plus, minus]);
    }
    let ev = Evolutions::run(h, prepared, grid, opts)?;
    let times = grid.record_times();
    let scale = 1.0 / (4.0 * lambda * lambda);
    let mut out = Vec::with_capacity(ops.len());
    for ((mu, comp), [(sp, cp), (sm, cm)]) in mus.iter().zip(&plans) {
        let mut bra_cache: Option<StateVector> = None;
        let mut values = vec![Complex64::default(); times.len()];
        for (k, &t) in times.iter().enumerate() {
            if bra_cache.is_none() || !mu.is_constant() {
                let mut_t = mu.at(t);
                let mut d = exp_dipole_ground(&mut_t, lambda);
                d.axpy(Complex64::new(-1.0, 0.0), &exp_dipole_ground(&mut_t, -lambda))?;
                bra_cache = Some(d);
            }
            let bra = bra_cache.as_ref().expect("filled above");
            let mut ket = ev.evolved[*sp].records[k].clone().scaled(*cp);
            ket.axpy(-cm, &ev.evolved[*sm].records[k])?;
            values[k] = bra.inner(&ket)? * scale;
        }
        out.push(TcfSeries::new(grid.t0(), grid.record_every(), values, *comp)?);
    }
    Ok(out)
}

pub fn tcf_small_lambda(
    h: &TimeDependentOperator,
    mu: &TimeDependentOperator,
    grid: &PropagationGrid,
    lambda: f64,
    opts: &TcfOptions,
) -> Result<TcfSeries> {
    Ok(tcf_small_lambda_components(h, &[(mu, Component::X)], grid, lambda, opts)?.remove(0))
}

/// Evolves `A|G⟩/‖A|G⟩‖` for a single prepared operator.
pub fn evolve_prepared(
    h: &TimeDependentOperator,
    a: &PauliOperator,
    grid: &PropagationGrid,
    opts: &TcfOptions,
) -> Result<EvolvedState> {
    let mut s = a.apply(&StateVector::zero_state(a.n_qubits()))?;
    let norm = s.normalize();
    if norm == 0.0 {
        return Err(Error::invalid("prepared state vanishes"));
    }
    let mut ev = Evolutions::run(h, vec![s], grid, opts)?;
    let mut out = ev.evolved.pop().expect("one state");
    out.prep_norm = norm;
    Ok(out)
}

pub fn isotropic_average(cx: &TcfSeries, cy: &TcfSeries, cz: &TcfSeries) -> Result<TcfSeries> {
    cx.check_grid(cy)?;
    cx.check_grid(cz)?;
    let values = (0..cx.len())
        .map(|k| (cx.values[k] + cy.values[k] + cz.values[k]) / 3.0)
        .collect();
    let mut out = TcfSeries::new(cx.t0, cx.dt, values, Component::Iso)?;
    out.ensemble_size = cx.ensemble_size;
    Ok(out)
}

/// Pointwise mean, summed in member order.
pub fn ensemble_average(members: &[TcfSeries]) -> Result<TcfSeries> {
    let first = members
        .first()
        .ok_or_else(|| Error::invalid("ensemble average of an empty list"))?;
    let mut sum = vec![Complex64::default(); first.len()];
    for m in members {
        first.check_grid(m)?;
        for (s, v) in sum.iter_mut().zip(&m.values) {
            *s += v;
        }
    }
    let n = members.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    let mut out = TcfSeries::new(first.t0, first.dt, sum, first.component)?;
    out.ensemble_size = members.iter().map(|m| m.ensemble_size).sum();
    Ok(out)
}

/// `|c_ref(t) − c_test(t)| / |c_ref(0)|`.
pub fn relative_difference(c_ref: &TcfSeries, c_test: &TcfSeries) -> Result<Vec<f64>> {
    c_ref.check_grid(c_test)?;
    let norm = c_ref
        .values
        .first()
        .map(|v| v.norm())
        .filter(|&n| n > 0.0)
        .ok_or_else(|| Error::Numeric("reference TCF vanishes at t = 0".into()))?;
    Ok(c_ref
        .values
        .iter()
        .zip(&c_test.values)
        .map(|(a, b)| (a - b).norm() / norm)
        .collect())
}

pub fn write_tcf(c: &TcfSeries, mut w: impl Write) -> Result<()> {
    writeln!(w, "t_fs,re,im")?;
    for (k, v) in c.values.iter().enumerate() {
        writeln!(w, "{},{},{}", c.time(k), v.re, v.im)?;
    }
    Ok(())
}

pub fn save_tcf(c: &TcfSeries, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref()).map_err(Error::io_at(path.as_ref()))?);
    write_tcf(c, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_tcf(reader: impl BufRead, component: Component) -> Result<TcfSeries> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 1 || line.starts_with("t_fs") {
            if line != "t_fs,re,im" {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header t_fs,re,im, got {line:?}"),
                });
            }
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        times.push(fields[0]);
        values.push(Complex64::new(fields[1], fields[2]));
    }
    if times.len() < 2 {
        return Err(Error::Parse {
            line: 0,
            message: "TCF file needs at least two rows".into(),
        });
    }
    let dt = times[1] - times[0];
    for (k, t) in times.iter().enumerate() {
        if (t - (times[0] + k as f64 * dt)).abs() > 1e-6 * dt.abs().max(1e-12) {
            return Err(Error::Parse {
                line: k + 2,
                message: "nonuniform time grid".into(),
            });
        }
    }
    TcfSeries::new(times[0], dt, values, component)
}

pub fn load_tcf(path: impl AsRef<Path>, component: Component) -> Result<TcfSeries> {
    read_tcf(BufReader::new(File::open(path.as_ref()).map_err(Error::io_at(path.as_ref()))?), component)
}
