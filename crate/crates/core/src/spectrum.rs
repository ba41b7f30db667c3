//! Absorption lineshapes from TCFs (dynamic route) and from sampled
//! Hamiltonians (static route), plus peak/width analysis.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::TcfSeries;
use crate::error::{Error, Result};
use crate::exciton::{Axis, Basis, ChromophoreFrame};
use crate::units::HBAR_EV_FS;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OmegaGrid {
    pub start_ev: f64,
    pub stop_ev: f64,
    pub points: usize,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self {
            start_ev: 2.0,
            stop_ev: 7.0,
            points: 2000,
        }
    }
}

impl OmegaGrid {
    pub fn new(start_ev: f64, stop_ev: f64, points: usize) -> Result<Self> {
        let g = Self {
            start_ev,
            stop_ev,
            points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_ev.is_finite() && self.stop_ev.is_finite() && self.start_ev < self.stop_ev) {
            return Err(Error::invalid("omega window needs start < stop"));
        }
        if self.points < 2 {
            return Err(Error::invalid("omega grid needs at least 2 points"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop_ev - self.start_ev) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| self.start_ev + i as f64 * h).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Dynamic,
    Static,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Dynamic => "dynamic",
            Route::Static => "static",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub intensity: Vec<f64>,
    pub tau_fs: f64,
    pub route: Route,
    pub engine: String,
    pub ensemble_size: usize,
}

impl Spectrum {
    pub fn step(&self) -> f64 {
        if self.omega.len() < 2 {
            0.0
        } else {
            self.omega[1] - self.omega[0]
        }
    }

    /// Scales the maximum to 1 and clips negatives; a zero spectrum is left as is.
    pub fn normalize(&mut self) {
        let max = self.intensity.iter().copied().fold(0.0, f64::max);
        let min = self.intensity.iter().copied().fold(0.0, f64::min);
        if max > 0.0 {
            if min < -1e-3 * max {
                log::debug!("clipping negative intensity {:.3e} (relative)", min / max);
            }
            for v in self.intensity.iter_mut() {
                *v = (*v / max).max(0.0);
            }
        } else {
            self.intensity.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }

    pub fn max_abs_difference(&self, other: &Spectrum) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .intensity
            .iter()
            .zip(&other.intensity)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_grid(&self, other: &Spectrum) -> Result<()> {
        let tol = 1e-9 * self.step().abs().max(1e-12);
        let same = self.omega.len() == other.omega.len()
            && self.omega.iter().zip(&other.omega).all(|(a, b)| (a - b).abs() <= tol);
        if !same {
            return Err(Error::GridMismatch(format!(
                "{} points on [{}, {}] vs {} points on [{}, {}]",
                self.omega.len(),
                self.omega.first().unwrap_or(&f64::NAN),
                self.omega.last().unwrap_or(&f64::NAN),
                other.omega.len(),
                other.omega.first().unwrap_or(&f64::NAN),
                other.omega.last().unwrap_or(&f64::NAN),
            )));
        }
        Ok(())
    }
}

/// `I(ω) = 2 Re ∫₀ᵀ e^{iωt/ħ} C(t) e^{−t/τ} dt` by the trapezoid rule, peak-normalized.
pub fn damped_fourier(c: &TcfSeries, tau_fs: f64, grid: &OmegaGrid, engine: &str) -> Result<Spectrum> {
    if !(tau_fs > 0.0) {
        return Err(Error::invalid("tau_fs must be positive"));
    }
    grid.validate()?;
    if c.len() < 2 {
        return Err(Error::invalid("TCF needs at least two points"));
    }
    let t_span = c.t_end() - c.t0;
    if t_span < 3.0 * tau_fs {
        log::warn!("TCF window {t_span} fs is shorter than 3τ = {} fs; expect truncation ringing", 3.0 * tau_fs);
    }
    let n = c.len();
    let weighted: Vec<(f64, Complex64)> = c
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let t = k as f64 * c.dt;
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            (t, v * (w * c.dt * (-t / tau_fs).exp()))
        })
        .collect();
    let omega = grid.values();
    let intensity = omega
        .iter()
        .map(|&w| {
            let sum: Complex64 = weighted
                .iter()
                .map(|&(t, v)| v * Complex64::from_polar(1.0, w * t / HBAR_EV_FS))
                .sum();
            2.0 * sum.re
        })
        .collect();
    let mut s = Spectrum {
        omega,
        intensity,
        tau_fs,
        route: Route::Dynamic,
        engine: engine.to_string(),
        ensemble_size: c.ensemble_size,
    };
    s.normalize();
    Ok(s)
}

/// Excitation energies and `Σ_axes |⟨G|μ_k|α⟩|²` for one frame.
pub fn stick_spectrum(frame: &ChromophoreFrame, basis: Basis) -> Result<Vec<(f64, f64)>> {
    let h = basis.hamiltonian(frame)?;
    h.ensure_hermitian(crate::exact::HERMITIAN_TOLERANCE)?;
    let dense = h.to_dense()?;
    let eig = dense.symmetric_eigen();
    let dim = eig.eigenvalues.len();
    let (g_index, e0) = match basis {
        // |0⟩ is an exact eigenstate of the encoded single-excitation Hamiltonian.
        Basis::Frenkel => (None, h.ground_diagonal().re),
        Basis::Full => {
            let i = eig.eigenvalues.imin();
            (Some(i), eig.eigenvalues[i])
        }
    };
    let ground: Vec<Complex64> = match g_index {
        Some(i) => eig.eigenvectors.column(i).iter().copied().collect(),
        None => {
            let mut v = vec![Complex64::default(); dim];
            v[0] = Complex64::new(1.0, 0.0);
            v
        }
    };
    let mut weights = vec![0.0; dim];
    for axis in Axis::ALL {
        let mu: DMatrix<Complex64> = basis.dipole(frame, axis)?.to_dense()?;
        let mu_g = &mu * nalgebra::DVector::from_vec(ground.clone());
        for (a, w) in weights.iter_mut().enumerate() {
            let amp: Complex64 = eig.eigenvectors.column(a).dotc(&mu_g);
            *w += amp.norm_sqr();
        }
    }
    let mut sticks = Vec::new();
    for a in 0..dim {
        if Some(a) == g_index {
            continue;
        }
        let gap = eig.eigenvalues[a] - e0;
        if basis == Basis::Frenkel && gap.abs() < 1e-12 {
            // ground state itself or a zero-energy padding level
            continue;
        }
        sticks.push((gap, weights[a]));
    }
    Ok(sticks)
}

/// Lorentzian-broadened sticks (`Γ = ħ/τ`), averaged over frames and axes, peak-normalized.
pub fn static_spectrum(frames: &[ChromophoreFrame], basis: Basis, tau_fs: f64, grid: &OmegaGrid) -> Result<Spectrum> {
    if frames.is_empty() {
        return Err(Error::invalid("static spectrum needs at least one frame"));
    }
    if !(tau_fs > 0.0) {
        return Err(Error::invalid("tau_fs must be positive"));
    }
    grid.validate()?;
    let gamma = HBAR_EV_FS / tau_fs;
    let omega = grid.values();
    let per_frame: Vec<Vec<f64>> = frames
        .par_iter()
        .map(|f| {
            let sticks = stick_spectrum(f, basis)?;
            Ok(omega
                .iter()
                .map(|&w| {
                    sticks
                        .iter()
                        .map(|&(e, s)| s * gamma / ((w - e).powi(2) + gamma * gamma))
                        .sum::<f64>()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut intensity = vec![0.0; omega.len()];
    for row in &per_frame {
        for (acc, v) in intensity.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let norm = 3.0 * frames.len() as f64;
    intensity.iter_mut().for_each(|v| *v /= norm);
    let mut s = Spectrum {
        omega,
        intensity,
        tau_fs,
        route: Route::Static,
        engine: "none".into(),
        ensemble_size: frames.len(),
    };
    s.normalize();
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub position_ev: f64,
    pub height: f64,
    pub fwhm_ev: f64,
}

/// Local maxima above 5% of the global maximum, ascending in ω.
/// Positions are refined by a parabola through the three top points;
/// widths come from linearly interpolated half-height crossings.
pub fn peak_analysis(s: &Spectrum) -> Vec<Peak> {
    let y = &s.intensity;
    let x = &s.omega;
    let n = y.len();
    let max = y.iter().copied().fold(0.0, f64::max);
    if n < 3 || max <= 0.0 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= 0.05 * max) {
            continue;
        }
        let h = x[1] - x[0];
        let denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        let (pos, height) = if denom < 0.0 {
            let d = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            (x[i] + d * h, y[i] - 0.25 * (y[i - 1] - y[i + 1]) * d)
        } else {
            (x[i], y[i])
        };
        let half = 0.5 * height;
        let mut left = x[0];
        for j in (0..i).rev() {
            if y[j] < half {
                left = x[j] + (half - y[j]) / (y[j + 1] - y[j]) * h;
                break;
            }
        }
        let mut right = x[n - 1];
        for j in i + 1..n {
            if y[j] < half {
                right = x[j - 1] + (y[j - 1] - half) / (y[j - 1] - y[j]) * h;
                break;
            }
        }
        peaks.push(Peak {
            position_ev: pos,
            height,
            fwhm_ev: right - left,
        });
    }
    peaks
}

/// The peak with the largest height.
pub fn main_peak(s: &Spectrum) -> Option<Peak> {
    peak_analysis(s)
        .into_iter()
        .max_by(|a, b| a.height.total_cmp(&b.height))
}

pub fn write_spectrum(s: &Spectrum, mut w: impl Write) -> Result<()> {
    writeln!(w, "# tau_fs={}", s.tau_fs)?;
    writeln!(w, "# route={}", s.route.name())?;
    writeln!(w, "# engine={}", s.engine)?;
    writeln!(w, "# ensemble_size={}", s.ensemble_size)?;
    writeln!(w, "# normalization=peak")?;
    writeln!(w, "omega_ev,intensity")?;
    for (o, i) in s.omega.iter().zip(&s.intensity) {
        writeln!(w, "{o},{i}")?;
    }
    Ok(())
}

pub fn save_spectrum(s: &Spectrum, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref()).map_err(Error::io_at(path.as_ref()))?);
    write_spectrum(s, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_spectrum(reader: impl BufRead) -> Result<Spectrum> {
    let mut s = Spectrum {
        omega: Vec::new(),
        intensity: Vec::new(),
        tau_fs: f64::NAN,
        route: Route::Dynamic,
        engine: String::new(),
        ensemble_size: 0,
    };
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim();
        let perr = |message: String| Error::Parse { line: lineno, message };
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                match k.trim() {
                    "tau_fs" => s.tau_fs = v.trim().parse().map_err(|e| perr(format!("tau_fs: {e}")))?,
                    "route" => {
                        s.route = match v.trim() {
                            "dynamic" => Route::Dynamic,
                            "static" => Route::Static,
                            other => return Err(perr(format!("unknown route {other:?}"))),
                        }
                    }
                    "engine" => s.engine = v.trim().to_string(),
                    "ensemble_size" => {
                        s.ensemble_size = v.trim().parse().map_err(|e| perr(format!("ensemble_size: {e}")))?
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != "omega_ev,intensity" {
                return Err(perr(format!("expected header omega_ev,intensity, got {line:?}")));
            }
            seen_header = true;
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| perr("expected 2 fields".into()))?;
        s.omega.push(a.trim().parse().map_err(|e| perr(format!("{e}")))?);
        s.intensity.push(b.trim().parse().map_err(|e| perr(format!("{e}")))?);
    }
    if s.omega.len() < 2 {
        return Err(Error::Parse {
            line: 0,
            message: "spectrum file needs at least two rows".into(),
        });
    }
    Ok(s)
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    read_spectrum(BufReader::new(File::open(path.as_ref()).map_err(Error::io_at(path.as_ref()))?))
}
