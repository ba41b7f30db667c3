//! Synthetic energy-gap fluctuations from independent Ornstein–Uhlenbeck processes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::exciton::{Chromophore, ChromophoreFrame, Vec3};

/// Fixed dipoles and center of mass of one chromophore.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteGeometry {
    pub mu00: Vec3,
    pub mu11: Vec3,
    pub mu01: Vec3,
    pub com_ang: Vec3,
}

/// Regular cluster: sites on a `2 × 2 × k` grid, transition dipoles in a
/// herringbone pattern tilted by `±herringbone_deg` from the stacking axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterLayout {
    pub spacing_ang: f64,
    pub transition_dipole_au: f64,
    pub ground_dipole_au: f64,
    pub excited_dipole_au: f64,
    pub herringbone_deg: f64,
}

impl Default for ClusterLayout {
    fn default() -> Self {
        Self {
            spacing_ang: 5.0,
            transition_dipole_au: 2.0,
            ground_dipole_au: 0.0,
            excited_dipole_au: 0.0,
            herringbone_deg: 30.0,
        }
    }
}

impl ClusterLayout {
    pub fn sites(&self, n: usize) -> Vec<SiteGeometry> {
        let tilt = self.herringbone_deg.to_radians();
        (0..n)
            .map(|i| {
                let (ix, iy, iz) = (i % 2, (i / 2) % 2, i / 4);
                let sign = if (ix + iy) % 2 == 0 { 1.0 } else { -1.0 };
                let axis = [sign * tilt.sin(), 0.0, tilt.cos()];
                let scaled = |s: f64| [s * axis[0], s * axis[1], s * axis[2]];
                SiteGeometry {
                    mu00: scaled(self.ground_dipole_au),
                    mu11: scaled(self.excited_dipole_au),
                    mu01: scaled(self.transition_dipole_au),
                    com_ang: [
                        ix as f64 * self.spacing_ang,
                        iy as f64 * self.spacing_ang,
                        iz as f64 * self.spacing_ang,
                    ],
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OuConfig {
    pub sites: Vec<SiteGeometry>,
    pub mean_energy_ev: f64,
    pub energy_sigma_ev: f64,
    pub correlation_time_fs: f64,
    pub dt_fs: f64,
    pub n_frames: usize,
    pub seed: u64,
}

impl OuConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::invalid("OU config needs at least one chromophore"));
        }
        if !(self.correlation_time_fs > 0.0) {
            return Err(Error::invalid("correlation_time must be positive"));
        }
        if !(self.energy_sigma_ev >= 0.0) || !self.mean_energy_ev.is_finite() {
            return Err(Error::invalid("energy_sigma must be non-negative"));
        }
        if !(self.dt_fs > 0.0) {
            return Err(Error::invalid("dt_frame must be positive"));
        }
        if self.n_frames < 2 {
            return Err(Error::invalid("≥ 2 frames required"));
        }
        Ok(())
    }

    /// Same bath with the RNG stream of ensemble member `index`.
    pub fn member(&self, index: usize) -> Self {
        Self {
            seed: self.seed.wrapping_add(index as u64),
            ..self.clone()
        }
    }
}

/// Exact OU discretization, one independent process per chromophore, started
/// from the stationary distribution:
/// `E(t+Δ) = Ē + (E(t) − Ē) e^{−Δ/τc} + σ √(1 − e^{−2Δ/τc}) ξ`.
pub fn synthesize_ou(cfg: &OuConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.sites.len();
    let decay = (-cfg.dt_fs / cfg.correlation_time_fs).exp();
    let kick = cfg.energy_sigma_ev * (1.0 - decay * decay).sqrt();
    let mean = cfg.mean_energy_ev;

    let mut energies: Vec<f64> = (0..n)
        .map(|_| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            mean + cfg.energy_sigma_ev * xi
        })
        .collect();
    let mut frames = Vec::with_capacity(cfg.n_frames);
    for j in 0..cfg.n_frames {
        if j > 0 {
            for e in energies.iter_mut() {
                let xi: f64 = StandardNormal.sample(&mut rng);
                *e = mean + (*e - mean) * decay + kick * xi;
            }
        }
        let chromophores = cfg
            .sites
            .iter()
            .zip(&energies)
            .map(|(s, &e)| Chromophore {
                energy_ev: e,
                mu00: s.mu00,
                mu11: s.mu11,
                mu01: s.mu01,
                com_ang: s.com_ang,
            })
            .collect();
        frames.push(ChromophoreFrame { chromophores });
    }
    Trajectory::new(0.0, cfg.dt_fs, frames)
}
