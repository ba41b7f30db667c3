//! Classical-bath trajectories of chromophore electronic data.

mod io;
mod ou;
mod series;

pub use io::{load_trajectory, read_trajectory, save_trajectory, write_trajectory, FORMAT_TAG};
pub use ou::{synthesize_ou, ClusterLayout, OuConfig, SiteGeometry};
pub use series::{dipole_series, hamiltonian_series, DipoleMode, TimeDependentOperator};

use crate::error::{Error, Result};
use crate::exciton::ChromophoreFrame;

/// Frame spacing used when none is given, fs.
pub const DEFAULT_FRAME_DT_FS: f64 = 2.0;

/// Uniformly spaced frames with a constant chromophore count.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    t0_fs: f64,
    dt_fs: f64,
    frames: Vec<ChromophoreFrame>,
}

impl Trajectory {
    pub fn new(t0_fs: f64, dt_fs: f64, frames: Vec<ChromophoreFrame>) -> Result<Self> {
        if !(dt_fs > 0.0) || !dt_fs.is_finite() || !t0_fs.is_finite() {
            return Err(Error::Trajectory(format!("frame spacing must be positive, got {dt_fs}")));
        }
        if frames.len() < 2 {
            return Err(Error::Trajectory("≥ 2 frames required".into()));
        }
        let n = frames[0].len();
        for (j, f) in frames.iter().enumerate() {
            if f.len() != n {
                return Err(Error::Trajectory(format!(
                    "frame {j} has {} chromophores, expected {n}",
                    f.len()
                )));
            }
            f.validate()
                .map_err(|e| Error::Trajectory(format!("frame {j}: {e}")))?;
        }
        Ok(Self { t0_fs, dt_fs, frames })
    }

    pub fn t0_fs(&self) -> f64 {
        self.t0_fs
    }

    pub fn dt_fs(&self) -> f64 {
        self.dt_fs
    }

    pub fn frames(&self) -> &[ChromophoreFrame] {
        &self.frames
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_chromophores(&self) -> usize {
        self.frames[0].len()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0_fs + j as f64 * self.dt_fs
    }

    pub fn t_end_fs(&self) -> f64 {
        self.time(self.frames.len() - 1)
    }
}
