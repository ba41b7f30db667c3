//! JSON Lines trajectory files.
//!
//! Line 1: `{"format": "exciton-traj-v1", "dt_fs": …, "n_chromophores": …}`.
//! Each further line is one frame:
//! `{"t_fs": …, "chromophores": [{"E_ev": …, "mu00": [x,y,z], "mu11": …, "mu01": …, "com_ang": …}, …]}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::exciton::{Chromophore, ChromophoreFrame};

pub const FORMAT_TAG: &str = "exciton-traj-v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    dt_fs: f64,
    n_chromophores: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    t_fs: f64,
    chromophores: Vec<Chromophore>,
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let file = File::open(path.as_ref()).map_err(Error::io_at(path.as_ref()))?;
    read_trajectory(BufReader::new(file))
}

pub fn read_trajectory(reader: impl BufRead) -> Result<Trajectory> {
    let mut header: Option<Header> = None;
    let mut t0 = 0.0;
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| Error::Parse {
            line: lineno,
            message: e.to_string(),
        };
        match &header {
            None => {
                let h: Header = serde_json::from_str(&line).map_err(parse_err)?;
                if h.format != FORMAT_TAG {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unknown format {:?}, expected {FORMAT_TAG:?}", h.format),
                    });
                }
                header = Some(h);
            }
            Some(h) => {
                let rec: FrameRecord = serde_json::from_str(&line).map_err(parse_err)?;
                let j = frames.len();
                if rec.chromophores.len() != h.n_chromophores {
                    return Err(Error::Trajectory(format!(
                        "frame {j} (line {lineno}) has {} chromophores, header declares {}",
                        rec.chromophores.len(),
                        h.n_chromophores
                    )));
                }
                if j == 0 {
                    t0 = rec.t_fs;
                } else {
                    let expected = t0 + j as f64 * h.dt_fs;
                    if (rec.t_fs - expected).abs() > 1e-6 * h.dt_fs.max(1.0) {
                        return Err(Error::Trajectory(format!(
                            "nonuniform spacing: frame {j} (line {lineno}) at t = {} fs, expected {expected} fs",
                            rec.t_fs
                        )));
                    }
                }
                frames.push(ChromophoreFrame {
                    chromophores: rec.chromophores,
                });
            }
        }
    }
    let h = header.ok_or_else(|| Error::Parse {
        line: 0,
        message: "empty trajectory file".into(),
    })?;
    Trajectory::new(t0, h.dt_fs, frames)
}

pub fn save_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref()).map_err(Error::io_at(path.as_ref()))?);
    write_trajectory(traj, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(traj: &Trajectory, mut w: impl Write) -> Result<()> {
    let header = Header {
        format: FORMAT_TAG.to_string(),
        dt_fs: traj.dt_fs(),
        n_chromophores: traj.n_chromophores(),
    };
    writeln!(w, "{}", to_json(&header)?)?;
    for (j, frame) in traj.frames().iter().enumerate() {
        let rec = FrameRecord {
            t_fs: traj.time(j),
            chromophores: frame.chromophores.clone(),
        };
        writeln!(w, "{}", to_json(&rec)?)?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Numeric(format!("cannot serialize: {e}")))
}
