//! TOML job configuration and the end-to-end pipeline.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{
    ensemble_average, isotropic_average, relative_difference, save_tcf, tcf_direct_components,
    tcf_small_lambda_components, Component, Engine, TcfMethod, TcfOptions, TcfSeries,
};
use crate::error::{Error, Result};
use crate::exact::{ExactOptions, PropagationGrid, Scheme};
use crate::exciton::{Axis, Basis, ChromophoreFrame};
use crate::spectrum::{damped_fourier, peak_analysis, save_spectrum, static_spectrum, OmegaGrid, Peak, Spectrum};
use crate::trajectory::{
    dipole_series, hamiltonian_series, load_trajectory, synthesize_ou, ClusterLayout, DipoleMode, OuConfig,
    SiteGeometry, Trajectory, DEFAULT_FRAME_DT_FS,
};
use crate::vqa::{Integrator, VqaOptions};

pub const EFFECTIVE_CONFIG_FILE: &str = "config.effective.toml";

fn default_lambda() -> f64 {
    0.1
}
fn default_tau() -> f64 {
    50.0
}
fn default_jobs() -> usize {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    pub t_max_fs: f64,
    pub record_every_fs: f64,
    pub substep_fs: f64,
    /// Rerun exact propagations at half the substep and require agreement.
    pub convergence_gate: bool,
    pub exact_scheme: Scheme,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max_fs: 100.0,
            record_every_fs: 0.5,
            substep_fs: crate::exact::DEFAULT_SUBSTEP_FS,
            convergence_gate: true,
            exact_scheme: Scheme::Magnus4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub n_trajectories: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_trajectories: 1,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaticConfig {
    /// Use every n-th frame of each trajectory.
    pub decimation: usize,
}

impl Default for StaticConfig {
    fn default() -> Self {
        Self { decimation: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuSource {
    pub n_chromophores: usize,
    #[serde(default = "OuSource::default_mean")]
    pub mean_energy_ev: f64,
    #[serde(default = "OuSource::default_sigma")]
    pub energy_sigma_ev: f64,
    #[serde(default = "OuSource::default_tau_c")]
    pub correlation_time_fs: f64,
    #[serde(default = "OuSource::default_dt")]
    pub dt_fs: f64,
    /// Defaults to just enough frames to cover `t_max_fs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_frames: Option<usize>,
    #[serde(default)]
    pub layout: ClusterLayout,
    /// Explicit geometry; overrides `layout`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<SiteGeometry>>,
}

impl OuSource {
    fn default_mean() -> f64 {
        4.5
    }
    fn default_sigma() -> f64 {
        0.05
    }
    fn default_tau_c() -> f64 {
        50.0
    }
    fn default_dt() -> f64 {
        DEFAULT_FRAME_DT_FS
    }

    pub fn to_ou_config(&self, t_max_fs: f64, seed: u64) -> OuConfig {
        let n_frames = self
            .n_frames
            .unwrap_or_else(|| (t_max_fs / self.dt_fs - 1e-9).ceil().max(1.0) as usize + 1);
        OuConfig {
            sites: self
                .sites
                .clone()
                .unwrap_or_else(|| self.layout.sites(self.n_chromophores)),
            mean_energy_ev: self.mean_energy_ev,
            energy_sigma_ev: self.energy_sigma_ev,
            correlation_time_fs: self.correlation_time_fs,
            dt_fs: self.dt_fs,
            n_frames,
            seed,
        }
    }
}

/// Exactly one of `path`, `paths` or `ou`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ou: Option<OuSource>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub basis: Basis,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub tcf_method: TcfMethod,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_tau")]
    pub tau_fs: f64,
    #[serde(default)]
    pub dipole_mode: DipoleMode,
    #[serde(default)]
    pub integrator: Integrator,
    /// Frenkel basis only: evolve in the frame rotating at the mean site energy.
    #[serde(default)]
    pub rotating_frame: bool,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: TimeGrid,
    #[serde(default)]
    pub omega: OmegaGrid,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default, rename = "static")]
    pub static_route: StaticConfig,
    pub trajectory: TrajectorySource,
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("{key} must be positive")))
    }
}

impl JobConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        let cfg: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            Error::config(if key == "." { "<root>".into() } else { key }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref()).map_err(Error::io_at(path.as_ref()))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<root>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("tau_fs", self.tau_fs)?;
        positive("grid.t_max_fs", self.grid.t_max_fs)?;
        positive("grid.record_every_fs", self.grid.record_every_fs)?;
        positive("grid.substep_fs", self.grid.substep_fs)?;
        if self.jobs == 0 {
            return Err(Error::config("jobs", "jobs must be positive"));
        }
        if self.ensemble.n_trajectories == 0 {
            return Err(Error::config("ensemble.n_trajectories", "ensemble.n_trajectories must be positive"));
        }
        if self.static_route.decimation == 0 {
            return Err(Error::config("static.decimation", "static.decimation must be positive"));
        }
        self.omega
            .validate()
            .map_err(|e| Error::config("omega", e.to_string()))?;
        self.propagation_grid(0.0)
            .map_err(|e| Error::config("grid", e.to_string()))?;
        if self.rotating_frame && self.basis != Basis::Frenkel {
            return Err(Error::config("rotating_frame", "rotating_frame requires basis = \"frenkel\""));
        }
        let t = &self.trajectory;
        let given = [t.path.is_some(), t.paths.is_some(), t.ou.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(Error::config("trajectory", "give exactly one of path, paths or ou"));
        }
        if let Some(paths) = &t.paths {
            if paths.is_empty() {
                return Err(Error::config("trajectory.paths", "trajectory.paths must not be empty"));
            }
        }
        if let Some(ou) = &t.ou {
            if ou.n_chromophores == 0 {
                return Err(Error::config("trajectory.ou.n_chromophores", "trajectory.ou.n_chromophores must be positive"));
            }
            positive("trajectory.ou.correlation_time_fs", ou.correlation_time_fs)?;
            positive("trajectory.ou.dt_fs", ou.dt_fs)?;
            if !(ou.energy_sigma_ev >= 0.0) {
                return Err(Error::config(
                    "trajectory.ou.energy_sigma_ev",
                    "trajectory.ou.energy_sigma_ev must be non-negative",
                ));
            }
            if let Some(sites) = &ou.sites {
                if sites.len() != ou.n_chromophores {
                    return Err(Error::config("trajectory.ou.sites", "one site per chromophore required"));
                }
            }
        }
        Ok(())
    }

    pub fn propagation_grid(&self, t0: f64) -> Result<PropagationGrid> {
        PropagationGrid::new(t0, t0 + self.grid.t_max_fs, self.grid.substep_fs, self.grid.record_every_fs)
    }

    pub fn tcf_options(&self, engine: Engine, rotating_frame_ev: Option<f64>) -> TcfOptions {
        TcfOptions {
            engine,
            exact: ExactOptions {
                convergence_gate: self.grid.convergence_gate,
                scheme: self.grid.exact_scheme,
                ..ExactOptions::default()
            },
            vqa: VqaOptions {
                integrator: self.integrator,
                ..VqaOptions::default()
            },
            rotating_frame_ev,
        }
    }
}

/// A pipeline failure tagged with the stage it happened in.
#[derive(Debug)]
pub struct JobError {
    pub stage: &'static str,
    pub source: Error,
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.source)
    }
}

impl std::error::Error for JobError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, JobError>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, JobError> {
        self.map_err(|source| JobError { stage, source })
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))
}

/// Loads or synthesizes every ensemble member, in member order.
pub fn load_members(cfg: &JobConfig) -> Result<Vec<Trajectory>> {
    let t = &cfg.trajectory;
    if let Some(p) = &t.path {
        return Ok(vec![load_trajectory(p)?]);
    }
    if let Some(ps) = &t.paths {
        return ps.iter().map(load_trajectory).collect();
    }
    let ou = t.ou.as_ref().ok_or_else(|| Error::config("trajectory", "no trajectory source"))?;
    let pool = pool(cfg.jobs)?;
    pool.install(|| {
        (0..cfg.ensemble.n_trajectories)
            .into_par_iter()
            .map(|i| synthesize_ou(&ou.to_ou_config(cfg.grid.t_max_fs, cfg.ensemble.seed.wrapping_add(i as u64))))
            .collect()
    })
}

/// Mean site energy over all frames and chromophores.
fn mean_site_energy(traj: &Trajectory) -> f64 {
    let (sum, n) = traj
        .frames()
        .iter()
        .flat_map(|f| f.chromophores.iter())
        .fold((0.0, 0usize), |(s, n), c| (s + c.energy_ev, n + 1));
    sum / n as f64
}

/// x, y, z TCFs of one trajectory.
pub fn member_tcfs(cfg: &JobConfig, traj: &Trajectory, engine: Engine) -> Result<Vec<TcfSeries>> {
    let h = hamiltonian_series(traj, cfg.basis)?;
    let mus = Axis::ALL
        .iter()
        .map(|&axis| dipole_series(traj, cfg.basis, axis, cfg.dipole_mode))
        .collect::<Result<Vec<_>>>()?;
    let labelled: Vec<_> = mus.iter().zip([Component::X, Component::Y, Component::Z]).collect();
    let grid = cfg.propagation_grid(traj.t0_fs())?;
    let rot = cfg.rotating_frame.then(|| mean_site_energy(traj));
    let opts = cfg.tcf_options(engine, rot);
    match cfg.tcf_method {
        TcfMethod::Direct => tcf_direct_components(&h, &labelled, &grid, &opts),
        TcfMethod::SmallLambda => tcf_small_lambda_components(&h, &labelled, &grid, cfg.lambda, &opts),
    }
}

/// Ensemble-averaged `[x, y, z, iso]`.
pub fn ensemble_tcfs(cfg: &JobConfig, members: &[Trajectory], engine: Engine) -> Result<Vec<TcfSeries>> {
    let pool = pool(cfg.jobs)?;
    let per_member: Vec<Vec<TcfSeries>> = pool.install(|| {
        members
            .par_iter()
            .map(|traj| member_tcfs(cfg, traj, engine))
            .collect::<Result<_>>()
    })?;
    let mut out = Vec::with_capacity(4);
    for c in 0..3 {
        let column: Vec<TcfSeries> = per_member.iter().map(|m| m[c].clone()).collect();
        out.push(ensemble_average(&column)?);
    }
    let iso = isotropic_average(&out[0], &out[1], &out[2])?;
    out.push(iso);
    Ok(out)
}

/// Every `decimation`-th frame of every member.
pub fn static_samples(cfg: &JobConfig, members: &[Trajectory]) -> Vec<ChromophoreFrame> {
    members
        .iter()
        .flat_map(|t| t.frames().iter().step_by(cfg.static_route.decimation).cloned())
        .collect()
}

pub fn static_stage(cfg: &JobConfig, members: &[Trajectory]) -> Result<Spectrum> {
    let frames = static_samples(cfg, members);
    let pool = pool(cfg.jobs)?;
    pool.install(|| static_spectrum(&frames, cfg.basis, cfg.tau_fs, &cfg.omega))
}

#[derive(Clone, Debug, Default)]
pub struct JobReport {
    pub files: Vec<PathBuf>,
    pub dynamic_peaks: Vec<(Engine, Vec<Peak>)>,
    pub static_peaks: Vec<Peak>,
    pub max_delta_c: Option<f64>,
}

impl JobReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (engine, peaks) in &self.dynamic_peaks {
            s += &format!("dynamic spectrum ({}):\n{}", engine.name(), peak_table(peaks));
        }
        s += &format!("static spectrum:\n{}", peak_table(&self.static_peaks));
        if let Some(d) = self.max_delta_c {
            s += &format!("max |dC| (iso, vqa vs exact): {d:.6e}\n");
        }
        s += &format!("wrote {} files\n", self.files.len());
        s
    }
}

fn write_tcfs(dir: &Path, tcfs: &[TcfSeries], engine: Engine, files: &mut Vec<PathBuf>) -> Result<()> {
    for c in tcfs {
        let path = dir.join(format!("tcf_{}_{}.csv", c.component.name(), engine.name()));
        save_tcf(c, &path)?;
        files.push(path);
    }
    Ok(())
}

/// Writes `t_fs,x,y,z,iso` rows of `|C_exact(t) − C_vqa(t)|`, every column
/// divided by the isotropic `|C_exact(0)|` (a single Cartesian component may
/// vanish at `t = 0`). Returns the isotropic maximum.
fn write_delta(path: &Path, reference: &[TcfSeries], test: &[TcfSeries]) -> Result<f64> {
    let iso = relative_difference(&reference[3], &test[3])?;
    let norm = reference[3].values[0].norm();
    let cols = reference
        .iter()
        .zip(test)
        .take(3)
        .map(|(r, t)| {
            r.check_grid(t)?;
            Ok(r.values.iter().zip(&t.values).map(|(a, b)| (a - b).norm() / norm).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut text = String::from("t_fs,x,y,z,iso\n");
    for k in 0..reference[0].len() {
        text += &format!(
            "{},{},{},{},{}\n",
            reference[0].time(k),
            cols[0][k],
            cols[1][k],
            cols[2][k],
            iso[k]
        );
    }
    fs::write(path, text).map_err(Error::io_at(path))?;
    Ok(iso.iter().copied().fold(0.0, f64::max))
}

/// Full pipeline: exact reference, optional VQA run and ΔC, static spectrum.
pub fn run_job(cfg: &JobConfig) -> std::result::Result<JobReport, JobError> {
    cfg.validate().stage("config")?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(Error::from).stage("output")?;
    let mut report = JobReport::default();
    let echo = dir.join(EFFECTIVE_CONFIG_FILE);
    fs::write(&echo, cfg.to_toml_string().stage("config")?)
        .map_err(Error::from)
        .stage("output")?;
    report.files.push(echo);

    let members = load_members(cfg).stage("trajectory")?;
    log::info!("{} trajectories, {} chromophores", members.len(), members[0].n_chromophores());

    let exact = ensemble_tcfs(cfg, &members, Engine::Exact).stage("exact")?;
    write_tcfs(&dir, &exact, Engine::Exact, &mut report.files).stage("output")?;
    let spec = damped_fourier(&exact[3], cfg.tau_fs, &cfg.omega, Engine::Exact.name()).stage("spectrum")?;
    let path = dir.join("spectrum_dynamic_exact.csv");
    save_spectrum(&spec, &path).stage("output")?;
    report.files.push(path);
    report.dynamic_peaks.push((Engine::Exact, peak_analysis(&spec)));

    let stat = static_stage(cfg, &members).stage("static")?;
    let path = dir.join("spectrum_static.csv");
    save_spectrum(&stat, &path).stage("output")?;
    report.files.push(path);
    report.static_peaks = peak_analysis(&stat);

    if cfg.engine == Engine::Vqa {
        let vqa = ensemble_tcfs(cfg, &members, Engine::Vqa).stage("vqa")?;
        write_tcfs(&dir, &vqa, Engine::Vqa, &mut report.files).stage("output")?;
        let spec = damped_fourier(&vqa[3], cfg.tau_fs, &cfg.omega, Engine::Vqa.name()).stage("spectrum")?;
        let path = dir.join("spectrum_dynamic_vqa.csv");
        save_spectrum(&spec, &path).stage("output")?;
        report.files.push(path);
        report.dynamic_peaks.push((Engine::Vqa, peak_analysis(&spec)));
        let path = dir.join("delta_c.csv");
        report.max_delta_c = Some(write_delta(&path, &exact, &vqa).stage("compare")?);
        report.files.push(path);
    }
    Ok(report)
}

pub fn peak_table(peaks: &[Peak]) -> String {
    let mut s = String::from("  position_ev    height    fwhm_ev\n");
    for p in peaks {
        s += &format!("  {:11.5} {:9.5} {:10.5}\n", p.position_ev, p.height, p.fwhm_ev);
    }
    s
}

/// Peak tables of both spectra and their largest pointwise difference.
pub fn compare_report(a: &Spectrum, b: &Spectrum) -> Result<String> {
    let diff = a.max_abs_difference(b)?;
    let pa = peak_analysis(a);
    let pb = peak_analysis(b);
    let mut s = format!("A ({}, {}, tau {} fs):\n{}", a.route.name(), a.engine, a.tau_fs, peak_table(&pa));
    s += &format!("B ({}, {}, tau {} fs):\n{}", b.route.name(), b.engine, b.tau_fs, peak_table(&pb));
    s += &format!("max |I_A - I_B|: {diff:.6e}\n");
    let main = |p: &[Peak]| p.iter().copied().max_by(|x, y| x.height.total_cmp(&y.height));
    if let (Some(x), Some(y)) = (main(&pa), main(&pb)) {
        s += &format!(
            "main peak shift (B - A): {:.6} eV\nmain peak FWHM ratio (B / A): {:.4}\n",
            y.position_ev - x.position_ev,
            y.fwhm_ev / x.fwhm_ev
        );
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
basis = "full"
[trajectory.ou]
n_chromophores = 1
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = JobConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.engine, Engine::Exact);
        assert_eq!(cfg.tcf_method, TcfMethod::Direct);
        assert_eq!(cfg.lambda, 0.1);
        assert_eq!(cfg.tau_fs, 50.0);
        assert_eq!(cfg.omega, OmegaGrid::default());
        assert_eq!(cfg.ensemble.n_trajectories, 1);
        assert_eq!(cfg.trajectory.ou.as_ref().unwrap().mean_energy_ev, 4.5);
    }

    #[test]
    fn negative_tau_names_constraint() {
        let err = JobConfig::from_toml_str(&format!("tau_fs = -1\n{MINIMAL}")).unwrap_err();
        assert!(err.to_string().contains("tau_fs must be positive"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = JobConfig::from_toml_str(&format!("{MINIMAL}bogus = 3\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trajectory.ou") && msg.contains("bogus"), "{msg}");
        let err = JobConfig::from_toml_str("basis = \"full\"\n[grid]\nt_max = 3\n[trajectory.ou]\nn_chromophores = 1\n").unwrap_err();
        assert!(err.to_string().contains("grid"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let cfg = JobConfig::from_toml_str(MINIMAL).unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(JobConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn trajectory_source_must_be_unique() {
        let text = "basis = \"full\"\n[trajectory]\npath = \"a.jsonl\"\n[trajectory.ou]\nn_chromophores = 1\n";
        assert!(JobConfig::from_toml_str(text).is_err());
        assert!(JobConfig::from_toml_str("basis = \"full\"\n[trajectory]\n").is_err());
    }

    #[test]
    fn rotating_frame_needs_frenkel() {
        let err = JobConfig::from_toml_str(&format!("rotating_frame = true\n{MINIMAL}")).unwrap_err();
        assert!(err.to_string().contains("frenkel"));
    }

    #[test]
    fn stage_tag_in_message() {
        let e: std::result::Result<(), JobError> = Err(Error::invalid("boom")).stage("vqa");
        let e = e.unwrap_err();
        assert_eq!(e.to_string(), "[vqa] invalid input: boom");
        assert_eq!(e.exit_code(), 2);
    }
}
