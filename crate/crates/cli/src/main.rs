use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vqspec::correlation::{load_tcf, Component, Engine};
use vqspec::exciton::Basis;
use vqspec::job::{
    compare_report, ensemble_tcfs, load_members, peak_table, run_job, static_stage, JobConfig, StageExt,
    EFFECTIVE_CONFIG_FILE,
};
use vqspec::spectrum::{damped_fourier, load_spectrum, peak_analysis, save_spectrum};
use vqspec::trajectory::save_trajectory;
use vqspec::Error;

#[derive(Parser)]
#[command(name = "vqspec", version, about = "Absorption spectra from exciton trajectories, exact or variational")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize OU trajectories and write them as JSONL.
    Synth(Overrides),
    /// Ensemble-averaged dipole TCFs for one engine.
    Tcf(Overrides),
    /// Damped Fourier transform of a TCF file.
    Spectrum {
        /// TCF file with a `t_fs,re,im` header.
        tcf: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Output file; defaults to `<out>/spectrum_dynamic.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lorentzian-broadened ensemble spectrum.
    Static(Overrides),
    /// Peak tables and the largest pointwise difference of two spectra.
    Compare { a: PathBuf, b: PathBuf },
    /// Full pipeline.
    Run(Overrides),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Vqa,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Full,
    Frenkel,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long, value_enum)]
    basis: Option<BasisArg>,
    #[arg(long, allow_negative_numbers = true)]
    tau_fs: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
}

impl Overrides {
    fn load(&self, required: bool) -> Result<JobConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => JobConfig::load(p)?,
            None if required => return Err(Error::Config { key: "--config".into(), message: "a config file is required".into() }),
            // Only the spectrum-side fields matter here.
            None => JobConfig::from_toml_str("basis = \"full\"\n[trajectory.ou]\nn_chromophores = 1\n")?,
        };
        if let Some(s) = self.seed {
            cfg.ensemble.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(e) = self.engine {
            cfg.engine = match e {
                EngineArg::Exact => Engine::Exact,
                EngineArg::Vqa => Engine::Vqa,
            };
        }
        if let Some(b) = self.basis {
            cfg.basis = match b {
                BasisArg::Full => Basis::Full,
                BasisArg::Frenkel => Basis::Frenkel,
            };
        }
        if let Some(t) = self.tau_fs {
            cfg.tau_fs = t;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn prepare_out(cfg: &JobConfig) -> Result<(), Error> {
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join(EFFECTIVE_CONFIG_FILE), cfg.to_toml_string()?)?;
    Ok(())
}

fn execute(cmd: Command) -> Result<(), (i32, String)> {
    let plain = |e: Error| (e.exit_code(), e.to_string());
    let staged = |e: vqspec::job::JobError| (e.exit_code(), e.to_string());
    match cmd {
        Command::Synth(o) => {
            let cfg = o.load(true).map_err(plain)?;
            prepare_out(&cfg).map_err(plain)?;
            let members = load_members(&cfg).stage("trajectory").map_err(staged)?;
            for (i, t) in members.iter().enumerate() {
                let path = cfg.output_dir.join(format!("trajectory_{i:03}.jsonl"));
                save_trajectory(t, &path).stage("output").map_err(staged)?;
                println!("{}", path.display());
            }
        }
        Command::Tcf(o) => {
            let cfg = o.load(true).map_err(plain)?;
            prepare_out(&cfg).map_err(plain)?;
            let members = load_members(&cfg).stage("trajectory").map_err(staged)?;
            let stage = if cfg.engine == Engine::Vqa { "vqa" } else { "exact" };
            let tcfs = ensemble_tcfs(&cfg, &members, cfg.engine).stage(stage).map_err(staged)?;
            for c in &tcfs {
                let path = cfg
                    .output_dir
                    .join(format!("tcf_{}_{}.csv", c.component.name(), cfg.engine.name()));
                vqspec::correlation::save_tcf(c, &path).stage("output").map_err(staged)?;
                println!("{}", path.display());
            }
        }
        Command::Spectrum { tcf, overrides, output } => {
            let cfg = overrides.load(false).map_err(plain)?;
            let c = load_tcf(&tcf, Component::Iso).stage("input").map_err(staged)?;
            let s = damped_fourier(&c, cfg.tau_fs, &cfg.omega, "file").stage("spectrum").map_err(staged)?;
            let path = output.unwrap_or_else(|| cfg.output_dir.join("spectrum_dynamic.csv"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| plain(e.into()))?;
            }
            save_spectrum(&s, &path).stage("output").map_err(staged)?;
            print!("{}", peak_table(&peak_analysis(&s)));
            println!("{}", path.display());
        }
        Command::Static(o) => {
            let cfg = o.load(true).map_err(plain)?;
            prepare_out(&cfg).map_err(plain)?;
            let members = load_members(&cfg).stage("trajectory").map_err(staged)?;
            let s = static_stage(&cfg, &members).stage("static").map_err(staged)?;
            let path = cfg.output_dir.join("spectrum_static.csv");
            save_spectrum(&s, &path).stage("output").map_err(staged)?;
            print!("{}", peak_table(&peak_analysis(&s)));
            println!("{}", path.display());
        }
        Command::Compare { a, b } => {
            let sa = load_spectrum(&a).stage("input").map_err(staged)?;
            let sb = load_spectrum(&b).stage("input").map_err(staged)?;
            print!("{}", compare_report(&sa, &sb).stage("compare").map_err(staged)?);
        }
        Command::Run(o) => {
            let cfg = o.load(true).map_err(plain)?;
            let report = run_job(&cfg).map_err(staged)?;
            print!("{}", report.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
