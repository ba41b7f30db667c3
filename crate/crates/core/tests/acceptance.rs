//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown.
//! `ACCEPTANCE_ONLY=1,3` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vqspec::correlation::*;
use vqspec::exact::{ground_state, propagate_many, ExactOptions, PropagationGrid};
use vqspec::exciton::*;
use vqspec::job::{run_job, JobConfig};
use vqspec::pauli::{Pauli, PauliOperator, PauliString, StateVector};
use vqspec::spectrum::{damped_fourier, main_peak, static_spectrum, OmegaGrid, Peak};
use vqspec::trajectory::*;
use vqspec::units::{DIPOLE_AU2_PER_ANG3_EV, HBAR_EV_FS};
use vqspec::vqa::{build_ansatz, evolve_variational, Ansatz, VqaOptions};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

fn cluster_layout() -> ClusterLayout {
    ClusterLayout {
        spacing_ang: 5.0,
        transition_dipole_au: 2.0,
        ground_dipole_au: 0.3,
        excited_dipole_au: 0.5,
        herringbone_deg: 30.0,
    }
}

fn ou_cluster(n_sites: usize, t_max: f64, seed: u64) -> Trajectory {
    let dt = 2.0;
    synthesize_ou(&OuConfig {
        sites: cluster_layout().sites(n_sites),
        mean_energy_ev: 4.5,
        energy_sigma_ev: 0.05,
        correlation_time_fs: 50.0,
        dt_fs: dt,
        n_frames: (t_max / dt).ceil() as usize + 1,
        seed,
    })
    .unwrap()
}

fn series(traj: &Trajectory, basis: Basis) -> (TimeDependentOperator, Vec<TimeDependentOperator>) {
    let h = hamiltonian_series(traj, basis).unwrap();
    let mus = Axis::ALL
        .iter()
        .map(|&a| dipole_series(traj, basis, a, DipoleMode::Averaged).unwrap())
        .collect();
    (h, mus)
}

fn labelled(mus: &[TimeDependentOperator]) -> Vec<(&TimeDependentOperator, Component)> {
    mus.iter().zip([Component::X, Component::Y, Component::Z]).collect()
}

fn iso(c: &[TcfSeries]) -> TcfSeries {
    isotropic_average(&c[0], &c[1], &c[2]).unwrap()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Isotropic exact TCF of the 4-site cluster over `t_max` fs, cached per window.
fn cluster_exact(t_max: f64) -> TcfSeries {
    static CACHE: OnceLock<std::sync::Mutex<BTreeMap<u64, TcfSeries>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = t_max.to_bits();
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return c.clone();
    }
    let traj = ou_cluster(4, t_max, 1);
    let (h, mus) = series(&traj, Basis::Full);
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let c = iso(&tcf_direct_components(&h, &labelled(&mus), &grid, &TcfOptions::default()).unwrap());
    cache.lock().unwrap().insert(key, c.clone());
    c
}

fn criterion_1() -> Outcome {
    let t_max = 100.0;
    let traj = ou_cluster(4, t_max, 1);
    let (h, mus) = series(&traj, Basis::Full);
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let reference = cluster_exact(t_max);
    let opts = TcfOptions {
        engine: Engine::Vqa,
        ..TcfOptions::default()
    };
    let start = Instant::now();
    let vqa = single_thread(|| iso(&tcf_direct_components(&h, &labelled(&mus), &grid, &opts).unwrap()));
    let secs = start.elapsed().as_secs_f64();
    let d = max_of(&relative_difference(&reference, &vqa).unwrap());
    outcome(
        d < 0.01 && secs < 600.0,
        format!("max |dC| = {d:.3e} (< 1e-2), vqa runtime {secs:.0} s single-threaded (< 600 s)"),
    )
}

fn criterion_2() -> Outcome {
    let t_max = 100.0;
    let traj = ou_cluster(15, t_max, 2);
    let (h, mus) = series(&traj, Basis::Frenkel);
    assert_eq!(h.n_qubits(), 4);
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let lambda = 0.1;
    let start = Instant::now();
    let exact = iso(&tcf_small_lambda_components(&h, &labelled(&mus), &grid, lambda, &TcfOptions::default()).unwrap());
    let opts = TcfOptions {
        engine: Engine::Vqa,
        ..TcfOptions::default()
    };
    let vqa = iso(&tcf_small_lambda_components(&h, &labelled(&mus), &grid, lambda, &opts).unwrap());
    let secs = start.elapsed().as_secs_f64();
    let d = max_of(&relative_difference(&exact, &vqa).unwrap());
    outcome(
        d < 0.05 && secs < 600.0,
        format!("15 sites on 4 qubits, lambda 0.1: max |dC| = {d:.3e} (< 5e-2), runtime {secs:.0} s (< 600 s)"),
    )
}

fn monomer_frame(e: f64, mu00: Vec3, mu11: Vec3, mu01: Vec3) -> ChromophoreFrame {
    ChromophoreFrame::new(vec![Chromophore {
        energy_ev: e,
        mu00,
        mu11,
        mu01,
        com_ang: [0.0; 3],
    }])
    .unwrap()
}

fn frozen(frame: ChromophoreFrame, t_end: f64) -> Trajectory {
    Trajectory::new(0.0, t_end, vec![frame.clone(), frame]).unwrap()
}

fn criterion_3() -> Outcome {
    let t_max = 1000.0;
    let traj = frozen(monomer_frame(4.5, [0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]), t_max);
    let (h, mus) = series(&traj, Basis::Full);
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let c = iso(&tcf_direct_components(&h, &labelled(&mus), &grid, &TcfOptions::default()).unwrap());
    let omega = OmegaGrid::default();
    let tau = 50.0;
    let s = damped_fourier(&c, tau, &omega, "exact").unwrap();
    let p = main_peak(&s).unwrap();
    let want = 2.0 * HBAR_EV_FS / tau;
    let pos_ok = (p.position_ev - 4.5).abs() <= omega.step();
    let width_err = (p.fwhm_ev - want).abs() / want;
    outcome(
        pos_ok && width_err < 0.05,
        format!(
            "peak {:.4} eV (4.5 +- {:.4}), FWHM {:.5} eV vs {want:.5} ({:.2}% off, < 5%)",
            p.position_ev,
            omega.step(),
            p.fwhm_ev,
            100.0 * width_err
        ),
    )
}

fn random_vec3(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    [0, 1, 2].map(|_| rng.random_range(-scale..scale))
}

fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> ChromophoreFrame {
    let chromophores = (0..n)
        .map(|m| Chromophore {
            energy_ev: rng.random_range(3.5..5.5),
            mu00: random_vec3(rng, 1.0),
            mu11: random_vec3(rng, 1.0),
            mu01: random_vec3(rng, 2.5),
            // distinct lattice cells keep centers well separated
            com_ang: [
                (m % 2) as f64 * 6.0 + rng.random_range(-0.5..0.5),
                ((m / 2) % 2) as f64 * 6.0 + rng.random_range(-0.5..0.5),
                (m / 4) as f64 * 6.0 + rng.random_range(-0.5..0.5),
            ],
        })
        .collect();
    ChromophoreFrame::new(chromophores).unwrap()
}

fn dd(a: &Vec3, b: &Vec3, ra: &Vec3, rb: &Vec3) -> f64 {
    let d = [rb[0] - ra[0], rb[1] - ra[1], rb[2] - ra[2]];
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let r = r2.sqrt();
    let dot = |u: &Vec3, v: &Vec3| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    (dot(a, b) * r2 - 3.0 * dot(a, &d) * dot(b, &d)) / (r2 * r2 * r) * DIPOLE_AU2_PER_ANG3_EV
}

/// Product-basis matrix: site energies on `|1⟩`, dipole-dipole pairs with `μ_{ab}` per site.
fn diabatic_oracle(frame: &ChromophoreFrame) -> DMatrix<f64> {
    let c = &frame.chromophores;
    let n = c.len();
    let dim = 1usize << n;
    let bit = |x: usize, m: usize| ((x >> m) & 1) as u8;
    let mut h = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let diff = a ^ b;
            let mut v = 0.0;
            if diff == 0 {
                v += (0..n).filter(|&m| bit(a, m) == 1).map(|m| c[m].energy_ev).sum::<f64>();
            }
            for m in 0..n {
                for k in 0..m {
                    if diff & !((1 << m) | (1 << k)) != 0 {
                        continue;
                    }
                    v += dd(
                        &c[m].dipole(bit(a, m), bit(b, m)),
                        &c[k].dipole(bit(a, k), bit(b, k)),
                        &c[m].com_ang,
                        &c[k].com_ang,
                    );
                }
            }
            h[(a, b)] = v;
        }
    }
    h
}

fn max_dense_diff(a: &DMatrix<Complex64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_frenkel: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=15);
        let energies: Vec<f64> = (0..n).map(|_| rng.random_range(3.5..5.5)).collect();
        let mut v = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let x = rng.random_range(-0.2..0.2);
                v[(i, j)] = x;
                v[(j, i)] = x;
            }
        }
        let fm = FrenkelMatrix::new(energies, v).unwrap();
        let dense = encode_frenkel(&fm).unwrap().to_dense().unwrap();
        let dim = dense.nrows();
        let mut want = DMatrix::zeros(dim, dim);
        want.view_mut((0, 0), (n + 1, n + 1)).copy_from(&fm.embedded());
        worst_frenkel = worst_frenkel.max(max_dense_diff(&dense, &want));
    }
    let mut worst_full: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let frame = random_frame(&mut rng, n);
        let dense = full_space_hamiltonian(&frame).unwrap().to_dense().unwrap();
        worst_full = worst_full.max(max_dense_diff(&dense, &diabatic_oracle(&frame)));
    }
    outcome(
        worst_frenkel < 1e-12 && worst_full < 1e-12,
        format!("frenkel max dev {worst_frenkel:.1e}, full-space max dev {worst_full:.1e} (< 1e-12, 200 cases each)"),
    )
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    let letters: Vec<Pauli> = (0..n)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
        .collect();
    PauliString::from_letters(&letters).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let g = random_state(&mut rng, n);
        let e = random_state(&mut rng, n);
        let p = PauliOperator::from_string(Complex64::new(1.0, 0.0), random_pauli(&mut rng, n));
        let direct = g.inner(&p.apply(&e).unwrap()).unwrap();
        let measured = hadamard_amplitude(&p, &e, &g).unwrap();
        worst = worst.max((direct - measured).norm());
    }
    outcome(worst < 1e-10, format!("max |hadamard - direct| = {worst:.1e} (< 1e-10, 100 cases)"))
}

fn criterion_6() -> Outcome {
    let t_max = 20.0;
    let traj = frozen(monomer_frame(4.5, [0.4, 0.0, 0.1], [-0.3, 0.2, 0.0], [1.2, 0.0, 0.5]), t_max);
    let (h, mus) = series(&traj, Basis::Full);
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let opts = TcfOptions::default();
    let direct = iso(&tcf_direct_components(&h, &labelled(&mus), &grid, &opts).unwrap());
    let lambdas = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let c = iso(&tcf_small_lambda_components(&h, &labelled(&mus), &grid, l, &opts).unwrap());
            c.values
                .iter()
                .zip(&direct.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    outcome(
        (slope - 2.0).abs() <= 0.1,
        format!(
            "log-log slope {slope:.4} (2 +- 0.1), max |C_l - C| = {}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn peak_of(s: &vqspec::spectrum::Spectrum) -> Peak {
    main_peak(s).expect("nonzero spectrum")
}

fn criterion_7() -> Outcome {
    // The damped transform at tau = 100 fs needs a window of at least 3 tau.
    let t_max = 300.0;
    let members = 24;
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let mut tcfs = vec![cluster_exact(t_max)];
    let mut frames = ou_cluster(4, t_max, 1).frames().to_vec();
    for seed in 2..=members as u64 {
        let traj = ou_cluster(4, t_max, seed);
        let (h, mus) = series(&traj, Basis::Full);
        let opts = TcfOptions {
            exact: ExactOptions {
                convergence_gate: false,
                ..ExactOptions::default()
            },
            ..TcfOptions::default()
        };
        tcfs.push(iso(&tcf_direct_components(&h, &labelled(&mus), &grid, &opts).unwrap()));
        frames.extend(traj.frames().iter().cloned());
    }
    let c = ensemble_average(&tcfs).unwrap();
    let omega = OmegaGrid::new(4.0, 5.0, 2001).unwrap();
    let d33 = peak_of(&damped_fourier(&c, 33.0, &omega, "exact").unwrap());
    let d100 = peak_of(&damped_fourier(&c, 100.0, &omega, "exact").unwrap());
    let shift = (d33.position_ev - d100.position_ev).abs();
    let change = (d33.fwhm_ev - d100.fwhm_ev).abs() / d100.fwhm_ev;
    let s33 = peak_of(&static_spectrum(&frames, Basis::Full, 33.0, &omega).unwrap());
    let s100 = peak_of(&static_spectrum(&frames, Basis::Full, 100.0, &omega).unwrap());
    let ratio = s33.fwhm_ev / s100.fwhm_ev;
    outcome(
        shift < 0.005 && change < 0.15 && ratio > 1.5,
        format!(
            "{members} trajectories; dynamic: shift {shift:.4} eV (< 0.005), FWHM {:.4}/{:.4} eV change {:.1}% (< 15%); static FWHM {:.4}/{:.4} eV ratio {ratio:.3} (> 1.5)",
            d33.fwhm_ev,
            d100.fwhm_ev,
            100.0 * change,
            s33.fwhm_ev,
            s100.fwhm_ev
        ),
    )
}

fn criterion_8() -> Outcome {
    let members = 200;
    let t_max = 300.0;
    let dt = 0.5;
    let omega = OmegaGrid::new(3.5, 5.5, 2001).unwrap();
    let site = SiteGeometry {
        mu00: [0.0; 3],
        mu11: [0.0; 3],
        mu01: [1.0, 0.0, 0.0],
        com_ang: [0.0; 3],
    };
    let grid = PropagationGrid::new(0.0, t_max, 0.005, 0.5).unwrap();
    let mut tcfs = Vec::new();
    let mut frames = Vec::new();
    for i in 0..members {
        let traj = synthesize_ou(&OuConfig {
            sites: vec![site.clone()],
            mean_energy_ev: 4.5,
            energy_sigma_ev: 0.1,
            correlation_time_fs: 5.0,
            dt_fs: dt,
            n_frames: (t_max / dt) as usize + 1,
            seed: 800 + i as u64,
        })
        .unwrap();
        let (h, mus) = series(&traj, Basis::Full);
        let opts = TcfOptions {
            exact: ExactOptions {
                convergence_gate: i == 0,
                ..ExactOptions::default()
            },
            ..TcfOptions::default()
        };
        tcfs.push(iso(&tcf_direct_components(&h, &labelled(&mus), &grid, &opts).unwrap()));
        frames.extend(traj.frames().iter().cloned());
    }
    let c = ensemble_average(&tcfs).unwrap();
    let dynamic = peak_of(&damped_fourier(&c, 50.0, &omega, "exact").unwrap());
    let stat = peak_of(&static_spectrum(&frames, Basis::Full, 50.0, &omega).unwrap());
    let ratio = dynamic.fwhm_ev / stat.fwhm_ev;
    outcome(
        ratio < 0.5,
        format!(
            "dynamic FWHM {:.4} eV, static FWHM {:.4} eV, ratio {ratio:.3} (< 0.5), {members} trajectories",
            dynamic.fwhm_ev, stat.fwhm_ev
        ),
    )
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> PauliOperator {
    let mut op = PauliOperator::zero(n);
    for code in 1..(1usize << (2 * n)) {
        let letters: Vec<Pauli> = (0..n)
            .map(|q| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][(code >> (2 * q)) & 3])
            .collect();
        op.push(
            Complex64::new(rng.random_range(-1.0..1.0), 0.0),
            PauliString::from_letters(&letters).unwrap(),
        )
        .unwrap();
    }
    op
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = TimeDependentOperator::constant(&random_hamiltonian(&mut rng, 2));
    let s0 = random_state(&mut rng, 2);
    let grid = PropagationGrid::new(0.0, 20.0, 0.002, 0.5).unwrap();
    let exact = propagate_many(&h, &[s0.clone()], &grid, &ExactOptions::default())
        .unwrap()
        .remove(0);
    let a = build_ansatz(2, s0.clone()).unwrap();
    let states = evolve_variational(&h, &a, &grid, &VqaOptions::default())
        .unwrap()
        .states(&a)
        .unwrap();
    let worst_fid = states
        .iter()
        .zip(&exact)
        .map(|(v, e)| v.inner(e).unwrap().norm_sqr())
        .fold(1.0, f64::min);
    let mut gens = a.generators().to_vec();
    gens.insert(5, gens[4]);
    let dup = Ansatz::new(gens, s0).unwrap();
    let dup_states = evolve_variational(&h, &dup, &grid, &VqaOptions::default())
        .unwrap()
        .states(&dup)
        .unwrap();
    let gauge = states
        .iter()
        .zip(&dup_states)
        .map(|(x, y)| x.distance(y))
        .fold(0.0, f64::max);
    outcome(
        worst_fid > 1.0 - 1e-4 && gauge < 1e-6,
        format!("min fidelity 1 - {:.2e} (> 1 - 1e-4), duplicate-generator deviation {gauge:.1e} (< 1e-6)", 1.0 - worst_fid),
    )
}

fn read_dir_bytes(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_10() -> Outcome {
    // Norms of every recorded state: exact and variational, full space and Frenkel.
    let mut drift: f64 = 0.0;
    let traj = ou_cluster(4, 40.0, 10);
    for basis in [Basis::Full, Basis::Frenkel] {
        let (h, _) = series(&traj, basis);
        let n = h.n_qubits();
        let starts = vec![ground_state(n), StateVector::basis(n, 1), StateVector::basis(n, 2)];
        let grid = PropagationGrid::new(0.0, 40.0, 0.005, 0.5).unwrap();
        for rec in propagate_many(&h, &starts, &grid, &ExactOptions::default()).unwrap() {
            drift = rec.iter().map(|s| (s.norm() - 1.0).abs()).fold(drift, f64::max);
        }
        let a = build_ansatz(n, StateVector::basis(n, 1)).unwrap();
        let grid = PropagationGrid::new(0.0, 10.0, 0.005, 0.5).unwrap();
        for s in evolve_variational(&h, &a, &grid, &VqaOptions::default())
            .unwrap()
            .states(&a)
            .unwrap()
        {
            drift = drift.max((s.norm() - 1.0).abs());
        }
    }

    let root = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = root.path().join(run);
        let text = format!(
            r#"
basis = "full"
engine = "vqa"
output_dir = "{}"
[grid]
t_max_fs = 10.0
[ensemble]
n_trajectories = 2
seed = 7
[trajectory.ou]
n_chromophores = 2
"#,
            dir.display()
        );
        run_job(&JobConfig::from_toml_str(&text).unwrap()).unwrap();
        outputs.push(read_dir_bytes(&dir));
    }
    let mut a = outputs.remove(0);
    let mut b = outputs.remove(0);
    // The echoed config names its own output directory.
    a.remove("config.effective.toml");
    b.remove("config.effective.toml");
    let identical = a == b;
    outcome(
        drift < 1e-10 && identical,
        format!(
            "max norm drift {drift:.1e} (< 1e-10); {} data files byte-identical across runs: {identical}",
            a.len()
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "VQA vs exact, full space, 4 sites", criterion_1),
        (2, "VQA vs exact, Frenkel small-lambda, 15 sites", criterion_2),
        (3, "monomer Lorentzian lineshape", criterion_3),
        (4, "encoding equivalence", criterion_4),
        (5, "Hadamard-test consistency", criterion_5),
        (6, "small-lambda convergence", criterion_6),
        (7, "tau-insensitivity of the dynamic route", criterion_7),
        (8, "motional narrowing", criterion_8),
        (9, "complete-ansatz exactness and gauge robustness", criterion_9),
        (10, "unitarity and determinism", criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {tag}  {name}: {} [{:.1} s]",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        if !result.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
