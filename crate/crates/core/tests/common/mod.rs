#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use ringmem::ring::{build_sector_block, TermWeights};
use ringmem::state::sector_states;
use ringmem::{
    magnetization_decompose, magnon_state, sample_disorder, Basis, DisorderModel, Evolver, HermitianMatrix,
    PhaseSchedule, QuantumState, RingSpec, Spectrum, Trajectory, C64,
};

/// Coupling, field and period of the revival runs: λ = 1, B = 100λ, λT = π.
pub const COUPLING: f64 = 1.0;
pub const FIELD: f64 = 100.0;
pub const PERIOD: f64 = PI;
pub const THETA0: f64 = PI / 2.0;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha20Rng, n: usize, sigma: f64) -> Vec<f64> {
    (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn random_amp(rng: &mut ChaCha20Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state(basis: Basis, rng: &mut ChaCha20Rng) -> QuantumState {
    let amps = (0..basis.dim()).map(|_| random_amp(rng)).collect();
    QuantumState::normalized(basis, amps).unwrap()
}

/// Random full-space state supported on the given magnetization sectors
/// (counted by the number of up spins).
pub fn random_sector_state(n_sites: usize, sectors: &[usize], rng: &mut ChaCha20Rng) -> QuantumState {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n_sites];
    for &k in sectors {
        let states = sector_states(n_sites, k);
        let mut part: Vec<C64> = states.iter().map(|_| random_amp(rng)).collect();
        let norm = part.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut part {
            *a /= norm * (sectors.len() as f64).sqrt();
        }
        for (s, a) in states.iter().zip(part) {
            amps[*s] = a;
        }
    }
    QuantumState::normalized(Basis::Full { n_sites }, amps).unwrap()
}

/// Largest deviation of the norm from 1 and of any magnetization-sector
/// weight from its initial value, over the whole trajectory.
pub fn conservation_error(traj: &Trajectory) -> (f64, f64) {
    let initial = magnetization_decompose(&traj.states()[0]);
    let mut norm_err = 0.0f64;
    let mut sector_err = 0.0f64;
    for s in traj.states() {
        norm_err = norm_err.max((s.norm() - 1.0).abs());
        let w = magnetization_decompose(s);
        for (m, w0) in &initial {
            sector_err = sector_err.max((w.get(m).copied().unwrap_or(0.0) - w0).abs());
        }
        for (m, w1) in &w {
            if !initial.contains_key(m) {
                sector_err = sector_err.max(*w1);
            }
        }
    }
    (norm_err, sector_err)
}

pub fn fid(a: &QuantumState, b: &QuantumState) -> f64 {
    ringmem::fidelity(a, b).unwrap()
}

/// One-magnon run of a magnon started at site 0 on a uniform N = 40 ring.
pub fn magnon_run(schedule: &PhaseSchedule, times: &[f64]) -> (QuantumState, Trajectory) {
    let spec = RingSpec::uniform(40, COUPLING, FIELD).unwrap();
    let start = magnon_state(40, 0).unwrap();
    let traj = ringmem::evolve_piecewise(&start, &spec, schedule, times).unwrap();
    (start, traj)
}

pub fn revival_times(periods: u32) -> Vec<f64> {
    (1..=periods).map(|m| m as f64 * PERIOD).collect()
}

pub fn revival_run() -> (QuantumState, Trajectory) {
    magnon_run(&PhaseSchedule::step(THETA0, PERIOD).unwrap(), &revival_times(50))
}

pub fn diffusion_run() -> (QuantumState, Trajectory) {
    let times = ringmem::experiment::time_grid(10.0 / COUPLING, 400, None);
    magnon_run(&PhaseSchedule::constant(THETA0).unwrap(), &times)
}

/// N = 10 full-space rings with bond disorder σ_χ = 0.1λ and no field
/// disorder, 20 random initial states, sampled at T and 5T.
pub fn reconstruction_runs(field: f64) -> Vec<(QuantumState, Trajectory)> {
    let mut rng = rng(4);
    let schedule = PhaseSchedule::step(THETA0, PERIOD).unwrap();
    (0..20)
        .map(|_| {
            let chi = gaussian_vec(&mut rng, 10, 0.1 * COUPLING);
            let spec = RingSpec::new(10, COUPLING, field, chi, vec![0.0; 10]).unwrap();
            let start = random_state(Basis::Full { n_sites: 10 }, &mut rng);
            let traj = ringmem::evolve_piecewise(&start, &spec, &schedule, &[PERIOD, 5.0 * PERIOD]).unwrap();
            (start, traj)
        })
        .collect()
}

/// Field for which `B·T = π`.
pub const ODD_FIELD: f64 = 1.0;

/// Single-sector states on the disordered N = 10 ring at `B·T = π`.
pub fn single_sector_runs() -> Vec<(QuantumState, Trajectory)> {
    let mut rng = rng(5);
    let schedule = PhaseSchedule::step(THETA0, PERIOD).unwrap();
    (0..20)
        .map(|i| {
            let chi = gaussian_vec(&mut rng, 10, 0.1 * COUPLING);
            let spec = RingSpec::new(10, COUPLING, ODD_FIELD, chi, vec![0.0; 10]).unwrap();
            let start = random_sector_state(10, &[1 + i % 5], &mut rng);
            let traj = ringmem::evolve_piecewise(&start, &spec, &schedule, &[PERIOD, 5.0 * PERIOD]).unwrap();
            (start, traj)
        })
        .collect()
}

/// Equal-weight superposition of the one- and two-magnon sectors at the
/// given field, evolved for one period.
pub fn two_sector_run(field: f64) -> (QuantumState, Trajectory) {
    let mut rng = rng(55);
    let chi = gaussian_vec(&mut rng, 10, 0.1 * COUPLING);
    let spec = RingSpec::new(10, COUPLING, field, chi, vec![0.0; 10]).unwrap();
    let start = random_sector_state(10, &[1, 2], &mut rng);
    let schedule = PhaseSchedule::step(THETA0, PERIOD).unwrap();
    let traj = ringmem::evolve_piecewise(&start, &spec, &schedule, &[PERIOD]).unwrap();
    (start, traj)
}

pub const HARMONICS: [u32; 5] = [5, 13, 25, 50, 100];

/// Truncated-Fourier runs on a uniform N = 20 ring, one magnon at site 0,
/// midpoint steps of T/2048, sampled at mT for m = 0..=50.
pub fn fourier_runs() -> Vec<(u32, QuantumState, Trajectory)> {
    use rayon::prelude::*;
    let spec = RingSpec::uniform(20, COUPLING, FIELD).unwrap();
    let start = magnon_state(20, 0).unwrap();
    let times: Vec<f64> = (0..=50).map(|m| m as f64 * PERIOD).collect();
    HARMONICS
        .par_iter()
        .map(|&m| {
            let schedule = PhaseSchedule::fourier(THETA0, PERIOD, m).unwrap();
            let traj = ringmem::evolve_stepped(&start, &spec, &schedule, PERIOD / 2048.0, &times).unwrap();
            (m, start.clone(), traj)
        })
        .collect()
}

pub const SIGMA_GRID: [f64; 5] = [0.0, 0.01, 0.02, 0.05, 0.1];
pub const REALIZATIONS: u64 = 200;

/// Per-realization trajectories behind the attenuation estimates: every
/// one-magnon probe state evolved for one period under the step and the
/// constant schedule.
pub fn attenuation_trajectories(sigma_eta: f64, n_realizations: u64) -> Vec<Trajectory> {
    let model = DisorderModel::new(0.0, sigma_eta, 0).unwrap();
    let base = RingSpec::uniform(8, COUPLING, FIELD).unwrap();
    let mut out = Vec::new();
    for r in 0..n_realizations {
        let (chi, eta) = sample_disorder(&model, 8, r);
        let spec = base.with_disorder(chi, eta).unwrap();
        let block = build_sector_block(&spec, THETA0, 1, TermWeights::PROBE).unwrap();
        let probe = Spectrum::of_matrix(&HermitianMatrix::new(block.matrix.clone()).unwrap()).unwrap();
        let evolver = Evolver::new(spec, Basis::Full { n_sites: 8 }).unwrap();
        for (_, v) in probe.eigenpairs() {
            let mut amps = vec![C64::new(0.0, 0.0); 256];
            for (row, &s) in block.states.iter().enumerate() {
                amps[s] = v[row];
            }
            let gamma = QuantumState::new(Basis::Full { n_sites: 8 }, amps).unwrap();
            for schedule in [
                PhaseSchedule::step(THETA0, PERIOD).unwrap(),
                PhaseSchedule::constant(THETA0).unwrap(),
            ] {
                out.push(evolver.evolve_piecewise(&gamma, &schedule, &[PERIOD]).unwrap());
            }
        }
    }
    out
}

/// Disordered N = 8 ring used by the engine comparisons.
pub fn oracle_spec(seed: u64) -> RingSpec {
    let mut rng = rng(seed);
    let chi = gaussian_vec(&mut rng, 8, 0.1 * COUPLING);
    let eta = gaussian_vec(&mut rng, 8, 0.1 * COUPLING);
    RingSpec::new(8, COUPLING, FIELD, chi, eta).unwrap()
}

/// The same one-magnon initial state evolved in the one-magnon basis and in
/// the full space under the step schedule.
pub fn one_magnon_vs_full() -> (Trajectory, Trajectory) {
    let spec = oracle_spec(8);
    let mut rng = rng(80);
    let small = random_state(Basis::OneMagnon { n_sites: 8 }, &mut rng);
    let full = ringmem::embed_one_magnon(&small).unwrap();
    let schedule = PhaseSchedule::step(THETA0, PERIOD).unwrap();
    let times = ringmem::experiment::time_grid(10.0 * PERIOD, 101, Some(PERIOD));
    (
        ringmem::evolve_piecewise(&small, &spec, &schedule, &times).unwrap(),
        ringmem::evolve_piecewise(&full, &spec, &schedule, &times).unwrap(),
    )
}

/// Stepped and exact evolution of a random full-space state to 10T under the
/// step schedule.
pub fn stepped_vs_exact() -> (Trajectory, Trajectory) {
    let spec = oracle_spec(9);
    let start = random_state(Basis::Full { n_sites: 8 }, &mut rng(90));
    let schedule = PhaseSchedule::step(THETA0, PERIOD).unwrap();
    let t = [10.0 * PERIOD];
    (
        ringmem::evolve_stepped(&start, &spec, &schedule, PERIOD / 2048.0, &t).unwrap(),
        ringmem::evolve_piecewise(&start, &spec, &schedule, &t).unwrap(),
    )
}

/// Midpoint runs of a smooth schedule at dt = T/64, T/128 and a reference at
/// T/1024, sampled at 3T/4.
pub fn convergence_runs() -> [Trajectory; 3] {
    let spec = oracle_spec(10);
    let start = random_state(Basis::OneMagnon { n_sites: 8 }, &mut rng(100));
    let schedule = PhaseSchedule::fourier(THETA0, PERIOD, 5).unwrap();
    let t = [0.75 * PERIOD];
    [64.0, 128.0, 1024.0].map(|n| ringmem::evolve_stepped(&start, &spec, &schedule, PERIOD / n, &t).unwrap())
}
