//! Figure reproductions and custom runs driven by a resolved configuration.

pub mod config;
pub mod output;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{Evolver, Trajectory};
use crate::metrics::{fidelity, overlap_series};
use crate::noise::{estimate_attenuation_sector, sample_disorder, DisorderModel};
use crate::ring::RingSpec;
use crate::schedule::PhaseSchedule;
use crate::state::{Basis, QuantumState};
use crate::C64;

use config::{BasisKind, ExperimentKind, ResolvedConfig, ScheduleKind};
use output::{fmt_f64, sibling, write_atomic, CsvDocument, OutputFile};

/// `n` uniform samples on `[0, t_max]` merged with every multiple of
/// `period` in that range. Samples within `1e-12·t_max` of a period
/// instant are replaced by the instant.
pub fn time_grid(t_max: f64, n: usize, period: Option<f64>) -> Vec<f64> {
    let tol = 1e-12 * t_max.max(1.0);
    let mut times: Vec<f64> = match n {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    };
    if let Some(p) = period {
        let count = (t_max / p + 1e-9).floor() as u64;
        times.extend((0..=count).map(|m| m as f64 * p).filter(|&t| t <= t_max + tol));
    }
    times.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(times.len());
    for t in times {
        match out.last_mut() {
            Some(prev) if (t - *prev).abs() <= tol => {
                // keep the exact period instant
                if let Some(p) = period {
                    let m = (t / p).round();
                    if (t - m * p).abs() <= tol {
                        *prev = m * p;
                    }
                }
            }
            _ => out.push(t),
        }
    }
    out
}

/// Ring of the configuration, with one disorder realization drawn when
/// either disorder strength is nonzero.
fn ring_of(config: &ResolvedConfig) -> Result<RingSpec> {
    let r = &config.ring;
    let spec = RingSpec::uniform(r.n_sites, r.coupling, r.field)?;
    let d = &config.disorder;
    if d.sigma_chi == 0.0 && d.sigma_eta == 0.0 {
        return Ok(spec);
    }
    let model = DisorderModel::new(d.sigma_chi, d.sigma_eta, config.master_seed)?;
    let (chi, eta) = sample_disorder(&model, r.n_sites, 0);
    spec.with_disorder(chi, eta)
}

fn schedule_of(config: &ResolvedConfig, harmonics: Option<u32>) -> Result<PhaseSchedule> {
    let s = &config.schedule;
    match s.kind {
        ScheduleKind::Constant => PhaseSchedule::constant(s.theta0),
        ScheduleKind::Step => PhaseSchedule::step(s.theta0, s.period),
        ScheduleKind::Fourier => {
            let m = harmonics
                .or_else(|| s.harmonics.first().copied())
                .ok_or_else(|| Error::Config("fourier schedule needs schedule.harmonics".into()))?;
            PhaseSchedule::fourier(s.theta0, s.period, m)
        }
    }
}

fn evolve(
    config: &ResolvedConfig,
    evolver: &Evolver,
    initial: &QuantumState,
    schedule: &PhaseSchedule,
    times: &[f64],
) -> Result<Trajectory> {
    if schedule.is_commuting() {
        evolver.evolve_piecewise(initial, schedule, times)
    } else {
        let dt = config.schedule.period / config.grid.steps_per_period as f64;
        evolver.evolve_stepped(initial, schedule, dt, times)
    }
}

/// One-magnon overlaps `F_d(t)` of a magnon started at site 0.
fn run_overlaps(config: &ResolvedConfig) -> Result<Vec<OutputFile>> {
    let spec = ring_of(config)?;
    let schedule = schedule_of(config, None)?;
    let n = spec.n_sites();
    let initial = crate::state::magnon_state(n, 0)?;
    let evolver = Evolver::new(spec, initial.basis())?;
    let times = time_grid(config.grid.t_max, config.grid.n_time_samples, schedule.period());
    let traj = evolve(config, &evolver, &initial, &schedule, &times)?;
    let series = overlap_series(&traj)?;

    let mut doc = CsvDocument::new(config, vec!["t", "d", "overlap"]);
    for (t, row) in series.times.iter().zip(&series.values) {
        for (d, v) in row.iter().enumerate() {
            doc.push(&[fmt_f64(*t), d.to_string(), fmt_f64(*v)]);
        }
    }
    Ok(vec![OutputFile {
        path: config.output.clone(),
        document: doc,
    }])
}

/// Revival fidelity `|⟨Ψ₀|Ψ₀(mT)⟩|²` under truncated Fourier schedules.
fn run_fig3(config: &ResolvedConfig) -> Result<Vec<OutputFile>> {
    let spec = ring_of(config)?;
    let n = spec.n_sites();
    let initial = crate::state::magnon_state(n, 0)?;
    let period = config.schedule.period;
    let times: Vec<f64> = (0..=config.grid.periods).map(|m| m as f64 * period).collect();
    let dt = period / config.grid.steps_per_period as f64;

    let rows = config
        .schedule
        .harmonics
        .par_iter()
        .map(|&m| -> Result<Vec<[String; 3]>> {
            let schedule = PhaseSchedule::fourier(config.schedule.theta0, period, m)?;
            let evolver = Evolver::new(spec.clone(), initial.basis())?;
            let traj = evolver.evolve_stepped(&initial, &schedule, dt, &times)?;
            traj.states()
                .iter()
                .enumerate()
                .map(|(k, s)| Ok([m.to_string(), k.to_string(), fmt_f64(fidelity(&initial, s)?)]))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut doc = CsvDocument::new(config, vec!["harmonics", "period_index", "fidelity"]);
    for row in rows.into_iter().flatten() {
        doc.push(&row);
    }
    Ok(vec![OutputFile {
        path: config.output.clone(),
        document: doc,
    }])
}

/// Attenuation of sector probe states over a grid of field-disorder strengths.
fn run_noise_sweep(config: &ResolvedConfig) -> Result<Vec<OutputFile>> {
    let r = &config.ring;
    let d = &config.disorder;
    let base = RingSpec::uniform(r.n_sites, r.coupling, r.field)?;
    let gammas = (!d.gamma_indices.is_empty()).then_some(d.gamma_indices.as_slice());

    let mut doc = CsvDocument::new(
        config,
        vec![
            "sigma_eta",
            "gamma_index",
            "a_modulated",
            "a_unmodulated",
            "std_error_mod",
            "std_error_unmod",
            "sigma_1",
            "n_realizations",
            "master_seed",
        ],
    );
    for &sigma in &d.sigma_eta_grid {
        let model = DisorderModel::new(d.sigma_chi, sigma, config.master_seed)?;
        let estimates = estimate_attenuation_sector(
            &base,
            &model,
            config.schedule.theta0,
            config.schedule.period,
            d.magnons,
            gammas,
            d.n_realizations,
        )?;
        for e in estimates {
            doc.push(&[
                fmt_f64(e.sigma_eta),
                e.gamma_index.to_string(),
                fmt_f64(e.a_modulated),
                fmt_f64(e.a_unmodulated),
                fmt_f64(e.std_error_mod),
                fmt_f64(e.std_error_unmod),
                fmt_f64(e.sigma_1),
                e.n_realizations.to_string(),
                e.master_seed.to_string(),
            ]);
        }
    }
    Ok(vec![OutputFile {
        path: config.output.clone(),
        document: doc,
    }])
}

fn initial_of(config: &ResolvedConfig) -> Result<QuantumState> {
    let n = config.ring.n_sites;
    let init = &config.initial;
    if let Some(amps) = &init.amplitudes {
        let basis = match init.basis {
            BasisKind::Full => Basis::Full { n_sites: n },
            BasisKind::OneMagnon => Basis::OneMagnon { n_sites: n },
        };
        let amps = amps.iter().map(|&[re, im]| C64::new(re, im)).collect();
        return QuantumState::normalized(basis, amps);
    }
    let flipped = init.flipped.as_deref().unwrap_or(&[]);
    match init.basis {
        BasisKind::Full => QuantumState::product(n, flipped),
        BasisKind::OneMagnon => match flipped {
            [d] => crate::state::magnon_state(n, *d),
            _ => Err(Error::Config(format!(
                "a one-magnon initial state flips exactly one site, got {}",
                flipped.len()
            ))),
        },
    }
}

/// Arbitrary initial state and schedule. Writes the return fidelity and norm,
/// and every amplitude to `<stem>.trajectory.csv`.
fn run_custom(config: &ResolvedConfig) -> Result<Vec<OutputFile>> {
    let spec = ring_of(config)?;
    let schedule = schedule_of(config, None)?;
    let initial = initial_of(config)?;
    let evolver = Evolver::new(spec, initial.basis())?;
    let times = time_grid(config.grid.t_max, config.grid.n_time_samples, schedule.period());
    let traj = evolve(config, &evolver, &initial, &schedule, &times)?;

    let mut summary = CsvDocument::new(config, vec!["t", "fidelity", "norm"]);
    let mut amplitudes = CsvDocument::new(config, vec!["t", "index", "re", "im"]);
    for (t, s) in traj.iter() {
        summary.push(&[fmt_f64(t), fmt_f64(fidelity(&initial, s)?), fmt_f64(s.norm())]);
        for (i, a) in s.amplitudes().iter().enumerate() {
            amplitudes.push(&[fmt_f64(t), i.to_string(), fmt_f64(a.re), fmt_f64(a.im)]);
        }
    }
    Ok(vec![
        OutputFile {
            path: config.output.clone(),
            document: summary,
        },
        OutputFile {
            path: sibling(&config.output, "trajectory"),
            document: amplitudes,
        },
    ])
}

/// Computes every output document of an experiment without touching disk.
pub fn run(config: &ResolvedConfig) -> Result<Vec<OutputFile>> {
    match config.experiment {
        ExperimentKind::Fig1 | ExperimentKind::Fig2 => run_overlaps(config),
        ExperimentKind::Fig3 => run_fig3(config),
        ExperimentKind::NoiseSweep => run_noise_sweep(config),
        ExperimentKind::Custom => run_custom(config),
    }
}

/// Runs an experiment and writes its files. Nothing is written unless every
/// document was computed.
pub fn execute(config: &ResolvedConfig) -> Result<Vec<std::path::PathBuf>> {
    let files = run(config)?;
    for f in &files {
        write_atomic(&f.path, &f.document.render())?;
    }
    Ok(files.into_iter().map(|f| f.path).collect())
}
