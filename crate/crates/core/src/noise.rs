//! Static disorder sampling and Monte-Carlo estimates over disorder
//! realizations.
//!
//! Each realization draws from its own ChaCha20 stream selected by
//! `(master_seed, realization_index)`, so realizations can be computed in any
//! order or in parallel. Per-realization results are collected in index order
//! and reduced sequentially with compensated sums; the output does not depend
//! on the worker count.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Evolver, Spectrum};
use crate::metrics::fidelity;
use crate::ring::{build_sector_block, check_full_size, HermitianMatrix, RingSpec, TermWeights};
use crate::schedule::PhaseSchedule;
use crate::state::{magnon_state, Basis, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    /// Standard deviation of the bond disorder χᵢ.
    pub sigma_chi: f64,
    /// Standard deviation of the field disorder ηᵢ.
    pub sigma_eta: f64,
    pub master_seed: u64,
}

impl DisorderModel {
    pub fn new(sigma_chi: f64, sigma_eta: f64, master_seed: u64) -> Result<Self> {
        for (name, s) in [("sigma_chi", sigma_chi), ("sigma_eta", sigma_eta)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be a nonnegative number, got {s}"
                )));
            }
        }
        Ok(Self {
            sigma_chi,
            sigma_eta,
            master_seed,
        })
    }
}

/// Gaussian `(χ, η)` for one realization. The stream yields the `N` bond
/// draws first, then the `N` field draws.
pub fn sample_disorder(model: &DisorderModel, n_sites: usize, realization: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(model.master_seed);
    rng.set_stream(realization);
    let mut draw = |sigma: f64| -> Vec<f64> {
        (0..n_sites)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sigma * z
            })
            .collect()
    };
    let chi = draw(model.sigma_chi);
    let eta = draw(model.sigma_eta);
    (chi, eta)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sample mean and standard error of the mean (two-pass, compensated).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values
        .iter()
        .map(|x| (x - mean).powi(2))
        .collect::<CompensatedSum>()
        .value();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub configuration: String,
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub n_realizations: u64,
    pub master_seed: u64,
}

/// Attenuation of one probe state over one period, with and without the step
/// modulation, averaged over disorder realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationEstimate {
    pub sigma_eta: f64,
    pub magnons: usize,
    pub gamma_index: usize,
    /// Mean `|⟨γ|γ(T)⟩|` under the step schedule.
    pub a_modulated: f64,
    /// Mean `|⟨γ|γ(T)⟩|` at constant phase.
    pub a_unmodulated: f64,
    pub std_error_mod: f64,
    pub std_error_unmod: f64,
    /// Mean eigenvalue standard deviation of the probe operator in the sector.
    pub sigma_1: f64,
    pub n_realizations: u64,
    pub master_seed: u64,
}

impl AttenuationEstimate {
    pub fn combined_std_error(&self) -> f64 {
        self.std_error_mod.hypot(self.std_error_unmod)
    }
}

struct RealizationOutcome {
    modulated: Vec<f64>,
    unmodulated: Vec<f64>,
    sigma_1: f64,
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    (values
        .iter()
        .map(|x| (x - mean).powi(2))
        .collect::<CompensatedSum>()
        .value()
        / n)
        .sqrt()
}

fn attenuation_realization(
    spec_base: &RingSpec,
    model: &DisorderModel,
    theta0: f64,
    period: f64,
    magnons: usize,
    gammas: &[usize],
    realization: u64,
) -> Result<RealizationOutcome> {
    let n = spec_base.n_sites();
    let (chi, eta) = sample_disorder(model, n, realization);
    let spec = spec_base.with_disorder(chi, eta)?;

    // probe states: eigenstates of −H_XY(θ₀) + Σηᵢσᵢᶻ inside the sector
    let block = build_sector_block(&spec, theta0, magnons, TermWeights::PROBE)?;
    let probe = Spectrum::of_matrix(&HermitianMatrix::new(block.matrix)?)?;
    let pairs = probe.eigenpairs();
    let values: Vec<f64> = pairs.iter().map(|(v, _)| *v).collect();
    let sigma_1 = population_std(&values);

    let evolver = Evolver::new(spec, Basis::Full { n_sites: n })?;
    let step = PhaseSchedule::step(theta0, period)?;
    let constant = PhaseSchedule::constant(theta0)?;
    let mut modulated = Vec::with_capacity(gammas.len());
    let mut unmodulated = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let local = &pairs[g].1;
        let mut full = DVector::zeros(1 << n);
        for (r, &s) in block.states.iter().enumerate() {
            full[s] = local[r];
        }
        let gamma = QuantumState::new(Basis::Full { n_sites: n }, full.iter().copied().collect())?;
        let after_mod = evolver.evolve_piecewise(&gamma, &step, &[period])?;
        let after_const = evolver.evolve_piecewise(&gamma, &constant, &[period])?;
        modulated.push(fidelity(&gamma, after_mod.last())?.sqrt());
        unmodulated.push(fidelity(&gamma, after_const.last())?.sqrt());
    }
    Ok(RealizationOutcome {
        modulated,
        unmodulated,
        sigma_1,
    })
}

/// Attenuation estimates for probe states in the `magnons`-magnon sector.
/// `gammas = None` takes every eigenstate of the sector. The disorder vectors
/// of `spec_base` are replaced by samples from `model`.
pub fn estimate_attenuation_sector(
    spec_base: &RingSpec,
    model: &DisorderModel,
    theta0: f64,
    period: f64,
    magnons: usize,
    gammas: Option<&[usize]>,
    n_realizations: u64,
) -> Result<Vec<AttenuationEstimate>> {
    let n = spec_base.n_sites();
    check_full_size(n)?;
    if magnons > n {
        return Err(Error::InvalidSpec(format!("{magnons} magnons on {n} sites")));
    }
    if n_realizations == 0 {
        return Err(Error::InvalidSpec("at least one realization is needed".into()));
    }
    let sector_dim = crate::state::sector_states(n, magnons).len();
    let gammas: Vec<usize> = match gammas {
        Some(g) => g.to_vec(),
        None => (0..sector_dim).collect(),
    };
    if let Some(&bad) = gammas.iter().find(|&&g| g >= sector_dim) {
        return Err(Error::InvalidEigenIndex {
            index: bad,
            count: sector_dim,
        });
    }
    PhaseSchedule::step(theta0, period)?;

    let outcomes = (0..n_realizations)
        .into_par_iter()
        .map(|r| attenuation_realization(spec_base, model, theta0, period, magnons, &gammas, r))
        .collect::<Result<Vec<_>>>()?;

    let sigma_1 = outcomes.iter().map(|o| o.sigma_1).collect::<CompensatedSum>().value() / outcomes.len() as f64;
    Ok(gammas
        .iter()
        .enumerate()
        .map(|(slot, &g)| {
            let m: Vec<f64> = outcomes.iter().map(|o| o.modulated[slot]).collect();
            let u: Vec<f64> = outcomes.iter().map(|o| o.unmodulated[slot]).collect();
            let (a_mod, se_mod) = mean_and_std_error(&m);
            let (a_un, se_un) = mean_and_std_error(&u);
            AttenuationEstimate {
                sigma_eta: model.sigma_eta,
                magnons,
                gamma_index: g,
                a_modulated: a_mod,
                a_unmodulated: a_un,
                std_error_mod: se_mod,
                std_error_unmod: se_un,
                sigma_1,
                n_realizations,
                master_seed: model.master_seed,
            }
        })
        .collect())
}

/// Attenuation estimate for the `gamma_index`-th one-magnon probe state.
pub fn estimate_attenuation(
    spec_base: &RingSpec,
    model: &DisorderModel,
    theta0: f64,
    period: f64,
    gamma_index: usize,
    n_realizations: u64,
) -> Result<AttenuationEstimate> {
    let mut v = estimate_attenuation_sector(
        spec_base,
        model,
        theta0,
        period,
        1,
        Some(&[gamma_index]),
        n_realizations,
    )?;
    Ok(v.remove(0))
}

/// Mean one-magnon fidelity `|⟨Ψ₀|Ψ₀(mT)⟩|²` after `periods` periods of
/// `schedule`, over disorder realizations.
pub fn revival_fidelity(
    spec_base: &RingSpec,
    model: &DisorderModel,
    schedule: &PhaseSchedule,
    periods: u32,
    n_realizations: u64,
) -> Result<SweepResult> {
    let period = schedule
        .period()
        .ok_or_else(|| Error::InvalidSchedule("revival needs a periodic schedule".into()))?;
    let n = spec_base.n_sites();
    let t_end = periods as f64 * period;
    let start = magnon_state(n, 0)?;
    let values = (0..n_realizations)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let (chi, eta) = sample_disorder(model, n, r);
            let spec = spec_base.with_disorder(chi, eta)?;
            let traj = Evolver::new(spec, start.basis())?.evolve_piecewise(&start, schedule, &[t_end])?;
            fidelity(&start, traj.last())
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, se) = mean_and_std_error(&values);
    Ok(SweepResult {
        configuration: format!(
            "revival n_sites={n} sigma_chi={} sigma_eta={} periods={periods}",
            model.sigma_chi, model.sigma_eta
        ),
        mean_fidelity: mean,
        std_error: se,
        n_realizations,
        master_seed: model.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_gives_zero_vectors() {
        let m = DisorderModel::new(0.0, 0.0, 42).unwrap();
        let (chi, eta) = sample_disorder(&m, 6, 3);
        assert!(chi.iter().chain(&eta).all(|&x| x == 0.0));
    }

    #[test]
    fn sampling_is_deterministic_and_stream_separated() {
        let m = DisorderModel::new(0.1, 0.2, 7).unwrap();
        assert_eq!(sample_disorder(&m, 8, 11), sample_disorder(&m, 8, 11));
        assert_ne!(sample_disorder(&m, 8, 11), sample_disorder(&m, 8, 12));
        let other_seed = DisorderModel { master_seed: 8, ..m };
        assert_ne!(sample_disorder(&m, 8, 11), sample_disorder(&other_seed, 8, 11));
    }

    #[test]
    fn sample_mean_is_near_zero() {
        let sigma = 0.3;
        let m = DisorderModel::new(sigma, sigma, 2024).unwrap();
        let draws: Vec<f64> = (0..10_000u64)
            .flat_map(|r| {
                let (chi, eta) = sample_disorder(&m, 5, r);
                chi.into_iter().chain(eta)
            })
            .collect();
        assert_eq!(draws.len(), 100_000);
        let (mean, _) = mean_and_std_error(&draws);
        assert!(mean.abs() < 5.0 * sigma / (1e5f64).sqrt(), "{mean}");
        let var = draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64;
        assert!((var.sqrt() - sigma).abs() < 0.01);
    }

    #[test]
    fn model_rejects_negative_sigma() {
        assert!(DisorderModel::new(-0.1, 0.0, 0).is_err());
        assert!(DisorderModel::new(0.0, f64::NAN, 0).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn standard_error_of_known_sample() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3, divided by n
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clean_ring_has_no_attenuation() {
        let spec = RingSpec::uniform(6, 1.0, 100.0).unwrap();
        let model = DisorderModel::new(0.0, 0.0, 1).unwrap();
        let est = estimate_attenuation_sector(
            &spec,
            &model,
            std::f64::consts::FRAC_PI_2,
            std::f64::consts::PI,
            1,
            None,
            3,
        )
        .unwrap();
        assert_eq!(est.len(), 6);
        for e in est {
            assert!((e.a_modulated - 1.0).abs() < 1e-9);
            assert!((e.a_unmodulated - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_gamma_rejected() {
        let spec = RingSpec::uniform(4, 1.0, 1.0).unwrap();
        let model = DisorderModel::new(0.0, 0.1, 1).unwrap();
        assert!(matches!(
            estimate_attenuation(&spec, &model, 0.0, 1.0, 4, 2),
            Err(Error::InvalidEigenIndex { index: 4, count: 4 })
        ));
        assert!(matches!(
            estimate_attenuation(&RingSpec::uniform(15, 1.0, 1.0).unwrap(), &model, 0.0, 1.0, 0, 2),
            Err(Error::FullSpaceTooLarge { .. })
        ));
    }
}
