//! Experiment configuration file and default resolution.
//!
//! The file is TOML. Every field is optional; missing fields take the defaults
//! of the selected experiment and are listed in the output header. Unknown
//! keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::DEFAULT_STEPS_PER_PERIOD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Fig3,
    NoiseSweep,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Step,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Full,
    OneMagnon,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSection {
    pub n_sites: Option<usize>,
    pub coupling: Option<f64>,
    pub field: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: Option<ScheduleKind>,
    pub theta0: Option<f64>,
    pub period: Option<f64>,
    pub harmonics: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_max: Option<f64>,
    pub n_time_samples: Option<usize>,
    /// Number of periods sampled by `fig3`.
    pub periods: Option<u32>,
    /// Stepped-integrator resolution, `T/dt`.
    pub steps_per_period: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    pub sigma_chi: Option<f64>,
    pub sigma_eta: Option<f64>,
    pub sigma_eta_grid: Option<Vec<f64>>,
    pub n_realizations: Option<u64>,
    pub magnons: Option<usize>,
    pub gamma_indices: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub basis: Option<BasisKind>,
    /// Sites carrying an up spin.
    pub flipped: Option<Vec<usize>>,
    /// Explicit `[re, im]` amplitudes; normalized on load.
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub ring: RingSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub disorder: DisorderSection,
    #[serde(default)]
    pub initial: InitialSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedRing {
    pub n_sites: usize,
    pub coupling: f64,
    pub field: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedSchedule {
    pub kind: ScheduleKind,
    pub theta0: f64,
    pub period: f64,
    pub harmonics: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedGrid {
    pub t_max: f64,
    pub n_time_samples: usize,
    pub periods: u32,
    pub steps_per_period: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedDisorder {
    pub sigma_chi: f64,
    pub sigma_eta: f64,
    pub sigma_eta_grid: Vec<f64>,
    pub n_realizations: u64,
    pub magnons: usize,
    /// Empty means every eigenstate of the sector.
    pub gamma_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedInitial {
    pub basis: BasisKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flipped: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

/// Fully specified experiment, as recorded in output headers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    pub output: PathBuf,
    pub ring: ResolvedRing,
    pub schedule: ResolvedSchedule,
    pub grid: ResolvedGrid,
    pub disorder: ResolvedDisorder,
    pub initial: ResolvedInitial,
    /// Keys filled from defaults rather than the file or the command line.
    #[serde(skip)]
    pub defaulted: Vec<&'static str>,
}

impl ResolvedConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub master_seed: Option<u64>,
    pub n_sites: Option<usize>,
    pub coupling: Option<f64>,
    pub field: Option<f64>,
    pub period: Option<f64>,
    pub theta0: Option<f64>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if o.output.is_some() {
            self.output.clone_from(&o.output);
        }
        self.master_seed = o.master_seed.or(self.master_seed);
        self.ring.n_sites = o.n_sites.or(self.ring.n_sites);
        self.ring.coupling = o.coupling.or(self.ring.coupling);
        self.ring.field = o.field.or(self.ring.field);
        self.schedule.period = o.period.or(self.schedule.period);
        self.schedule.theta0 = o.theta0.or(self.schedule.theta0);
    }

    /// Fills every missing field with the defaults of `kind`.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<ResolvedConfig> {
        if let Some(declared) = self.experiment {
            if declared != kind {
                return Err(Error::Config(format!(
                    "config declares experiment '{}' but '{}' was requested",
                    declared.name(),
                    kind.name()
                )));
            }
        }
        let mut defaults = DefaultLog::default();

        let n_default = match kind {
            ExperimentKind::Fig1 | ExperimentKind::Fig2 => 40,
            ExperimentKind::Fig3 => 20,
            ExperimentKind::NoiseSweep | ExperimentKind::Custom => 8,
        };
        let n_sites = defaults.pick(self.ring.n_sites, n_default, "ring.n_sites");
        let coupling: f64 = defaults.pick(self.ring.coupling, 1.0, "ring.coupling");
        let field = defaults.pick(self.ring.field, 100.0, "ring.field");

        let kind_default = match kind {
            ExperimentKind::Fig1 => ScheduleKind::Constant,
            ExperimentKind::Fig3 => ScheduleKind::Fourier,
            _ => ScheduleKind::Step,
        };
        let schedule_kind = match kind {
            ExperimentKind::Custom => defaults.pick(self.schedule.kind, kind_default, "schedule.kind"),
            _ => {
                if let Some(k) = self.schedule.kind {
                    if k != kind_default {
                        return Err(Error::Config(format!(
                            "schedule.kind {k:?} is fixed to {kind_default:?} for {}",
                            kind.name()
                        )));
                    }
                }
                kind_default
            }
        };
        let theta_default = if kind == ExperimentKind::Fig1 { 0.0 } else { PI / 2.0 };
        let theta0 = defaults.pick(self.schedule.theta0, theta_default, "schedule.theta0");
        if !(coupling.is_finite() && coupling != 0.0) {
            return Err(Error::Config(format!("ring.coupling must be nonzero, got {coupling}")));
        }
        let period = defaults.pick(self.schedule.period, PI / coupling.abs(), "schedule.period");
        let harmonics = defaults.pick(
            self.schedule.harmonics.clone(),
            if kind == ExperimentKind::Custom {
                vec![100]
            } else {
                vec![5, 13, 25, 50, 100]
            },
            "schedule.harmonics",
        );

        let periods = defaults.pick(self.grid.periods, 50, "grid.periods");
        let t_max_default = match kind {
            ExperimentKind::Fig1 => 10.0 / coupling.abs(),
            ExperimentKind::Fig2 => 50.0 * period,
            _ => 10.0 * period,
        };
        let t_max = defaults.pick(self.grid.t_max, t_max_default, "grid.t_max");
        let n_time_samples = defaults.pick(self.grid.n_time_samples, 400, "grid.n_time_samples");
        let steps_per_period = defaults.pick(
            self.grid.steps_per_period,
            DEFAULT_STEPS_PER_PERIOD,
            "grid.steps_per_period",
        );

        let disorder = ResolvedDisorder {
            sigma_chi: defaults.pick(self.disorder.sigma_chi, 0.0, "disorder.sigma_chi"),
            sigma_eta: defaults.pick(self.disorder.sigma_eta, 0.0, "disorder.sigma_eta"),
            sigma_eta_grid: defaults.pick(
                self.disorder.sigma_eta_grid.clone(),
                vec![0.0, 0.01, 0.02, 0.05, 0.1],
                "disorder.sigma_eta_grid",
            ),
            n_realizations: defaults.pick(self.disorder.n_realizations, 200, "disorder.n_realizations"),
            magnons: defaults.pick(self.disorder.magnons, 1, "disorder.magnons"),
            gamma_indices: defaults.pick(
                self.disorder.gamma_indices.clone(),
                Vec::new(),
                "disorder.gamma_indices",
            ),
        };

        let initial = ResolvedInitial {
            basis: defaults.pick(self.initial.basis, BasisKind::Full, "initial.basis"),
            flipped: match (&self.initial.flipped, &self.initial.amplitudes) {
                (None, None) => defaults.pick(None, Some(vec![0]), "initial.flipped"),
                (f, _) => f.clone(),
            },
            amplitudes: self.initial.amplitudes.clone(),
        };

        let master_seed = defaults.pick(self.master_seed, 0, "master_seed");
        let output = defaults.pick(
            self.output.clone(),
            PathBuf::from(format!("{}.csv", kind.name())),
            "output",
        );

        let resolved = ResolvedConfig {
            experiment: kind,
            master_seed,
            output,
            ring: ResolvedRing {
                n_sites,
                coupling,
                field,
            },
            schedule: ResolvedSchedule {
                kind: schedule_kind,
                theta0,
                period,
                harmonics,
            },
            grid: ResolvedGrid {
                t_max,
                n_time_samples,
                periods,
                steps_per_period,
            },
            disorder,
            initial,
            defaulted: defaults.keys,
        };
        resolved.check()?;
        Ok(resolved)
    }
}

#[derive(Default)]
struct DefaultLog {
    keys: Vec<&'static str>,
}

impl DefaultLog {
    fn pick<T>(&mut self, value: Option<T>, default: T, key: &'static str) -> T {
        value.unwrap_or_else(|| {
            self.keys.push(key);
            default
        })
    }
}

impl ResolvedConfig {
    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.grid.n_time_samples < 2 {
            return bad(format!(
                "grid.n_time_samples must be at least 2, got {}",
                self.grid.n_time_samples
            ));
        }
        if !(self.grid.t_max.is_finite() && self.grid.t_max > 0.0) {
            return bad(format!("grid.t_max must be positive, got {}", self.grid.t_max));
        }
        if !(self.schedule.period.is_finite() && self.schedule.period > 0.0) {
            return bad(format!(
                "schedule.period must be positive, got {}",
                self.schedule.period
            ));
        }
        if !self.schedule.theta0.is_finite() || !self.ring.field.is_finite() {
            return bad("schedule.theta0 and ring.field must be finite".into());
        }
        if self.schedule.harmonics.is_empty() || self.schedule.harmonics.contains(&0) {
            return bad("schedule.harmonics must be a nonempty list of positive counts".into());
        }
        if (self.grid.steps_per_period as f64) < crate::evolution::MIN_STEPS_PER_PERIOD {
            return bad(format!(
                "grid.steps_per_period must be at least {}, got {}",
                crate::evolution::MIN_STEPS_PER_PERIOD,
                self.grid.steps_per_period
            ));
        }
        if self.disorder.n_realizations == 0 {
            return bad("disorder.n_realizations must be positive".into());
        }
        let sigmas = [self.disorder.sigma_chi, self.disorder.sigma_eta];
        if sigmas
            .iter()
            .chain(&self.disorder.sigma_eta_grid)
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return bad("disorder standard deviations must be nonnegative".into());
        }
        if self.initial.flipped.is_some() && self.initial.amplitudes.is_some() {
            return bad("initial.flipped and initial.amplitudes are mutually exclusive".into());
        }
        Ok(())
    }
}
