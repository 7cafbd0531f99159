//! Time laws for the hopping phase θ(t).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseSchedule {
    Constant {
        theta0: f64,
    },
    /// θ₀ on `[0, T/2)`, θ₀ + π on `[T/2, T)`, repeated with period `T`.
    Step {
        theta0: f64,
        period: f64,
    },
    /// The step law with its square wave replaced by the first `harmonics`
    /// odd Fourier terms.
    Fourier {
        theta0: f64,
        period: f64,
        harmonics: u32,
    },
}

impl PhaseSchedule {
    pub fn constant(theta0: f64) -> Result<Self> {
        let s = PhaseSchedule::Constant { theta0 };
        s.validate()?;
        Ok(s)
    }

    pub fn step(theta0: f64, period: f64) -> Result<Self> {
        let s = PhaseSchedule::Step { theta0, period };
        s.validate()?;
        Ok(s)
    }

    pub fn fourier(theta0: f64, period: f64, harmonics: u32) -> Result<Self> {
        let s = PhaseSchedule::Fourier {
            theta0,
            period,
            harmonics,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta0().is_finite() {
            return Err(Error::InvalidSchedule("theta0 must be finite".into()));
        }
        if let Some(period) = self.period() {
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::InvalidSchedule(format!("period must be positive, got {period}")));
            }
        }
        if let PhaseSchedule::Fourier { harmonics: 0, .. } = self {
            return Err(Error::InvalidSchedule(
                "fourier schedule needs at least one harmonic".into(),
            ));
        }
        Ok(())
    }

    pub fn theta0(&self) -> f64 {
        match *self {
            PhaseSchedule::Constant { theta0 }
            | PhaseSchedule::Step { theta0, .. }
            | PhaseSchedule::Fourier { theta0, .. } => theta0,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match *self {
            PhaseSchedule::Constant { .. } => None,
            PhaseSchedule::Step { period, .. } | PhaseSchedule::Fourier { period, .. } => Some(period),
        }
    }

    /// θ(t). Angles are not reduced mod 2π.
    pub fn phase_at(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.phase_unchecked(t))
    }

    pub(crate) fn phase_unchecked(&self, t: f64) -> f64 {
        match *self {
            PhaseSchedule::Constant { theta0 } => theta0,
            PhaseSchedule::Step { theta0, period } => {
                if t.rem_euclid(period) < period / 2.0 {
                    theta0
                } else {
                    theta0 + PI
                }
            }
            PhaseSchedule::Fourier {
                theta0,
                period,
                harmonics,
            } => {
                let x = 2.0 * PI * t.rem_euclid(period) / period;
                let series: f64 = (1..=harmonics)
                    .map(|j| {
                        let k = (2 * j - 1) as f64;
                        (k * x).sin() / k
                    })
                    .sum();
                theta0 + PI / 2.0 - 2.0 * series
            }
        }
    }

    /// Whether `[H(t), H(t')] = 0` for every pair of times, i.e. the phase
    /// only ever differs from θ₀ by multiples of π.
    pub fn is_commuting(&self) -> bool {
        !matches!(self, PhaseSchedule::Fourier { .. })
    }

    /// Discontinuities of θ in `(0, t_end)`.
    pub fn jump_times(&self, t_end: f64) -> Vec<f64> {
        match *self {
            PhaseSchedule::Step { period, .. } => {
                let half = period / 2.0;
                (1u64..).map(|k| k as f64 * half).take_while(|&t| t < t_end).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_values() {
        let t = 2.0;
        let s = PhaseSchedule::step(PI / 2.0, t).unwrap();
        assert_eq!(s.phase_at(0.0).unwrap(), PI / 2.0);
        assert_eq!(s.phase_at(0.6 * t).unwrap(), PI / 2.0 + PI);
        assert_eq!(s.phase_at(1.3 * t).unwrap(), PI / 2.0);
        // a jump instant takes the right-segment value
        assert_eq!(s.phase_at(t / 2.0).unwrap(), PI / 2.0 + PI);
        assert_eq!(s.phase_at(t).unwrap(), PI / 2.0);
    }

    #[test]
    fn negative_time_rejected() {
        let s = PhaseSchedule::constant(0.3).unwrap();
        assert_eq!(s.phase_at(17.0).unwrap(), 0.3);
        assert!(matches!(s.phase_at(-1e-9), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn fourier_quarter_period_converges() {
        let theta0 = 0.4;
        let s = PhaseSchedule::fourier(theta0, 3.0, 100).unwrap();
        let err = (s.phase_at(0.75).unwrap() - theta0).abs();
        assert!(err < 0.01, "{err}");
        // brute-force partial sum of the square wave (4/π)Σ sin((2j−1)x)/(2j−1) at x = π/2
        let partial: f64 = (1..=100)
            .map(|j| {
                let k = (2 * j - 1) as f64;
                4.0 / PI * (k * PI / 2.0).sin() / k
            })
            .sum();
        assert!((s.phase_at(0.75).unwrap() - (theta0 + PI / 2.0 - PI / 2.0 * partial)).abs() < 1e-12);
    }

    #[test]
    fn commuting_kinds() {
        assert!(PhaseSchedule::constant(0.0).unwrap().is_commuting());
        assert!(PhaseSchedule::step(0.0, 1.0).unwrap().is_commuting());
        assert!(!PhaseSchedule::fourier(0.0, 1.0, 5).unwrap().is_commuting());
    }

    #[test]
    fn jumps() {
        let s = PhaseSchedule::step(0.0, 2.0).unwrap();
        assert_eq!(s.jump_times(5.0), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(s.jump_times(1.0).is_empty());
        assert!(PhaseSchedule::constant(0.0).unwrap().jump_times(5.0).is_empty());
        assert!(PhaseSchedule::fourier(0.0, 2.0, 3).unwrap().jump_times(5.0).is_empty());
    }

    #[test]
    fn invalid_parameters() {
        assert!(PhaseSchedule::step(0.0, 0.0).is_err());
        assert!(PhaseSchedule::step(0.0, -1.0).is_err());
        assert!(PhaseSchedule::fourier(0.0, 1.0, 0).is_err());
        assert!(PhaseSchedule::constant(f64::NAN).is_err());
    }

    #[test]
    fn exact_periodicity_on_dyadic_grid() {
        let step = PhaseSchedule::step(0.2, 2.0).unwrap();
        let four = PhaseSchedule::fourier(0.2, 2.0, 7).unwrap();
        for k in 0..64 {
            let t = k as f64 / 8.0;
            assert_eq!(step.phase_at(t).unwrap(), step.phase_at(t + 2.0).unwrap());
            assert_eq!(four.phase_at(t).unwrap(), four.phase_at(t + 2.0).unwrap());
        }
    }

    #[test]
    fn fourier_mean_is_midpoint() {
        // midpoint rule on a periodic trigonometric polynomial is exact once
        // the grid resolves its highest frequency
        let theta0 = 1.1;
        for m in [1, 5, 13] {
            let s = PhaseSchedule::fourier(theta0, 1.7, m).unwrap();
            let n = 4096;
            let mean: f64 = (0..n)
                .map(|k| s.phase_at((k as f64 + 0.5) * 1.7 / n as f64).unwrap())
                .sum::<f64>()
                / n as f64;
            assert!((mean - (theta0 + PI / 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn pointwise_convergence_inside_segments() {
        let step = PhaseSchedule::step(0.0, 1.0).unwrap();
        for t in [0.1, 0.25, 0.4, 0.6, 0.77, 0.9] {
            let errs: Vec<f64> = [10, 100, 1000]
                .iter()
                .map(|&m| {
                    let f = PhaseSchedule::fourier(0.0, 1.0, m).unwrap();
                    (f.phase_at(t).unwrap() - step.phase_at(t).unwrap()).abs()
                })
                .collect();
            assert!(errs[2] < 5e-3, "t={t} {errs:?}");
            assert!(errs[2] < errs[0]);
        }
    }

    proptest! {
        #[test]
        fn periodic_within_rounding(t in 0.0f64..50.0, period in 0.1f64..10.0, m in 1u32..30) {
            let f = PhaseSchedule::fourier(0.3, period, m).unwrap();
            let a = f.phase_at(t).unwrap();
            let b = f.phase_at(t + period).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + m as f64));
        }

        #[test]
        fn step_takes_two_values(t in 0.0f64..100.0, theta0 in -5.0f64..5.0) {
            let s = PhaseSchedule::step(theta0, 1.3).unwrap();
            let v = s.phase_at(t).unwrap();
            prop_assert!(v == theta0 || v == theta0 + PI);
        }
    }
}
