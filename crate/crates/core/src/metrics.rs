//! Overlaps and spreads of evolved states.

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::state::{Basis, QuantumState};

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `F_d(t) = |⟨Ψ_d|Ψ(t)⟩|²` for every sample time and site.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSeries {
    pub times: Vec<f64>,
    pub sites: Vec<usize>,
    /// `values[t][d]`.
    pub values: Vec<Vec<f64>>,
}

impl OverlapSeries {
    /// `F_d` over time for one site.
    pub fn site(&self, d: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[d]).collect()
    }
}

pub fn overlap_series(traj: &Trajectory) -> Result<OverlapSeries> {
    let Basis::OneMagnon { n_sites } = traj.basis() else {
        return Err(Error::BasisMismatch(
            "overlap series needs a one-magnon trajectory".into(),
        ));
    };
    let values = traj
        .states()
        .iter()
        .map(|s| s.amplitudes().iter().map(|a| a.norm_sqr()).collect())
        .collect();
    Ok(OverlapSeries {
        times: traj.times().to_vec(),
        sites: (0..n_sites).collect(),
        values,
    })
}

/// Shortest distance between two sites going around the ring.
pub fn ring_distance(a: usize, b: usize, n_sites: usize) -> usize {
    let d = a.abs_diff(b) % n_sites;
    d.min(n_sites - d)
}

/// Root-mean-square ring distance of the magnon from `origin`.
pub fn spatial_spread(state: &QuantumState, origin: usize) -> Result<f64> {
    let Basis::OneMagnon { n_sites } = state.basis() else {
        return Err(Error::BasisMismatch("spatial spread needs a one-magnon state".into()));
    };
    if origin >= n_sites {
        return Err(Error::SiteOutOfRange { site: origin, n_sites });
    }
    let second_moment: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(d, a)| a.norm_sqr() * (ring_distance(d, origin, n_sites) as f64).powi(2))
        .sum();
    Ok(second_moment.sqrt())
}
