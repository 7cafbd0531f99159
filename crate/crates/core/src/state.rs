//! State vectors in the full `2^N` space and in the one-magnon sector.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::check_full_size;
use crate::C64;

const NORM_TOL: f64 = 1e-10;
/// In-sector weight below which projection refuses to renormalize.
pub const EMPTY_SECTOR_WEIGHT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// Computational basis of all `2^N` spin configurations.
    Full { n_sites: usize },
    /// `{|Ψ_d⟩}`: exactly one spin up, at site `d`.
    OneMagnon { n_sites: usize },
}

impl Basis {
    pub fn n_sites(&self) -> usize {
        match *self {
            Basis::Full { n_sites } | Basis::OneMagnon { n_sites } => n_sites,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Basis::Full { n_sites } => 1usize << n_sites,
            Basis::OneMagnon { n_sites } => n_sites,
        }
    }

    pub fn is_one_magnon(&self) -> bool {
        matches!(self, Basis::OneMagnon { .. })
    }

    /// Eigenvalue of `Σσᶻ` for the `index`-th basis vector.
    pub fn magnetization(&self, index: usize) -> i32 {
        match *self {
            Basis::Full { n_sites } => magnetization_of(index, n_sites),
            Basis::OneMagnon { n_sites } => 2 - n_sites as i32,
        }
    }
}

/// `Σσᶻ` of a computational-basis configuration.
pub fn magnetization_of(index: usize, n_sites: usize) -> i32 {
    2 * index.count_ones() as i32 - n_sites as i32
}

/// Basis indices with exactly `n_up` spins up, in increasing order.
pub fn sector_states(n_sites: usize, n_up: usize) -> Vec<usize> {
    (0..1usize << n_sites)
        .filter(|s| s.count_ones() as usize == n_up)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    basis: Basis,
    amplitudes: DVector<C64>,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(basis: Basis, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::unchecked(basis, DVector::from_vec(amplitudes))?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(basis: Basis, amplitudes: Vec<C64>) -> Result<Self> {
        let mut state = Self::unchecked(basis, DVector::from_vec(amplitudes))?;
        let norm = state.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        state.amplitudes.unscale_mut(norm);
        Ok(state)
    }

    pub(crate) fn unchecked(basis: Basis, amplitudes: DVector<C64>) -> Result<Self> {
        if let Basis::Full { n_sites } = basis {
            check_full_size(n_sites)?;
        }
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Full-space product state with spins up exactly on `flipped`.
    pub fn product(n_sites: usize, flipped: &[usize]) -> Result<Self> {
        check_full_size(n_sites)?;
        let mut index = 0usize;
        for &site in flipped {
            if site >= n_sites {
                return Err(Error::SiteOutOfRange { site, n_sites });
            }
            index |= 1 << site;
        }
        let basis = Basis::Full { n_sites };
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// `|↓…↓⟩`.
    pub fn vacuum(n_sites: usize) -> Result<Self> {
        Self::product(n_sites, &[])
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(format!("{:?} vs {:?}", self.basis, other.basis)));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// `|Ψ_d⟩` in the one-magnon basis.
pub fn magnon_state(n_sites: usize, d: usize) -> Result<QuantumState> {
    if d >= n_sites {
        return Err(Error::SiteOutOfRange { site: d, n_sites });
    }
    let basis = Basis::OneMagnon { n_sites };
    let mut amplitudes = DVector::zeros(n_sites);
    amplitudes[d] = C64::new(1.0, 0.0);
    Ok(QuantumState { basis, amplitudes })
}

pub fn embed_one_magnon(state: &QuantumState) -> Result<QuantumState> {
    let Basis::OneMagnon { n_sites } = state.basis else {
        return Err(Error::BasisMismatch("expected a one-magnon state".into()));
    };
    check_full_size(n_sites)?;
    let basis = Basis::Full { n_sites };
    let mut amplitudes = DVector::zeros(basis.dim());
    for (d, a) in state.amplitudes.iter().enumerate() {
        amplitudes[1 << d] = *a;
    }
    Ok(QuantumState { basis, amplitudes })
}

/// Renormalized one-magnon component of a full-space state, together with the
/// probability weight lying outside the sector.
pub fn project_one_magnon(state: &QuantumState) -> Result<(QuantumState, f64)> {
    let Basis::Full { n_sites } = state.basis else {
        return Err(Error::BasisMismatch("expected a full-space state".into()));
    };
    let total = state.amplitudes.norm_squared();
    let mut amplitudes = DVector::from_fn(n_sites, |d, _| state.amplitudes[1 << d]);
    let inside = amplitudes.norm_squared();
    if inside < EMPTY_SECTOR_WEIGHT {
        return Err(Error::EmptySector { weight: inside });
    }
    amplitudes.unscale_mut(inside.sqrt());
    let leaked = (total - inside).max(0.0);
    Ok((
        QuantumState {
            basis: Basis::OneMagnon { n_sites },
            amplitudes,
        },
        leaked,
    ))
}

/// Probability weight of each `Σσᶻ` eigenvalue.
pub fn magnetization_decompose(state: &QuantumState) -> BTreeMap<i32, f64> {
    let mut weights = BTreeMap::new();
    for (i, a) in state.amplitudes.iter().enumerate() {
        let w = a.norm_sqr();
        if w > 0.0 {
            *weights.entry(state.basis.magnetization(i)).or_insert(0.0) += w;
        }
    }
    weights
}
