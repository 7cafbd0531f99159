//! Ring description and Hamiltonian builders.
//!
//! The ring Hamiltonian at hopping phase θ is
//!
//! ```text
//! H(θ) = −Σᵢ (λ + χᵢ) (e^{iθ} σᵢ⁺σᵢ₊₁⁻ + h.c.) + Σᵢ (B + ηᵢ) σᵢᶻ
//! ```
//!
//! with site `N−1` bonded back to site `0`. `χᵢ` belongs to bond `(i, i+1)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::sector_states;
use crate::C64;

/// Largest ring for which dense full-space matrices are built.
pub const MAX_FULL_SITES: usize = 14;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    n_sites: usize,
    coupling: f64,
    field: f64,
    chi: Vec<f64>,
    eta: Vec<f64>,
}

impl RingSpec {
    pub fn new(n_sites: usize, coupling: f64, field: f64, chi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let spec = Self {
            n_sites,
            coupling,
            field,
            chi,
            eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Clean ring: no bond or field disorder.
    pub fn uniform(n_sites: usize, coupling: f64, field: f64) -> Result<Self> {
        Self::new(n_sites, coupling, field, vec![0.0; n_sites], vec![0.0; n_sites])
    }

    pub fn with_disorder(&self, chi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        Self::new(self.n_sites, self.coupling, self.field, chi, eta)
    }

    pub fn with_field(&self, field: f64) -> Result<Self> {
        Self::new(self.n_sites, self.coupling, field, self.chi.clone(), self.eta.clone())
    }

    pub fn validate(&self) -> Result<()> {
        validate_sites(self.n_sites)?;
        for (name, v) in [("chi", &self.chi), ("eta", &self.eta)] {
            if v.len() != self.n_sites {
                return Err(Error::InvalidSpec(format!(
                    "{name} has {} entries, expected {}",
                    v.len(),
                    self.n_sites
                )));
            }
        }
        let finite = self.coupling.is_finite()
            && self.field.is_finite()
            && self.chi.iter().chain(&self.eta).all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    fn bond(&self, i: usize) -> f64 {
        self.coupling + self.chi[i]
    }
}

pub(crate) fn validate_sites(n_sites: usize) -> Result<()> {
    if n_sites < 3 {
        return Err(Error::InvalidSpec(format!(
            "a closed ring needs at least 3 sites, got {n_sites}"
        )));
    }
    Ok(())
}

pub(crate) fn check_full_size(n_sites: usize) -> Result<()> {
    if n_sites > MAX_FULL_SITES {
        return Err(Error::FullSpaceTooLarge {
            n_sites,
            limit: MAX_FULL_SITES,
        });
    }
    Ok(())
}

/// Dense complex matrix equal to its own conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let m = Self(entries);
        let deviation = m.hermiticity_error();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Largest entrywise `|Hᵢⱼ − conj(Hⱼᵢ)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Principal submatrix on `indices`.
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| self.0[(indices[r], indices[c])])
    }
}

/// Coefficients multiplying the three parts of the ring Hamiltonian.
///
/// `hopping` scales the XY term, `field` the uniform `BΣσᶻ` term and
/// `field_disorder` the `Σηᵢσᵢᶻ` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermWeights {
    pub hopping: f64,
    pub field: f64,
    pub field_disorder: f64,
}

impl TermWeights {
    pub const TOTAL: Self = Self {
        hopping: 1.0,
        field: 1.0,
        field_disorder: 1.0,
    };
    /// The XY interaction alone.
    pub const INTERACTION: Self = Self {
        hopping: 1.0,
        field: 0.0,
        field_disorder: 0.0,
    };
    /// The uniform local term `BΣσᶻ`.
    pub const LOCAL: Self = Self {
        hopping: 0.0,
        field: 1.0,
        field_disorder: 0.0,
    };
    /// Field noise `Σηᵢσᵢᶻ`.
    pub const NOISE: Self = Self {
        hopping: 0.0,
        field: 0.0,
        field_disorder: 1.0,
    };
    /// `−H_XY + Σηᵢσᵢᶻ`: the operator whose eigenstates are the probe states of
    /// the attenuation estimate.
    pub const PROBE: Self = Self {
        hopping: -1.0,
        field: 0.0,
        field_disorder: 1.0,
    };
}

/// Calls `emit(row, value)` for every nonzero element in column `state` of the
/// weighted Hamiltonian, in the computational basis.
fn column_elements(spec: &RingSpec, theta: f64, w: TermWeights, state: usize, mut emit: impl FnMut(usize, C64)) {
    let n = spec.n_sites;
    let mut diag = 0.0;
    for i in 0..n {
        let sz = if state >> i & 1 == 1 { 1.0 } else { -1.0 };
        diag += (w.field * spec.field + w.field_disorder * spec.eta[i]) * sz;
    }
    if diag != 0.0 {
        emit(state, C64::new(diag, 0.0));
    }
    if w.hopping == 0.0 {
        return;
    }
    let phase = C64::from_polar(1.0, theta);
    for i in 0..n {
        let j = (i + 1) % n;
        let up_i = state >> i & 1 == 1;
        let up_j = state >> j & 1 == 1;
        if up_i == up_j {
            continue;
        }
        let target = state ^ (1 << i) ^ (1 << j);
        let amp = -w.hopping * spec.bond(i);
        // σᵢ⁺σⱼ⁻ raises i and lowers j; its conjugate does the reverse.
        let factor = if up_j { phase } else { phase.conj() };
        emit(target, factor * amp);
    }
}

/// Full `2^N × 2^N` Hamiltonian with the given term weights.
pub fn build_full_weighted(spec: &RingSpec, theta: f64, w: TermWeights) -> Result<HermitianMatrix> {
    spec.validate()?;
    check_full_size(spec.n_sites)?;
    let dim = 1usize << spec.n_sites;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        column_elements(spec, theta, w, col, |row, v| m[(row, col)] += v);
    }
    Ok(HermitianMatrix(m))
}

pub fn build_full_hamiltonian(spec: &RingSpec, theta: f64) -> Result<HermitianMatrix> {
    build_full_weighted(spec, theta, TermWeights::TOTAL)
}

/// Block of the weighted Hamiltonian on the `n_up`-magnon sector, built
/// without forming the full matrix. Rows and columns follow `states`.
#[derive(Debug, Clone)]
pub struct SectorBlock {
    pub states: Vec<usize>,
    pub matrix: DMatrix<C64>,
}

pub fn build_sector_block(spec: &RingSpec, theta: f64, n_up: usize, w: TermWeights) -> Result<SectorBlock> {
    spec.validate()?;
    check_full_size(spec.n_sites)?;
    let states = sector_states(spec.n_sites, n_up);
    let dim = states.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (col, &s) in states.iter().enumerate() {
        column_elements(spec, theta, w, s, |target, v| {
            let row = states.binary_search(&target).expect("hopping conserves magnetization");
            m[(row, col)] += v;
        });
    }
    Ok(SectorBlock { states, matrix: m })
}

/// `N × N` Hamiltonian on `span{|Ψ_d⟩}`.
pub fn build_one_magnon_hamiltonian(spec: &RingSpec, theta: f64) -> Result<HermitianMatrix> {
    spec.validate()?;
    let n = spec.n_sites;
    let eta_sum: f64 = spec.eta.iter().sum();
    let uniform = (2.0 - n as f64) * spec.field;
    let phase = C64::from_polar(1.0, theta);
    let mut m = DMatrix::zeros(n, n);
    for d in 0..n {
        m[(d, d)] = C64::new(uniform + 2.0 * spec.eta[d] - eta_sum, 0.0);
        let next = (d + 1) % n;
        let hop = phase * -spec.bond(d);
        m[(d, next)] += hop;
        m[(next, d)] += hop.conj();
    }
    Ok(HermitianMatrix(m))
}

/// `Σσᶻ` in the computational basis.
pub fn magnetization_operator(n_sites: usize) -> Result<HermitianMatrix> {
    validate_sites(n_sites)?;
    check_full_size(n_sites)?;
    let dim = 1usize << n_sites;
    let diag = nalgebra::DVector::from_fn(dim, |s, _| {
        C64::new(crate::state::magnetization_of(s, n_sites) as f64, 0.0)
    });
    Ok(HermitianMatrix(DMatrix::from_diagonal(&diag)))
}

/// Entrywise max-norm of `AB − BA`.
pub fn commutator_norm(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    Ok(c.iter().fold(0.0f64, |acc, z| acc.max(z.norm())))
}
