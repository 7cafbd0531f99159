//! Time evolution under a ring Hamiltonian with a time-dependent phase.
//!
//! Two integrators share one spectral kernel:
//!
//! * [`Evolver::evolve_piecewise`] is exact for schedules whose phase is
//!   piecewise constant. Time is split only at the schedule's jumps and each
//!   constant stretch is one `V e^{−iεΔt} V†` application, whatever its length.
//! * [`Evolver::evolve_stepped`] handles smooth phase laws with the midpoint
//!   exponential product `Π exp(−i H(θ(t + dt/2)) dt)`, second order in `dt`.
//!
//! Every Hamiltonian here conserves `Σσᶻ`, so full-space spectra are computed
//! sector by sector and never as one dense `2^N` eigenproblem.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{build_one_magnon_hamiltonian, build_sector_block, HermitianMatrix, RingSpec, TermWeights};
use crate::schedule::PhaseSchedule;
use crate::state::{Basis, QuantumState};
use crate::C64;

/// Largest step size accepted by the stepped integrator, as a fraction of the
/// schedule period.
pub const MIN_STEPS_PER_PERIOD: f64 = 64.0;
/// Default stepped-integrator resolution.
pub const DEFAULT_STEPS_PER_PERIOD: u32 = 2048;
/// Complex entries allowed in a per-period spectrum memo of the stepped path.
const STEP_MEMO_BUDGET: usize = 1 << 23;

#[derive(Debug, Clone)]
struct EigenBlock {
    indices: Vec<usize>,
    /// Mean diagonal, removed before diagonalization.
    offset: f64,
    /// Ascending eigenvalues of the shifted block.
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl EigenBlock {
    fn new(indices: Vec<usize>, mut m: DMatrix<C64>) -> Result<Self> {
        let n = indices.len();
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Eigen("non-finite matrix entry".into()));
        }
        let offset = (0..n).map(|i| m[(i, i)].re).sum::<f64>() / n as f64;
        for i in 0..n {
            m[(i, i)] -= C64::new(offset, 0.0);
        }
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or_else(|| Error::Eigen("no convergence".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(k).into_owned();
            // fix the free phase: largest component real and positive
            let pivot = v.iter().copied().fold(C64::new(0.0, 0.0), |best, z| {
                if z.norm_sqr() > best.norm_sqr() * (1.0 + 1e-12) {
                    z
                } else {
                    best
                }
            });
            if pivot.norm() > 0.0 {
                v *= pivot.conj() / pivot.norm();
            }
            vectors.set_column(col, &v);
        }
        Ok(Self {
            indices,
            offset,
            values,
            vectors,
        })
    }

    fn gather(&self, psi: &DVector<C64>) -> Option<DVector<C64>> {
        let local = DVector::from_iterator(self.indices.len(), self.indices.iter().map(|&i| psi[i]));
        local.iter().any(|z| z.norm_sqr() > 0.0).then_some(local)
    }

    fn phases(&self, dt: f64) -> impl Iterator<Item = C64> + '_ {
        let global = C64::from_polar(1.0, -self.offset * dt);
        self.values.iter().map(move |&e| global * C64::from_polar(1.0, -e * dt))
    }
}

/// Eigendecomposition of a Hermitian matrix, stored as independent blocks.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    blocks: Vec<EigenBlock>,
}

impl Spectrum {
    fn from_blocks(dim: usize, blocks: Vec<(Vec<usize>, DMatrix<C64>)>) -> Result<Self> {
        let blocks = blocks
            .into_par_iter()
            .map(|(idx, m)| EigenBlock::new(idx, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, blocks })
    }

    /// Diagonalizes an arbitrary Hermitian matrix, splitting it into the
    /// connected components of its sparsity graph first.
    pub fn of_matrix(h: &HermitianMatrix) -> Result<Self> {
        let n = h.dim();
        let m = h.matrix();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for c in 0..n {
            for r in (c + 1)..n {
                if m[(r, c)] != C64::new(0.0, 0.0) {
                    let (a, b) = (root(&mut parent, r), root(&mut parent, c));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            let r = root(&mut parent, i);
            let g = *slot.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        let blocks = groups.into_iter().map(|idx| {
            let sub = h.restrict(&idx);
            (idx, sub)
        });
        Self::from_blocks(n, blocks.collect())
    }

    /// Spectrum of the ring Hamiltonian at phase θ in the given basis.
    pub fn of_ring(spec: &RingSpec, basis: Basis, theta: f64) -> Result<Self> {
        Self::of_ring_weighted(spec, basis, theta, TermWeights::TOTAL)
    }

    /// Like [`Spectrum::of_ring`] for a reweighted Hamiltonian. The one-magnon
    /// basis only supports the total Hamiltonian.
    pub fn of_ring_weighted(spec: &RingSpec, basis: Basis, theta: f64, w: TermWeights) -> Result<Self> {
        check_basis(spec, basis)?;
        match basis {
            Basis::OneMagnon { n_sites } => {
                if w != TermWeights::TOTAL {
                    return Err(Error::BasisMismatch("reweighted terms need the full basis".into()));
                }
                let h = build_one_magnon_hamiltonian(spec, theta)?;
                Self::from_blocks(n_sites, vec![((0..n_sites).collect(), h.into_inner())])
            }
            Basis::Full { n_sites } => {
                let blocks = (0..=n_sites)
                    .map(|k| build_sector_block(spec, theta, k, w).map(|b| (b.states, b.matrix)))
                    .collect::<Result<Vec<_>>>()?;
                Self::from_blocks(1 << n_sites, blocks)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `exp(−iH dt) ψ`.
    pub fn evolve_vector(&self, psi: &DVector<C64>, dt: f64) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            let Some(local) = b.gather(psi) else { continue };
            let mut c = b.vectors.ad_mul(&local);
            for (ck, p) in c.iter_mut().zip(b.phases(dt)) {
                *ck *= p;
            }
            let back = &b.vectors * c;
            for (k, &i) in b.indices.iter().enumerate() {
                out[i] = back[k];
            }
        }
        out
    }

    /// Dense `exp(−iH dt)`.
    pub fn propagator(&self, dt: f64) -> Propagator {
        let mut u = DMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let mut scaled = b.vectors.clone();
            for (mut col, p) in scaled.column_iter_mut().zip(b.phases(dt)) {
                col *= p;
            }
            let local = scaled * b.vectors.adjoint();
            for (r, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    u[(i, j)] = local[(r, c)];
                }
            }
        }
        Propagator(u)
    }

    /// `(block, column)` of every eigenpair, by ascending eigenvalue.
    fn order(&self) -> Vec<(f64, usize, usize)> {
        let mut all: Vec<(f64, usize, usize)> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(bi, b)| b.values.iter().enumerate().map(move |(k, v)| (v + b.offset, bi, k)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.order().into_iter().map(|(v, _, _)| v).collect()
    }

    /// Eigenpairs by ascending eigenvalue, with eigenvectors embedded in the
    /// full dimension.
    pub fn eigenpairs(&self) -> Vec<(f64, DVector<C64>)> {
        self.order()
            .into_iter()
            .map(|(v, bi, k)| {
                let b = &self.blocks[bi];
                let mut vec = DVector::zeros(self.dim);
                for (r, &i) in b.indices.iter().enumerate() {
                    vec[i] = b.vectors[(r, k)];
                }
                (v, vec)
            })
            .collect()
    }

    /// `⟨α|ψ⟩` for every eigenvector, by ascending eigenvalue.
    pub fn coefficients(&self, psi: &DVector<C64>) -> Vec<C64> {
        self.order()
            .into_iter()
            .map(|(_, bi, k)| {
                let b = &self.blocks[bi];
                b.indices
                    .iter()
                    .enumerate()
                    .map(|(r, &i)| b.vectors[(r, k)].conj() * psi[i])
                    .sum()
            })
            .collect()
    }
}

/// Unitary `exp(−iH dt)` as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator(DMatrix<C64>);

impl Propagator {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `self · other`: apply `other` first.
    pub fn compose(&self, other: &Propagator) -> Propagator {
        Propagator(&self.0 * &other.0)
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        QuantumState::unchecked(state.basis(), &self.0 * state.amplitudes())
    }

    /// Max-norm of `U†U − 1`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        (self.0.ad_mul(&self.0) - DMatrix::identity(n, n))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()))
    }
}

pub fn interval_propagator(h: &HermitianMatrix, dt: f64) -> Result<Propagator> {
    if !dt.is_finite() {
        return Err(Error::InvalidTimes(format!("non-finite duration {dt}")));
    }
    Ok(Spectrum::of_matrix(h)?.propagator(dt))
}

/// Coefficients of `state` in the eigenbasis of `h`, by ascending eigenvalue.
pub fn spectral_coefficients(state: &QuantumState, h: &HermitianMatrix) -> Result<Vec<C64>> {
    if state.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: state.dim(),
        });
    }
    Ok(Spectrum::of_matrix(h)?.coefficients(state.amplitudes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrator {
    /// Spectral propagation split at the schedule jumps.
    Exact,
    /// Midpoint exponential product; `max_snap` is the largest distance
    /// between a requested sample time and its grid point.
    Midpoint { dt: f64, max_snap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub spec: RingSpec,
    pub schedule: PhaseSchedule,
    pub integrator: Integrator,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<QuantumState>,
    meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn basis(&self) -> Basis {
        self.states[0].basis()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &QuantumState)> {
        self.times.iter().copied().zip(&self.states)
    }

    pub fn last(&self) -> &QuantumState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

fn check_basis(spec: &RingSpec, basis: Basis) -> Result<()> {
    spec.validate()?;
    if basis.n_sites() != spec.n_sites() {
        return Err(Error::BasisMismatch(format!(
            "state has {} sites, ring has {}",
            basis.n_sites(),
            spec.n_sites()
        )));
    }
    if let Basis::Full { n_sites } = basis {
        crate::ring::check_full_size(n_sites)?;
    }
    Ok(())
}

/// Validates sample times and makes sure the grid starts at 0.
fn sample_grid(sample_times: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sample_times.len() + 1);
    if sample_times.first().is_none_or(|&t| t != 0.0) {
        out.push(0.0);
    }
    for &t in sample_times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidTimes(format!("sample time {t} outside [0, ∞)")));
        }
        if out.last().is_some_and(|&prev| t <= prev) {
            return Err(Error::InvalidTimes("sample times must be strictly increasing".into()));
        }
        out.push(t);
    }
    Ok(out)
}

/// Complex entries held by the eigenvector blocks of one spectrum.
fn footprint(basis: Basis) -> usize {
    match basis {
        Basis::OneMagnon { n_sites } => n_sites * n_sites,
        Basis::Full { n_sites } => {
            let mut binom = 1usize;
            let mut total = 0usize;
            for k in 0..=n_sites {
                total += binom * binom;
                binom = binom * (n_sites - k) / (k + 1);
            }
            total
        }
    }
}

fn theta_key(theta: f64) -> i128 {
    (theta * 1e15).round() as i128
}

/// Evolution context for one ring in one basis. Spectra are cached per phase
/// value (quantized at 1e−15), so a step schedule diagonalizes exactly twice
/// however long it runs. The cache tolerates concurrent readers and racing
/// inserts of the same key.
#[derive(Debug)]
pub struct Evolver {
    spec: RingSpec,
    basis: Basis,
    cache: RwLock<HashMap<i128, Arc<Spectrum>>>,
}

impl Evolver {
    pub fn new(spec: RingSpec, basis: Basis) -> Result<Self> {
        check_basis(&spec, basis)?;
        Ok(Self {
            spec,
            basis,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn cached_spectra(&self) -> usize {
        self.cache.read().expect("spectrum cache poisoned").len()
    }

    pub fn spectrum(&self, theta: f64) -> Result<Arc<Spectrum>> {
        let key = theta_key(theta);
        if let Some(s) = self.cache.read().expect("spectrum cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let fresh = Arc::new(Spectrum::of_ring(&self.spec, self.basis, theta)?);
        let mut map = self.cache.write().expect("spectrum cache poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(fresh)))
    }

    fn check_initial(&self, initial: &QuantumState) -> Result<()> {
        if initial.basis() != self.basis {
            return Err(Error::BasisMismatch(format!(
                "state in {:?}, evolver in {:?}",
                initial.basis(),
                self.basis
            )));
        }
        Ok(())
    }

    /// Exact evolution under a schedule that commutes at all times.
    pub fn evolve_piecewise(
        &self,
        initial: &QuantumState,
        schedule: &PhaseSchedule,
        sample_times: &[f64],
    ) -> Result<Trajectory> {
        schedule.validate()?;
        if !schedule.is_commuting() {
            return Err(Error::NonCommutingSchedule);
        }
        self.check_initial(initial)?;
        let times = sample_grid(sample_times)?;
        let t_end = *times.last().expect("grid contains 0");
        let jumps = schedule.jump_times(t_end);

        let mut psi = initial.amplitudes().clone();
        let mut t = 0.0;
        let mut next_jump = 0;
        let mut states = Vec::with_capacity(times.len());
        for &sample in &times {
            while t < sample {
                while next_jump < jumps.len() && jumps[next_jump] <= t {
                    next_jump += 1;
                }
                let stop = match jumps.get(next_jump) {
                    Some(&j) if j < sample => j,
                    _ => sample,
                };
                let theta = schedule.phase_unchecked(0.5 * (t + stop));
                psi = self.spectrum(theta)?.evolve_vector(&psi, stop - t);
                t = stop;
            }
            states.push(QuantumState::unchecked(self.basis, psi.clone())?);
        }
        Ok(Trajectory {
            times,
            states,
            meta: TrajectoryMeta {
                spec: self.spec.clone(),
                schedule: *schedule,
                integrator: Integrator::Exact,
            },
        })
    }

    /// Midpoint-rule evolution on the grid `k·dt`; sample times are snapped to
    /// the nearest grid point.
    pub fn evolve_stepped(
        &self,
        initial: &QuantumState,
        schedule: &PhaseSchedule,
        dt: f64,
        sample_times: &[f64],
    ) -> Result<Trajectory> {
        schedule.validate()?;
        self.check_initial(initial)?;
        let max_dt = schedule.period().map_or(f64::INFINITY, |p| p / MIN_STEPS_PER_PERIOD);
        if !(dt.is_finite() && dt > 0.0 && dt <= max_dt * (1.0 + 1e-12)) {
            return Err(Error::InvalidStep { dt, max: max_dt });
        }
        let requested = sample_grid(sample_times)?;
        let mut grid = Vec::with_capacity(requested.len());
        let mut max_snap = 0.0f64;
        for &t in &requested {
            let k = (t / dt).round() as u64;
            max_snap = max_snap.max((t - k as f64 * dt).abs());
            if grid.last().is_some_and(|&prev| k <= prev) {
                return Err(Error::InvalidTimes(format!(
                    "sample times closer than the step {dt} collapse onto one grid point"
                )));
            }
            grid.push(k);
        }

        // With an integer number of steps per period the midpoint phases
        // repeat exactly every period, so their spectra can be memoized.
        let steps_per_period = schedule.period().and_then(|p| {
            let r = p / dt;
            ((r - r.round()).abs() <= 1e-9 * r).then_some(r.round() as usize)
        });
        let midpoint = |k: u64| -> f64 {
            let local = match steps_per_period {
                Some(n) => (k % n as u64) as f64,
                None => k as f64,
            };
            schedule.phase_unchecked((local + 0.5) * dt)
        };
        let mut memo: Option<Vec<Option<Arc<Spectrum>>>> = None;
        if !schedule.is_commuting() {
            if let Some(n) = steps_per_period {
                if n.saturating_mul(footprint(self.basis)) <= STEP_MEMO_BUDGET {
                    memo = Some(vec![None; n]);
                }
            }
        }

        let mut psi = initial.amplitudes().clone();
        let mut states = Vec::with_capacity(grid.len());
        let mut k = 0u64;
        for &target in &grid {
            while k < target {
                let theta = midpoint(k);
                let spectrum = if schedule.is_commuting() {
                    self.spectrum(theta)?
                } else if let (Some(memo), Some(n)) = (memo.as_mut(), steps_per_period) {
                    let slot = &mut memo[(k % n as u64) as usize];
                    match slot {
                        Some(s) => Arc::clone(s),
                        None => {
                            let s = Arc::new(Spectrum::of_ring(&self.spec, self.basis, theta)?);
                            *slot = Some(Arc::clone(&s));
                            s
                        }
                    }
                } else {
                    Arc::new(Spectrum::of_ring(&self.spec, self.basis, theta)?)
                };
                psi = spectrum.evolve_vector(&psi, dt);
                k += 1;
            }
            states.push(QuantumState::unchecked(self.basis, psi.clone())?);
        }
        Ok(Trajectory {
            times: grid.iter().map(|&k| k as f64 * dt).collect(),
            states,
            meta: TrajectoryMeta {
                spec: self.spec.clone(),
                schedule: *schedule,
                integrator: Integrator::Midpoint { dt, max_snap },
            },
        })
    }
}

pub fn evolve_piecewise(
    initial: &QuantumState,
    spec: &RingSpec,
    schedule: &PhaseSchedule,
    sample_times: &[f64],
) -> Result<Trajectory> {
    Evolver::new(spec.clone(), initial.basis())?.evolve_piecewise(initial, schedule, sample_times)
}

pub fn evolve_stepped(
    initial: &QuantumState,
    spec: &RingSpec,
    schedule: &PhaseSchedule,
    dt: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    Evolver::new(spec.clone(), initial.basis())?.evolve_stepped(initial, schedule, dt, sample_times)
}
