//! Finite-N exact diagonalization in the collective basis `|n⟩ ⊗ |j m⟩`
//! with a truncated boson Fock space.
//!
//! Spin quantum numbers are stored doubled (`j2 = 2j`, `m2 = 2m`) so that
//! odd N needs no half-integers. Every term of the Hamiltonian flips the
//! parity `(−1)^(n + j + m)`, so each j sector splits into two blocks that
//! are diagonalized separately.

use nalgebra::{DMatrix, RealField, SymmetricEigen};
use num_traits::Float;

use crate::error::{DickeError, Result};
use crate::meanfield::solve_gap;
use crate::model::{InverseTemperature, ModelParams};
use crate::scalar::Real;

/// Default limit on the basis dimension of a single j sector.
pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Extra Fock levels used by the truncation check.
pub const TRUNCATION_PROBE: usize = 8;

/// Scalars the dense eigensolver accepts.
pub trait EdScalar: Real + RealField {}
impl<T: Real + RealField> EdScalar for T {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdConfig<T> {
    pub n_atoms: usize,
    pub n_max: usize,
    pub params: ModelParams<T>,
    pub beta: InverseTemperature<T>,
    pub max_dim: usize,
}

impl<T: Real> EdConfig<T> {
    /// Config with the default Fock cutoff
    /// `max(16, ceil(8 N b0²) + 16)`, b0² taken from the mean-field solution.
    pub fn new(n_atoms: usize, params: ModelParams<T>, beta: InverseTemperature<T>) -> Result<Self> {
        let n_max = default_cutoff(n_atoms, &params, beta)?;
        Ok(Self::with_cutoff(n_atoms, n_max, params, beta))
    }

    pub fn with_cutoff(
        n_atoms: usize,
        n_max: usize,
        params: ModelParams<T>,
        beta: InverseTemperature<T>,
    ) -> Self {
        EdConfig { n_atoms, n_max, params, beta, max_dim: DEFAULT_MAX_DIM }
    }

    /// Dimension of the j = N/2 sector, `(n_max + 1)(N + 1)`.
    pub fn dimension(&self) -> usize {
        (self.n_max + 1) * (self.n_atoms + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(DickeError::domain("n_atoms must be >= 1"));
        }
        crate::model::validate_params(self.params)?;
        if let InverseTemperature::Finite(b) = self.beta {
            if !(b > T::zero() && b.is_finite()) {
                return Err(DickeError::domain(format!("beta must be > 0, got {b}")));
            }
        }
        let dim = self
            .n_max
            .checked_add(1)
            .and_then(|a| a.checked_mul(self.n_atoms + 1))
            .unwrap_or(usize::MAX);
        if dim > self.max_dim {
            return Err(DickeError::Capacity { dim, limit: self.max_dim });
        }
        Ok(())
    }
}

pub fn default_cutoff<T: Real>(
    n_atoms: usize,
    params: &ModelParams<T>,
    beta: InverseTemperature<T>,
) -> Result<usize> {
    let b0_sq = if params.coupling_sum() > T::zero() {
        solve_gap(params, beta)?.b0_sq.to_f64().unwrap_or(0.0)
    } else {
        0.0
    };
    let estimate = (8.0 * n_atoms as f64 * b0_sq).ceil() as usize + 16;
    Ok(estimate.max(16))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdResult<T> {
    pub free_energy_per_atom: T,
    /// `⟨b†b⟩ / N`.
    pub photon_density: T,
    /// `⟨Jz⟩ / N`.
    pub inversion: T,
    /// Lowest excitation energies of the j = N/2 sector above its ground state.
    pub gaps: Vec<T>,
    pub parity_residual: T,
    pub nsum_residual: T,
    pub ndiff_residual: T,
    /// Cutoff the observables were computed with.
    pub n_max: usize,
    /// `|ΔF/N|` when the cutoff is raised by `TRUNCATION_PROBE`.
    pub truncation_shift: T,
}

/// One collective basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct State {
    n: usize,
    m2: i64,
}

impl State {
    fn parity_even(&self, j2: i64) -> bool {
        (self.n as i64 + (j2 + self.m2) / 2) % 2 == 0
    }
}

/// Basis of the sector `j2` in `n`-major order, optionally restricted to
/// one parity.
fn sector_basis(j2: i64, n_max: usize, parity: Option<bool>) -> Vec<State> {
    let mut states = Vec::with_capacity((n_max + 1) * (j2 as usize + 1));
    for n in 0..=n_max {
        for m2 in (-j2..=j2).step_by(2) {
            let s = State { n, m2 };
            if parity.map_or(true, |even| s.parity_even(j2) == even) {
                states.push(s);
            }
        }
    }
    states
}

/// `⟨j, m+1| J+ |j, m⟩`.
fn j_plus<T: Real>(j2: i64, m2: i64) -> T {
    let v = (j2 * (j2 + 2) - m2 * (m2 + 2)) as f64;
    T::lit(v.max(0.0).sqrt() / 2.0)
}

fn hamiltonian_on<T: EdScalar>(
    p: &ModelParams<T>,
    n_atoms: usize,
    j2: i64,
    n_max: usize,
    states: &[State],
) -> DMatrix<T> {
    let width = j2 as usize + 1;
    let mut index = vec![usize::MAX; (n_max + 1) * width];
    for (i, s) in states.iter().enumerate() {
        index[s.n * width + ((s.m2 + j2) / 2) as usize] = i;
    }
    let lookup = |n: usize, m2: i64| -> Option<usize> {
        if n > n_max || m2 < -j2 || m2 > j2 {
            return None;
        }
        let i = index[n * width + ((m2 + j2) / 2) as usize];
        (i != usize::MAX).then_some(i)
    };

    let dim = states.len();
    let mut h = DMatrix::<T>::zeros(dim, dim);
    let half = T::lit(0.5);
    let inv_sqrt_n = T::one() / Float::sqrt(T::from_usize_lossy(n_atoms));
    let c1 = p.g1 * inv_sqrt_n;
    let c2 = p.g2 * inv_sqrt_n;
    for (col, s) in states.iter().enumerate() {
        h[(col, col)] = p.splitting * half * T::lit(s.m2 as f64) + p.omega0 * T::from_usize_lossy(s.n);
        let raise = Float::sqrt(T::from_usize_lossy(s.n + 1));
        // b† J− from the rotating term; its transpose is b J+
        if let Some(row) = lookup(s.n + 1, s.m2 - 2) {
            let v = c1 * raise * j_plus::<T>(j2, s.m2 - 2);
            h[(row, col)] += v;
            h[(col, row)] += v;
        }
        // b† J+ from the counter-rotating term; its transpose is b J−
        if let Some(row) = lookup(s.n + 1, s.m2 + 2) {
            let v = c2 * raise * j_plus::<T>(j2, s.m2);
            h[(row, col)] += v;
            h[(col, row)] += v;
        }
    }
    h
}

/// Hamiltonian of the j = N/2 sector on the truncated space, basis index
/// `n (N+1) + (m + N/2)`. Symmetric by construction.
pub fn build_hamiltonian<T: EdScalar>(cfg: &EdConfig<T>) -> Result<DMatrix<T>> {
    cfg.validate()?;
    let j2 = cfg.n_atoms as i64;
    let states = sector_basis(j2, cfg.n_max, None);
    Ok(hamiltonian_on(&cfg.params, cfg.n_atoms, j2, cfg.n_max, &states))
}

/// Number of spin multiplets with total spin `j2/2` among N spin-½.
fn ln_multiplicity(n_atoms: usize, j2: i64) -> f64 {
    let k = (n_atoms as i64 - j2) / 2;
    let (n, k) = (n_atoms as f64, k as f64);
    // C(N,k)(N−2k+1)/(N−k+1) in logs
    ln_choose(n, k) + (n - 2.0 * k + 1.0).ln() - (n - k + 1.0).ln()
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: f64) -> f64 {
    (1..=n as u64).map(|i| (i as f64).ln()).sum()
}

/// Eigen-data of one parity block, kept only as far as the thermal sums need.
struct Block<T> {
    j2: i64,
    ln_weight: T,
    energies: Vec<T>,
    photons: Vec<T>,
    jz: Vec<T>,
}

fn diagonalize_block<T: EdScalar>(
    cfg: &EdConfig<T>,
    n_max: usize,
    j2: i64,
    even: bool,
    with_vectors: bool,
) -> Option<Block<T>> {
    let states = sector_basis(j2, n_max, Some(even));
    if states.is_empty() {
        return None;
    }
    let h = hamiltonian_on(&cfg.params, cfg.n_atoms, j2, n_max, &states);
    let ln_weight = T::lit(ln_multiplicity(cfg.n_atoms, j2));
    if !with_vectors {
        let energies = h.symmetric_eigenvalues().iter().copied().collect();
        return Some(Block { j2, ln_weight, energies, photons: Vec::new(), jz: Vec::new() });
    }
    let eig = SymmetricEigen::new(h);
    let half = T::lit(0.5);
    let mut photons = Vec::with_capacity(states.len());
    let mut jz = Vec::with_capacity(states.len());
    for k in 0..states.len() {
        let v = eig.eigenvectors.column(k);
        let (mut n_avg, mut m_avg) = (T::zero(), T::zero());
        for (a, s) in states.iter().enumerate() {
            let w = v[a] * v[a];
            n_avg += w * T::from_usize_lossy(s.n);
            m_avg += w * half * T::lit(s.m2 as f64);
        }
        photons.push(n_avg);
        jz.push(m_avg);
    }
    Some(Block { j2, ln_weight, energies: eig.eigenvalues.iter().copied().collect(), photons, jz })
}

fn sectors(n_atoms: usize, beta: InverseTemperature<impl Real>) -> Vec<i64> {
    let top = n_atoms as i64;
    if beta.is_infinite() {
        // the ground state lives in the fully symmetric sector
        return vec![top];
    }
    (0..=top).rev().filter(|j2| (top - j2) % 2 == 0).collect()
}

struct Thermal<T> {
    free_energy_per_atom: T,
    photon_density: T,
    inversion: T,
}

fn thermal_sums<T: EdScalar>(cfg: &EdConfig<T>, blocks: &[Block<T>]) -> Thermal<T> {
    let n = T::from_usize_lossy(cfg.n_atoms);
    let e0 = blocks
        .iter()
        .flat_map(|b| b.energies.iter().copied())
        .fold(T::infinity(), Float::min);
    let has_vectors = blocks.iter().all(|b| b.photons.len() == b.energies.len());

    let mut z = T::zero();
    let mut n_sum = T::zero();
    let mut m_sum = T::zero();
    let beta = cfg.beta.value();
    // ground manifold at zero temperature: levels within rounding of E0
    let ground_tol = T::tol(1e-12, 64.0) * Float::max(T::one(), Float::abs(e0));
    for b in blocks {
        let weight0 = Float::exp(b.ln_weight);
        for (i, &e) in b.energies.iter().enumerate() {
            let w = match beta {
                Some(beta) => weight0 * Float::exp(-beta * (e - e0)),
                None if e - e0 <= ground_tol => weight0,
                None => T::zero(),
            };
            z += w;
            if has_vectors {
                n_sum += w * b.photons[i];
                m_sum += w * b.jz[i];
            }
        }
    }
    let free = match beta {
        Some(beta) => (e0 - Float::ln(z) / beta) / n,
        None => e0 / n,
    };
    Thermal {
        free_energy_per_atom: free,
        photon_density: n_sum / z / n,
        inversion: m_sum / z / n,
    }
}

fn collect_blocks<T: EdScalar>(cfg: &EdConfig<T>, n_max: usize, with_vectors: bool) -> Vec<Block<T>> {
    let mut blocks = Vec::new();
    for j2 in sectors(cfg.n_atoms, cfg.beta) {
        for even in [true, false] {
            if let Some(b) = diagonalize_block(cfg, n_max, j2, even, with_vectors) {
                blocks.push(b);
            }
        }
    }
    blocks
}

/// Canonical-ensemble observables over all j sectors weighted by their
/// multiplicities (only j = N/2 at zero temperature), plus the lowest
/// `k_gaps` excitation energies of the j = N/2 sector and the commutator
/// residuals.
///
/// Fails with `Truncation` when raising the cutoff by `TRUNCATION_PROBE`
/// moves F/N by 1e-8 or more.
pub fn thermal_observables<T: EdScalar>(cfg: &EdConfig<T>, k_gaps: usize) -> Result<EdResult<T>> {
    cfg.validate()?;
    let blocks = collect_blocks(cfg, cfg.n_max, true);
    let thermal = thermal_sums(cfg, &blocks);

    let mut top: Vec<T> = blocks
        .iter()
        .filter(|b| b.j2 == cfg.n_atoms as i64)
        .flat_map(|b| b.energies.iter().copied())
        .collect();
    top.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let gaps = top.iter().skip(1).take(k_gaps).map(|&e| e - top[0]).collect();

    let probe = collect_blocks(cfg, cfg.n_max + TRUNCATION_PROBE, false);
    let probed = thermal_sums(cfg, &probe);
    let shift = Float::abs(probed.free_energy_per_atom - thermal.free_energy_per_atom);
    let limit = T::tol(1e-8, 1e4);
    if !(shift < limit) {
        return Err(DickeError::Truncation(format!(
            "F/N moved by {shift} when n_max went from {} to {}",
            cfg.n_max,
            cfg.n_max + TRUNCATION_PROBE
        )));
    }

    let (parity_residual, nsum_residual, ndiff_residual) = symmetry_residuals(cfg)?;
    Ok(EdResult {
        free_energy_per_atom: thermal.free_energy_per_atom,
        photon_density: thermal.photon_density,
        inversion: thermal.inversion,
        gaps,
        parity_residual,
        nsum_residual,
        ndiff_residual,
        n_max: cfg.n_max,
        truncation_shift: shift,
    })
}

/// Frobenius norms of `[H, Π]`, `[H, N]` and `[H, N−]` on the truncated
/// j = N/2 sector, with `N = b†b + Jz + j` and `N− = b†b − Jz`.
///
/// All three operators are diagonal in the basis, so the commutator
/// entries are `H_ab d_b − d_a H_ab`.
pub fn symmetry_residuals<T: EdScalar>(cfg: &EdConfig<T>) -> Result<(T, T, T)> {
    let h = build_hamiltonian(cfg)?;
    let j2 = cfg.n_atoms as i64;
    let states = sector_basis(j2, cfg.n_max, None);
    let half = T::lit(0.5);
    let parity: Vec<T> = states
        .iter()
        .map(|s| if s.parity_even(j2) { T::one() } else { -T::one() })
        .collect();
    let nsum: Vec<T> = states
        .iter()
        .map(|s| T::from_usize_lossy(s.n) + half * T::lit((s.m2 + j2) as f64))
        .collect();
    let ndiff: Vec<T> = states
        .iter()
        .map(|s| T::from_usize_lossy(s.n) - half * T::lit(s.m2 as f64))
        .collect();
    let norm = |d: &[T]| {
        let mut acc = T::zero();
        for a in 0..h.nrows() {
            for b in 0..h.ncols() {
                let c = h[(a, b)] * d[b] - d[a] * h[(a, b)];
                acc += c * c;
            }
        }
        Float::sqrt(acc)
    };
    Ok((norm(&parity), norm(&nsum), norm(&ndiff)))
}
