//! Lowest eigenpairs of a chain Hamiltonian.
//!
//! Small chains go through dense diagonalization; larger ones through a
//! restarted, deflated Lanczos iteration with full reorthogonalization. Both
//! paths return states in the same sign gauge (largest-magnitude amplitude
//! positive) so outputs are reproducible bit for bit.
//!
//! Every supported Hamiltonian commutes with the spin-flip parity `∏ σ^z`,
//! and in the ordered phases the lowest levels of the two parity sectors are
//! split only by a tunnelling gap that vanishes exponentially in `N`. Each
//! sector is therefore solved on its own and the levels merged, so states
//! always have definite parity instead of being an arbitrary mixture of a
//! near-degenerate doublet.

mod dense;
mod lanczos;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, ModelSpec};

/// Upper bound on the number of eigenpairs per request.
pub const MAX_EIGENPAIRS: usize = 4;

/// Default residual tolerance `‖Hv − Ev‖₂`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Relative gap below which adjacent levels are flagged degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

const MIN_TOLERANCE: f64 = 1e-13;
const MAX_TOLERANCE: f64 = 1e-6;

/// Normalized real amplitudes in the computational basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Wraps raw amplitudes; the length must be `2^N` with `N ≥ 1`.
    pub fn from_amplitudes(amplitudes: Vec<f64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "state length {len} is not a power of two"
            )));
        }
        Ok(Self(amplitudes))
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.0
    }

    pub fn n_sites(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn overlap(&self, other: &StateVector) -> f64 {
        dot(&self.0, &other.0)
    }
}

/// Eigenvalue of `∏ σ^z`: even or odd number of down spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(b: usize) -> Self {
        if b.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Basis indices of this sector in ascending order.
    pub fn sector(self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|&b| Parity::of(b) == self).collect()
    }
}

/// Energies this close (relative) are ordered even sector first.
const SECTOR_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub energy: f64,
    pub state: StateVector,
    pub parity: Parity,
    /// `‖H v − E v‖₂` of the returned pair.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    /// Ascending in energy.
    pub pairs: Vec<EigenPair>,
    /// `E_{i+1} − E_i` for consecutive pairs.
    pub gaps: Vec<f64>,
    pub degenerate: bool,
}

impl SpectrumSlice {
    fn from_pairs(pairs: Vec<EigenPair>) -> Self {
        let gaps: Vec<f64> = pairs.windows(2).map(|w| w[1].energy - w[0].energy).collect();
        let scale = pairs.first().map_or(1.0, |p| p.energy.abs().max(1.0));
        let degenerate = gaps.iter().any(|&g| g < DEGENERACY_TOLERANCE * scale);
        Self {
            pairs,
            gaps,
            degenerate,
        }
    }

    pub fn ground(&self) -> &EigenPair {
        &self.pairs[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dense when `2^N ≤ dense_cap`, Lanczos otherwise.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub method: Method,
    /// Largest dimension `Auto` sends to the dense solver.
    pub dense_cap: usize,
    /// Krylov subspace size per Lanczos pass.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Seed of the Lanczos start vectors.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            method: Method::Auto,
            dense_cap: 256,
            krylov_dim: 120,
            max_restarts: 60,
            seed: 0x5eed_2011,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(MIN_TOLERANCE..=MAX_TOLERANCE).contains(&self.tol) {
            return Err(Error::Config(format!(
                "tolerance {} outside [{MIN_TOLERANCE:e}, {MAX_TOLERANCE:e}]",
                self.tol
            )));
        }
        if self.krylov_dim < 2 {
            return Err(Error::Config("krylov_dim must be at least 2".into()));
        }
        Ok(())
    }
}

/// The `k` lowest eigenpairs of `spec`'s Hamiltonian with default solver settings.
pub fn lowest_eigenpairs(spec: &ModelSpec, k: usize, tol: f64) -> Result<SpectrumSlice> {
    lowest_eigenpairs_with(spec, k, &SolverConfig::default().with_tol(tol))
}

pub fn lowest_eigenpairs_with(spec: &ModelSpec, k: usize, cfg: &SolverConfig) -> Result<SpectrumSlice> {
    if k == 0 || k > MAX_EIGENPAIRS {
        return Err(Error::Unsupported(format!(
            "k = {k} eigenpairs requested; supported range is 1..={MAX_EIGENPAIRS}"
        )));
    }
    cfg.validate()?;
    let ham = Hamiltonian::new(spec);
    if k > ham.dim() {
        return Err(Error::Unsupported(format!(
            "k = {k} exceeds Hilbert-space dimension {}",
            ham.dim()
        )));
    }
    let use_dense = match cfg.method {
        Method::Dense => true,
        Method::Lanczos => false,
        Method::Auto => ham.dim() <= cfg.dense_cap,
    };
    let mut raw = Vec::with_capacity(2 * k);
    for parity in [Parity::Even, Parity::Odd] {
        let sector = parity.sector(ham.dim());
        let want = k.min(sector.len());
        let found = if use_dense {
            dense::lowest(&ham, want, &sector)?
        } else {
            lanczos::lowest(&ham, want, &sector, cfg)?
        };
        raw.extend(found.into_iter().map(|(e, v, r)| (e, v, r, parity)));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Put the even level first within exact or round-off ties so the
    // choice does not depend on the solver path.
    let scale = raw.first().map_or(1.0, |p| p.0.abs().max(1.0));
    for i in 0..raw.len().saturating_sub(1) {
        if raw[i + 1].0 - raw[i].0 <= SECTOR_TIE * scale && raw[i + 1].3 < raw[i].3 {
            raw.swap(i, i + 1);
        }
    }
    raw.truncate(k);
    let pairs = raw
        .into_iter()
        .map(|(energy, mut v, residual, parity)| {
            fix_sign(&mut v);
            EigenPair {
                energy,
                state: StateVector(v),
                parity,
                residual,
            }
        })
        .collect();
    Ok(SpectrumSlice::from_pairs(pairs))
}

pub fn ground_state(spec: &ModelSpec, tol: f64) -> Result<EigenPair> {
    ground_state_with(spec, &SolverConfig::default().with_tol(tol))
}

pub fn ground_state_with(spec: &ModelSpec, cfg: &SolverConfig) -> Result<EigenPair> {
    let mut slice = lowest_eigenpairs_with(spec, 1, cfg)?;
    Ok(slice.pairs.swap_remove(0))
}

/// Flips the global sign so the first largest-magnitude amplitude is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(ham: &Hamiltonian, energy: f64, v: &[f64], scratch: &mut [f64]) -> Result<f64> {
    ham.apply_into(v, scratch)?;
    Ok(scratch
        .iter()
        .zip(v)
        .map(|(hv, x)| (hv - energy * x).powi(2))
        .sum::<f64>()
        .sqrt())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_dense_hamiltonian;

    fn dense_oracle(spec: &ModelSpec) -> Vec<f64> {
        let mut e: Vec<f64> = build_dense_hamiltonian(spec)
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn lanczos() -> SolverConfig {
        SolverConfig::default().with_method(Method::Lanczos)
    }

    #[test]
    fn strong_field_ground_state_is_polarized() {
        let g = 100.0;
        let spec = ModelSpec::ising(g, 10).unwrap();
        let gs = ground_state(&spec, 1e-10).unwrap();
        // second order: each of the N bonds contributes −1/(4g)
        let expected = -g * 10.0 - 10.0 / (4.0 * g);
        assert!((gs.energy - expected).abs() < 1e-4, "{}", gs.energy);
        let overlap = gs.state.amplitudes()[0];
        assert!(overlap > 1.0 - 1e-4, "{overlap}");
    }

    #[test]
    fn lanczos_matches_dense_oracle_at_n10() {
        let spec = ModelSpec::ising(1.0, 10).unwrap();
        let oracle = dense_oracle(&spec);
        let slice = lowest_eigenpairs_with(&spec, 3, &lanczos()).unwrap();
        for (pair, exact) in slice.pairs.iter().zip(&oracle) {
            assert!((pair.energy - exact).abs() <= 1e-10 * exact.abs(), "{} vs {exact}", pair.energy);
            assert!(pair.residual <= 1e-10);
        }
    }

    #[test]
    fn xxz_four_sites_matches_dense() {
        let spec = ModelSpec::xxz(1.0, 4).unwrap();
        let oracle = dense_oracle(&spec);
        for method in [Method::Dense, Method::Lanczos] {
            let slice = lowest_eigenpairs_with(&spec, 4, &SolverConfig::default().with_method(method)).unwrap();
            for (pair, exact) in slice.pairs.iter().zip(&oracle) {
                assert!((pair.energy - exact).abs() < 1e-10);
            }
        }
        // Heisenberg ring of 4: E0 = −8 in Pauli units
        assert!((oracle[0] + 8.0).abs() < 1e-12);
    }

    #[test]
    fn sign_gauge_and_determinism() {
        let spec = ModelSpec::xy(0.5, 0.7, 10).unwrap();
        for cfg in [SolverConfig::default(), lanczos()] {
            let a = ground_state_with(&spec, &cfg).unwrap();
            let b = ground_state_with(&spec, &cfg).unwrap();
            assert_eq!(a, b);
            let amps = a.state.amplitudes();
            let max = amps.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = amps.iter().find(|x| x.abs() == max).unwrap();
            assert!(*first > 0.0);
            assert!((a.state.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ground_energy_decreases_with_field() {
        let e = |g| ground_state(&ModelSpec::ising(g, 8).unwrap(), 1e-10).unwrap().energy;
        let (lo, hi) = (e(0.5), e(1.5));
        assert!(lo < 0.0 && hi < 0.0);
        assert!(hi < lo);
        let energies: Vec<f64> = (0..=10).map(|i| e(0.5 + 0.1 * i as f64)).collect();
        assert!(energies.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ground_and_excited_are_orthogonal() {
        for g in [0.5, 1.0, 1.4] {
            let spec = ModelSpec::ising(g, 10).unwrap();
            for cfg in [SolverConfig::default().with_method(Method::Dense), lanczos()] {
                let s = lowest_eigenpairs_with(&spec, 2, &cfg).unwrap();
                assert!(s.pairs[0].state.overlap(&s.pairs[1].state).abs() <= 1e-8);
                assert!(s.gaps[0] > 0.0);
                assert!(!s.degenerate);
            }
        }
    }

    #[test]
    fn exact_degeneracy_is_flagged_and_resolved() {
        // Heisenberg ring: the first excited level is a triplet.
        let spec = ModelSpec::xxz(1.0, 6).unwrap();
        let oracle = dense_oracle(&spec);
        for cfg in [SolverConfig::default().with_method(Method::Dense), lanczos()] {
            let s = lowest_eigenpairs_with(&spec, 4, &cfg).unwrap();
            assert!(s.degenerate);
            for (p, e) in s.pairs.iter().zip(&oracle) {
                assert!((p.energy - e).abs() < 1e-9);
            }
            for i in 0..4 {
                for j in 0..i {
                    assert!(s.pairs[i].state.overlap(&s.pairs[j].state).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn near_degenerate_doublet_resolved_by_parity() {
        // Ordered XY chain: the two lowest levels differ by ~1e-6.
        let spec = ModelSpec::xy(0.75f64.sqrt(), 0.9, 10).unwrap();
        let dense = lowest_eigenpairs_with(&spec, 2, &SolverConfig::default().with_method(Method::Dense)).unwrap();
        let lz = lowest_eigenpairs_with(&spec, 2, &lanczos()).unwrap();
        assert!(dense.gaps[0] < 1e-5);
        assert_ne!(dense.pairs[0].parity, dense.pairs[1].parity);
        for (d, l) in dense.pairs.iter().zip(&lz.pairs) {
            assert_eq!(d.parity, l.parity);
            assert!((d.energy - l.energy).abs() < 1e-9);
            assert!((d.state.overlap(&l.state) - 1.0).abs() < 1e-9);
            let wrong = d
                .state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(b, _)| Parity::of(*b) != d.parity)
                .fold(0.0f64, |m, (_, x)| m.max(x.abs()));
            assert_eq!(wrong, 0.0);
        }
    }

    #[test]
    fn exact_sector_tie_prefers_even() {
        // At h = 1 the two sector ground states cross exactly for N = 10.
        let spec = ModelSpec::xy(0.75f64.sqrt(), 1.0, 10).unwrap();
        for cfg in [SolverConfig::default().with_method(Method::Dense), lanczos()] {
            let s = lowest_eigenpairs_with(&spec, 2, &cfg).unwrap();
            assert!(s.degenerate);
            assert_eq!(s.pairs[0].parity, Parity::Even);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let spec = ModelSpec::ising(1.0, 6).unwrap();
        assert!(matches!(lowest_eigenpairs(&spec, 5, 1e-10), Err(Error::Unsupported(_))));
        assert!(matches!(lowest_eigenpairs(&spec, 0, 1e-10), Err(Error::Unsupported(_))));
        assert!(matches!(lowest_eigenpairs(&spec, 1, 1e-3), Err(Error::Config(_))));
        assert!(matches!(lowest_eigenpairs(&spec, 1, 1e-15), Err(Error::Config(_))));
    }

    #[test]
    fn non_convergence_reports_best_residual() {
        let spec = ModelSpec::ising(0.9, 12).unwrap();
        let cfg = SolverConfig {
            krylov_dim: 3,
            max_restarts: 1,
            ..lanczos()
        };
        match lowest_eigenpairs_with(&spec, 1, &cfg) {
            Err(Error::Convergence { best_residual, .. }) => assert!(best_residual > cfg.tol),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
