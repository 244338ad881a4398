//! Entanglement spectra of bipartite pure states, Rényi entropies, and the
//! LOCC transformability predicates built on them.
//!
//! Entropies are in bits. A spectrum is the descending list of eigenvalues of
//! the reduced density matrix `ρ_A`; entries below [`SPECTRUM_FLOOR`] are
//! dropped so that rank noise does not dominate `S_α` at small `α`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::eigensolve::StateVector;
use crate::error::{Error, Result};

/// Spectrum entries below this are discarded.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

/// Allowed deviation of `Σ λ` from one.
pub const SUM_TOLERANCE: f64 = 1e-10;

/// Allowed deviation of a state's norm from one.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// `|α − 1|` below which the von Neumann formula is used.
pub const VON_NEUMANN_DISPATCH: f64 = 1e-9;

/// Entropy differences at or below this count as equal.
pub const EQUALITY_TOLERANCE: f64 = 1e-10;

/// Slack on partial-sum comparisons in [`majorizes`].
pub const MAJORIZATION_TOLERANCE: f64 = 1e-12;

/// Contiguous cut of an `N`-site chain: block A is sites `0..block_a_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    n_sites: usize,
    block_a_size: usize,
}

impl Partition {
    pub fn new(n_sites: usize, block_a_size: usize) -> Result<Self> {
        if block_a_size == 0 || block_a_size >= n_sites {
            return Err(Error::Config(format!(
                "block A size {block_a_size} must lie in [1, {}]",
                n_sites.saturating_sub(1)
            )));
        }
        Ok(Self {
            n_sites,
            block_a_size,
        })
    }

    /// The `N/2 : N/2` cut; `N` must be even.
    pub fn equal(n_sites: usize) -> Result<Self> {
        if n_sites % 2 != 0 {
            return Err(Error::Config(format!(
                "equal bipartition needs an even number of sites, got {n_sites}"
            )));
        }
        Self::new(n_sites, n_sites / 2)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn block_a_size(&self) -> usize {
        self.block_a_size
    }

    pub fn block_b_size(&self) -> usize {
        self.n_sites - self.block_a_size
    }

    /// Largest possible entropy, `min(|A|, |B|)` bits.
    pub fn max_entropy_bits(&self) -> f64 {
        self.block_a_size.min(self.block_b_size()) as f64
    }
}

/// Descending eigenvalues of a reduced density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EntanglementSpectrum {
    probs: Vec<f64>,
}

impl EntanglementSpectrum {
    /// Validates, floors and sorts a probability vector.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < -SPECTRUM_FLOOR) {
            return Err(Error::InvalidSpectrum(format!("entry {bad} is not a probability")));
        }
        probs.retain(|&p| p >= SPECTRUM_FLOOR);
        probs.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidSpectrum(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// `m` equal eigenvalues `1/m`.
    pub fn uniform(m: usize) -> Self {
        let m = m.max(1);
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rank(&self) -> usize {
        self.probs.len()
    }

    pub fn largest(&self) -> f64 {
        self.probs[0]
    }

    /// Rényi entropy `S_α` in bits; see [`renyi_entropy`].
    pub fn renyi(&self, alpha: f64) -> Result<f64> {
        renyi_entropy(self, alpha)
    }
}

impl TryFrom<Vec<f64>> for EntanglementSpectrum {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<EntanglementSpectrum> for Vec<f64> {
    fn from(s: EntanglementSpectrum) -> Self {
        s.probs
    }
}

fn check_state(state: &StateVector, part: &Partition) -> Result<()> {
    if state.n_sites() != part.n_sites {
        return Err(Error::InvalidState(format!(
            "state has {} sites, partition expects {}",
            state.n_sites(),
            part.n_sites
        )));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
    }
    Ok(())
}

/// Amplitudes as a `2^|A| × 2^|B|` matrix, A bits indexing rows.
fn schmidt_matrix(state: &StateVector, part: &Partition) -> DMatrix<f64> {
    // Site 0 is the least significant bit, so column-major storage puts the
    // A bits on the row index directly.
    DMatrix::from_column_slice(
        1 << part.block_a_size,
        1 << part.block_b_size(),
        state.amplitudes(),
    )
}

fn normalized_spectrum(raw: impl Iterator<Item = f64>) -> Result<EntanglementSpectrum> {
    let raw: Vec<f64> = raw.map(|x| x.max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    EntanglementSpectrum::new(raw.into_iter().map(|x| x / total).collect())
}

/// Spectrum of `ρ_A` from the singular values of the reshaped amplitudes.
pub fn reduced_spectrum(state: &StateVector, part: &Partition) -> Result<EntanglementSpectrum> {
    check_state(state, part)?;
    let m = schmidt_matrix(state, part);
    normalized_spectrum(m.singular_values().iter().map(|s| s * s))
}

/// Spectrum of `ρ_B = Mᵀ M` by symmetric eigendecomposition.
///
/// Independent of [`reduced_spectrum`]; for a pure state the two agree.
pub fn block_b_spectrum(state: &StateVector, part: &Partition) -> Result<EntanglementSpectrum> {
    check_state(state, part)?;
    let m = schmidt_matrix(state, part);
    let rho_b = m.transpose() * &m;
    normalized_spectrum(SymmetricEigen::new(rho_b).eigenvalues.iter().copied())
}

/// `S_α = log₂(Σ λ^α) / (1 − α)`, or `−Σ λ log₂ λ` near `α = 1`.
pub fn renyi_entropy(spec: &EntanglementSpectrum, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Rényi order must be positive and finite, got {alpha}")));
    }
    let probs = spec.probs();
    let value = if (alpha - 1.0).abs() <= VON_NEUMANN_DISPATCH {
        -probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    } else {
        // log Σ λ^α = α log λ_max + log Σ (λ/λ_max)^α, stable for large α.
        let top = probs[0];
        let scaled: f64 = probs.iter().map(|&p| (p / top).powf(alpha)).sum();
        (alpha * top.log2() + scaled.log2()) / (1.0 - alpha)
    };
    Ok(value.max(0.0))
}

/// `S_α` sampled on an α grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenyiCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn renyi_curve(spec: &EntanglementSpectrum, alphas: &[f64]) -> Result<RenyiCurve> {
    if alphas.is_empty() {
        return Err(Error::Usage("empty α grid".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("α grid must be strictly increasing".into()));
    }
    let values = alphas
        .iter()
        .map(|&a| renyi_entropy(spec, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(RenyiCurve {
        alphas: alphas.to_vec(),
        values,
    })
}

/// `start, start + step, …` up to `stop`, with `stop` appended if the last
/// multiple falls short of it.
pub fn alpha_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(stop >= start) || !(step > 0.0) || !stop.is_finite() {
        return Err(Error::Usage(format!(
            "invalid α grid: start {start}, stop {stop}, step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
    let last = *grid.last().unwrap_or(&start);
    if stop - last > 1e-9 * step {
        grid.push(stop);
    }
    Ok(grid)
}

/// Nielsen's criterion: whether `psi`'s spectrum is majorized by `phi`'s, i.e.
/// whether `|ψ⟩ → |φ⟩` is possible by deterministic LOCC.
pub fn majorizes(psi: &EntanglementSpectrum, phi: &EntanglementSpectrum) -> bool {
    let len = psi.rank().max(phi.rank());
    let (mut sum_psi, mut sum_phi) = (0.0, 0.0);
    for i in 0..len {
        sum_psi += psi.probs.get(i).copied().unwrap_or(0.0);
        sum_phi += phi.probs.get(i).copied().unwrap_or(0.0);
        if sum_psi > sum_phi + MAJORIZATION_TOLERANCE {
            return false;
        }
    }
    true
}

/// Sign pattern of `S_α(first) − S_α(second)` over an α grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dominance {
    /// `S_α(first) ≥ S_α(second)` everywhere, strictly somewhere. Necessary
    /// for `first → second` by LOCC, possibly with a catalyst.
    FirstGeqEverywhere,
    SecondGeqEverywhere,
    /// Both strict orderings occur: neither state converts into the other.
    Crossing,
    Identical,
}

pub fn renyi_dominance(
    first: &EntanglementSpectrum,
    second: &EntanglementSpectrum,
    alphas: &[f64],
) -> Result<Dominance> {
    dominance_of_curves(&renyi_curve(first, alphas)?, &renyi_curve(second, alphas)?)
}

pub fn dominance_of_curves(first: &RenyiCurve, second: &RenyiCurve) -> Result<Dominance> {
    if first.alphas != second.alphas {
        return Err(Error::Usage("Rényi curves sampled on different α grids".into()));
    }
    let mut above = false;
    let mut below = false;
    for (a, b) in first.values.iter().zip(&second.values) {
        let d = a - b;
        above |= d > EQUALITY_TOLERANCE;
        below |= d < -EQUALITY_TOLERANCE;
    }
    Ok(match (above, below) {
        (true, true) => Dominance::Crossing,
        (true, false) => Dominance::FirstGeqEverywhere,
        (false, true) => Dominance::SecondGeqEverywhere,
        (false, false) => Dominance::Identical,
    })
}
