//! Spin-1/2 chain Hamiltonians with periodic boundary conditions.
//!
//! Basis states are bit strings: bit `i` of a [`BasisIndex`] is the σ^z
//! eigenvalue of site `i`, with `0` meaning +1 (up) and `1` meaning −1 (down).
//! Every family is written as a sum over the `N` bonds `(i, i+1 mod N)`
//!
//! ```text
//! H = Σ_i [ cx σ^x_i σ^x_{i+1} + cy σ^y_i σ^y_{i+1} + czz σ^z_i σ^z_{i+1} + hz σ^z_i ]
//! ```
//!
//! so all three families share one matrix-free kernel. σ^xσ^x and σ^yσ^y both
//! flip the two spins of a bond; σ^yσ^y picks up −1 on aligned spins and +1 on
//! anti-aligned ones, which keeps every matrix element real.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dense matrix dimension built by default (N ≤ 12).
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Upper bound on chain length; a single state vector at this size is 128 MiB.
pub const MAX_SITES: usize = 24;

const PAR_CHUNK: usize = 4096;

/// Hamiltonian family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `H = −Σ (σ^x σ^x + g σ^z)`.
    TransverseIsing { g: f64 },
    /// `H = −Σ [(1+γ) σ^x σ^x + (1−γ) σ^y σ^y + h σ^z]`.
    Xy { gamma: f64, h: f64 },
    /// `H = Σ [σ^x σ^x + σ^y σ^y + Δ σ^z σ^z]`.
    Xxz { delta: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::TransverseIsing { .. } => "ising",
            Family::Xy { .. } => "xy",
            Family::Xxz { .. } => "xxz",
        }
    }

    /// Parameter names accepted by the family called `name`.
    pub fn parameter_names(name: &str) -> Result<&'static [&'static str]> {
        match name {
            "ising" => Ok(&["g"]),
            "xy" => Ok(&["gamma", "h"]),
            "xxz" => Ok(&["delta"]),
            other => Err(Error::Config(format!(
                "unknown model family '{other}' (expected ising, xy or xxz)"
            ))),
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Family::TransverseIsing { g } => vec![("g", g)],
            Family::Xy { gamma, h } => vec![("gamma", gamma), ("h", h)],
            Family::Xxz { delta } => vec![("delta", delta)],
        }
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params()
            .into_iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }

    /// Builds a family from its name and an exact parameter set.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let expected = Family::parameter_names(name)?;
        for key in params.keys() {
            if !expected.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "parameter '{key}' does not belong to model '{name}'"
                )));
            }
        }
        let get = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("model '{name}' requires parameter '{key}'")))
        };
        let family = match name {
            "ising" => Family::TransverseIsing { g: get("g")? },
            "xy" => Family::Xy {
                gamma: get("gamma")?,
                h: get("h")?,
            },
            _ => Family::Xxz {
                delta: get("delta")?,
            },
        };
        Ok(family)
    }

    /// Copy of `self` with parameter `key` replaced.
    pub fn with_param(&self, key: &str, value: f64) -> Result<Self> {
        let mut out = *self;
        let slot = match (&mut out, key) {
            (Family::TransverseIsing { g }, "g") => g,
            (Family::Xy { gamma, .. }, "gamma") => gamma,
            (Family::Xy { h, .. }, "h") => h,
            (Family::Xxz { delta }, "delta") => delta,
            _ => {
                return Err(Error::Config(format!(
                    "model '{}' has no parameter '{key}'",
                    self.name()
                )))
            }
        };
        *slot = value;
        Ok(out)
    }

    fn couplings(&self) -> Couplings {
        match *self {
            Family::TransverseIsing { g } => Couplings {
                xx: -1.0,
                yy: 0.0,
                zz: 0.0,
                z: -g,
            },
            Family::Xy { gamma, h } => Couplings {
                xx: -(1.0 + gamma),
                yy: -(1.0 - gamma),
                zz: 0.0,
                z: -h,
            },
            Family::Xxz { delta } => Couplings {
                xx: 1.0,
                yy: 1.0,
                zz: delta,
                z: 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Couplings {
    xx: f64,
    yy: f64,
    zz: f64,
    z: f64,
}

/// A validated chain: Hamiltonian family plus number of sites. Boundary
/// conditions are always periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlatRecord", into = "FlatRecord")]
pub struct ModelSpec {
    family: Family,
    n_sites: usize,
}

impl ModelSpec {
    pub fn new(family: Family, n_sites: usize) -> Result<Self> {
        if n_sites < 3 {
            return Err(Error::Config(format!(
                "periodic chain needs at least 3 sites, got {n_sites}"
            )));
        }
        if n_sites > MAX_SITES {
            return Err(Error::Config(format!(
                "at most {MAX_SITES} sites are supported, got {n_sites}"
            )));
        }
        if let Some((key, value)) = family.params().into_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("parameter {key} = {value} is not finite")));
        }
        Ok(Self { family, n_sites })
    }

    pub fn ising(g: f64, n_sites: usize) -> Result<Self> {
        Self::new(Family::TransverseIsing { g }, n_sites)
    }

    pub fn xy(gamma: f64, h: f64, n_sites: usize) -> Result<Self> {
        Self::new(Family::Xy { gamma, h }, n_sites)
    }

    pub fn xxz(delta: f64, n_sites: usize) -> Result<Self> {
        Self::new(Family::Xxz { delta }, n_sites)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn with_param(&self, key: &str, value: f64) -> Result<Self> {
        Self::new(self.family.with_param(key, value)?, self.n_sites)
    }

    pub fn with_sites(&self, n_sites: usize) -> Result<Self> {
        Self::new(self.family, n_sites)
    }

    /// Flat key/value form: `family`, the family's parameters, `n_sites`.
    pub fn to_record(&self) -> Vec<(String, String)> {
        let mut out = vec![("family".to_string(), self.family.name().to_string())];
        out.extend(
            self.family
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string())),
        );
        out.push(("n_sites".to_string(), self.n_sites.to_string()));
        out
    }

    pub fn from_record<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut family = None;
        let mut n_sites = None;
        let mut params = BTreeMap::new();
        for (key, value) in pairs {
            let (key, value) = (key.trim(), value.trim());
            match key {
                "family" => family = Some(value.to_string()),
                "n_sites" => {
                    n_sites = Some(value.parse::<usize>().map_err(|_| {
                        Error::Config(format!("n_sites must be a positive integer, got '{value}'"))
                    })?)
                }
                _ => {
                    let v = value.parse::<f64>().map_err(|_| {
                        Error::Config(format!("parameter {key} must be numeric, got '{value}'"))
                    })?;
                    if params.insert(key.to_string(), v).is_some() {
                        return Err(Error::Config(format!("duplicate parameter '{key}'")));
                    }
                }
            }
        }
        let family = family.ok_or_else(|| Error::Config("missing 'family'".into()))?;
        let n_sites = n_sites.ok_or_else(|| Error::Config("missing 'n_sites'".into()))?;
        Self::new(Family::from_params(&family, &params)?, n_sites)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .to_record()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct FlatRecord {
    family: String,
    #[serde(flatten)]
    params: BTreeMap<String, f64>,
    n_sites: usize,
}

impl TryFrom<FlatRecord> for ModelSpec {
    type Error = Error;

    fn try_from(rec: FlatRecord) -> Result<Self> {
        ModelSpec::new(Family::from_params(&rec.family, &rec.params)?, rec.n_sites)
    }
}

impl From<ModelSpec> for FlatRecord {
    fn from(spec: ModelSpec) -> Self {
        FlatRecord {
            family: spec.family.name().to_string(),
            params: spec
                .family
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            n_sites: spec.n_sites,
        }
    }
}

/// Computational basis state of an `N`-site chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(value: usize, n_sites: usize) -> Result<Self> {
        if n_sites >= usize::BITS as usize || value >> n_sites != 0 {
            return Err(Error::Config(format!(
                "basis index {value} out of range for {n_sites} sites"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> usize {
        self.0
    }

    /// Whether site `i` is spin down.
    pub fn is_down(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }
}

/// Matrix-free Hamiltonian for one [`ModelSpec`].
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    spec: ModelSpec,
    couplings: Couplings,
    bond_masks: Vec<usize>,
}

impl Hamiltonian {
    pub fn new(spec: &ModelSpec) -> Self {
        let n = spec.n_sites;
        let bond_masks = (0..n).map(|i| (1usize << i) | (1usize << ((i + 1) % n))).collect();
        Self {
            spec: *spec,
            couplings: spec.family.couplings(),
            bond_masks,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `H[b][b]`: field term plus zz couplings.
    #[inline]
    fn diagonal(&self, b: usize) -> f64 {
        let n = self.spec.n_sites;
        let mut d = 0.0;
        if self.couplings.z != 0.0 {
            let sz = n as f64 - 2.0 * b.count_ones() as f64;
            d += self.couplings.z * sz;
        }
        if self.couplings.zz != 0.0 {
            let full = (1usize << n) - 1;
            let rotated = ((b >> 1) | (b << (n - 1))) & full;
            let anti = (b ^ rotated).count_ones() as f64;
            d += self.couplings.zz * (n as f64 - 2.0 * anti);
        }
        d
    }

    /// Amplitude of flipping both spins of a bond; depends only on alignment,
    /// which the flip preserves, so `H` is symmetric.
    #[inline]
    fn flip_amplitude(&self, b: usize, mask: usize) -> f64 {
        let aligned = (b & mask).count_ones() != 1;
        if aligned {
            self.couplings.xx - self.couplings.yy
        } else {
            self.couplings.xx + self.couplings.yy
        }
    }

    /// Nonzero entries of column `b`: the diagonal first, then one entry per
    /// bond in site order.
    pub fn element_action(&self, b: BasisIndex) -> Result<Vec<(BasisIndex, f64)>> {
        let b = b.value();
        if b >= self.dim() {
            return Err(Error::Config(format!(
                "basis index {b} out of range for {} sites",
                self.spec.n_sites
            )));
        }
        let mut out = Vec::with_capacity(self.bond_masks.len() + 1);
        let d = self.diagonal(b);
        if d != 0.0 {
            out.push((BasisIndex(b), d));
        }
        for &mask in &self.bond_masks {
            let amp = self.flip_amplitude(b, mask);
            if amp != 0.0 {
                out.push((BasisIndex(b ^ mask), amp));
            }
        }
        Ok(out)
    }

    #[inline]
    fn row_dot(&self, b: usize, v: &[f64]) -> f64 {
        let mut acc = self.diagonal(b) * v[b];
        for &mask in &self.bond_masks {
            let amp = self.flip_amplitude(b, mask);
            if amp != 0.0 {
                acc += amp * v[b ^ mask];
            }
        }
        acc
    }

    /// `out = H v`. Each output entry is computed independently in a fixed
    /// order, so the result does not depend on the thread count.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.dim();
        if v.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: v.len(),
            });
        }
        if out.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: out.len(),
            });
        }
        if dim <= PAR_CHUNK {
            for (b, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(b, v);
            }
        } else {
            out.par_chunks_mut(PAR_CHUNK)
                .enumerate()
                .for_each(|(chunk, slice)| {
                    let base = chunk * PAR_CHUNK;
                    for (offset, o) in slice.iter_mut().enumerate() {
                        *o = self.row_dot(base + offset, v);
                    }
                });
        }
        Ok(())
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn to_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > cap {
            return Err(Error::Capacity { dim, cap });
        }
        let mut h = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            for (row, amp) in self.element_action(BasisIndex(b))? {
                h[(row.value(), b)] += amp;
            }
        }
        Ok(h)
    }
}

pub fn hamiltonian_element_action(spec: &ModelSpec, b: BasisIndex) -> Result<Vec<(BasisIndex, f64)>> {
    Hamiltonian::new(spec).element_action(b)
}

pub fn apply_hamiltonian(spec: &ModelSpec, v: &[f64]) -> Result<Vec<f64>> {
    Hamiltonian::new(spec).apply(v)
}

pub fn build_dense_hamiltonian(spec: &ModelSpec) -> Result<DMatrix<f64>> {
    Hamiltonian::new(spec).to_dense(DEFAULT_DENSE_CAP)
}

pub fn build_dense_hamiltonian_with_cap(spec: &ModelSpec, cap: usize) -> Result<DMatrix<f64>> {
    Hamiltonian::new(spec).to_dense(cap)
}
