//! Parameter sweeps with nested bracket refinement, finite-size scaling of
//! the bracket midpoint, derivative curves of `S_α`, and the comparison of
//! ground and first excited states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::{critical_bracket, crossing_matrix, find_crossings, CriticalBracket, CrossingMatrix, CrossingRecord, ScanSetup};
use crate::eigensolve::{lowest_eigenpairs_with, DEGENERACY_TOLERANCE};
use crate::entangle::reduced_spectrum;
use crate::error::{Error, Result};
use crate::model::MAX_SITES;

pub const MAX_REFINE_LEVELS: usize = 4;

/// Sizes and refinement depth used when none are given.
pub const DEFAULT_FSS_SIZES: [usize; 4] = [6, 8, 10, 12];
pub const DEFAULT_FSS_DEPTH: usize = 2;

/// Parameter values are snapped to this resolution so that refined grids
/// hit the same points as coarse ones.
const GRID_RESOLUTION: f64 = 1e12;

fn snap(x: f64) -> f64 {
    (x * GRID_RESOLUTION).round() / GRID_RESOLUTION
}

/// `start, start + step, …, stop`; `stop − start` must be close to a whole
/// number of steps.
pub fn param_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!(
            "invalid parameter range {start}..{stop} with step {step}"
        )));
    }
    let steps = (stop - start) / step;
    let n = steps.round();
    if (steps - n).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "range {start}..{stop} is not a whole number of steps of {step}"
        )));
    }
    Ok((0..=n as usize).map(|i| snap(start + i as f64 * step)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub setup: ScanSetup,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Each level divides the step by ten and rescans the widened bracket.
    pub refine_levels: usize,
}

impl SweepConfig {
    pub fn new(setup: ScanSetup, start: f64, stop: f64, step: f64) -> Result<Self> {
        let cfg = Self {
            setup,
            start,
            stop,
            step,
            refine_levels: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_refine_levels(mut self, levels: usize) -> Result<Self> {
        self.refine_levels = levels;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.refine_levels > MAX_REFINE_LEVELS {
            return Err(Error::Config(format!(
                "at most {MAX_REFINE_LEVELS} refinement levels, got {}",
                self.refine_levels
            )));
        }
        param_grid(self.start, self.stop, self.step)?;
        self.setup.validate()
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        param_grid(self.start, self.stop, self.step)
    }
}

/// One scan of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub level: usize,
    pub step: f64,
    pub matrix: CrossingMatrix,
    pub bracket: CriticalBracket,
}

/// Compact per-level summary for the bracket history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketHistoryEntry {
    pub level: usize,
    pub step: f64,
    pub grid_start: f64,
    pub grid_stop: f64,
    pub bracket: CriticalBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub levels: Vec<SweepLevel>,
}

impl SweepOutcome {
    fn last(&self) -> &SweepLevel {
        self.levels.last().expect("a sweep has at least one level")
    }

    /// The finest level's matrix.
    pub fn matrix(&self) -> &CrossingMatrix {
        &self.last().matrix
    }

    /// The finest level's bracket.
    pub fn bracket(&self) -> &CriticalBracket {
        &self.last().bracket
    }

    pub fn history(&self) -> Vec<BracketHistoryEntry> {
        self.levels
            .iter()
            .map(|l| BracketHistoryEntry {
                level: l.level,
                step: l.step,
                grid_start: l.matrix.params[0],
                grid_stop: *l.matrix.params.last().unwrap(),
                bracket: l.bracket.clone(),
            })
            .collect()
    }
}

/// Scans the base grid, then refines: each level covers
/// `[lo − step, hi + step]` of the previous bracket at a tenth of its step.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let mut grid = cfg.grid()?;
    let mut step = cfg.step;
    let mut levels = Vec::with_capacity(cfg.refine_levels + 1);
    for level in 0..=cfg.refine_levels {
        let matrix = crossing_matrix(&cfg.setup, &grid)?;
        let bracket = critical_bracket(&matrix)?;
        let (lo, hi) = (bracket.lo - step, bracket.hi + step);
        levels.push(SweepLevel {
            level,
            step,
            matrix,
            bracket,
        });
        if level < cfg.refine_levels {
            step /= 10.0;
            grid = param_grid(snap(lo), snap(hi), step)?;
        }
    }
    Ok(SweepOutcome { levels })
}

/// Derivative of each sampled quantity along the parameter grid.
///
/// Central differences inside, one-sided at the ends. The grid must be
/// uniform with at least three points.
pub fn finite_difference(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Usage(format!("derivative needs at least 3 grid points, got {n}")));
    }
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if !(h > 0.0) || xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::Usage("derivative needs a uniform ascending grid".into()));
    }
    Ok((0..n)
        .map(|i| match i {
            0 => (ys[1] - ys[0]) / (xs[1] - xs[0]),
            i if i == n - 1 => (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]),
            _ => (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1]),
        })
        .collect())
}

/// `S_α` and `dS_α/dp` on a parameter grid; rows are indexed
/// `[alpha][param]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTable {
    pub params: Vec<f64>,
    pub alphas: Vec<f64>,
    pub entropies: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
}

pub fn derivative_curve(setup: &ScanSetup, grid: &[f64], alphas: &[f64]) -> Result<DerivativeTable> {
    if grid.len() < 3 {
        return Err(Error::Usage(format!(
            "derivative needs at least 3 grid points, got {}",
            grid.len()
        )));
    }
    if alphas.is_empty() {
        return Err(Error::Usage("no α values requested".into()));
    }
    let spectra = setup.spectra(grid)?;
    let mut entropies = Vec::with_capacity(alphas.len());
    let mut derivatives = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let s = spectra.iter().map(|sp| sp.renyi(alpha)).collect::<Result<Vec<_>>>()?;
        derivatives.push(finite_difference(grid, &s)?);
        entropies.push(s);
    }
    Ok(DerivativeTable {
        params: grid.to_vec(),
        alphas: alphas.to_vec(),
        entropies,
        derivatives,
    })
}

/// Least-squares `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared deviations.
    pub residual: f64,
}

/// Fits `midpoint = c + b/N`.
pub fn fit_inverse_size(sizes: &[usize], midpoints: &[f64]) -> Result<LinearFit> {
    if sizes.len() != midpoints.len() {
        return Err(Error::Dimension {
            expected: sizes.len(),
            got: midpoints.len(),
        });
    }
    if sizes.len() < 2 {
        return Err(Error::Usage("a linear fit needs at least two sizes".into()));
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = midpoints.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(midpoints).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Usage("sizes must not all be equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(midpoints)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FssResult {
    pub sizes: Vec<usize>,
    pub brackets: Vec<CriticalBracket>,
    pub midpoints: Vec<f64>,
    pub extrapolated: f64,
    pub fit: LinearFit,
}

/// Runs `template` at every size and extrapolates the bracket midpoints to
/// `1/N → 0`. The template's chain length is replaced per size.
pub fn finite_size_scaling(template: &SweepConfig, sizes: &[usize]) -> Result<FssResult> {
    if sizes.len() < 3 {
        return Err(Error::Usage(format!(
            "finite-size scaling needs at least 3 sizes, got {}",
            sizes.len()
        )));
    }
    if sizes.iter().any(|&n| n % 2 != 0 || n < 4 || n > MAX_SITES) || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage(format!(
            "sizes must be even, strictly ascending and within [4, {MAX_SITES}], got {sizes:?}"
        )));
    }
    template.validate()?;
    let brackets = sizes
        .par_iter()
        .map(|&n| {
            let cfg = SweepConfig {
                setup: template.setup.with_sites(n)?,
                ..template.clone()
            };
            Ok(sweep(&cfg)?.bracket().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let midpoints: Vec<f64> = brackets.iter().map(CriticalBracket::midpoint).collect();
    let fit = fit_inverse_size(sizes, &midpoints)?;
    Ok(FssResult {
        sizes: sizes.to_vec(),
        brackets,
        midpoints,
        extrapolated: fit.intercept,
        fit,
    })
}

/// Ground versus first excited state at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitedRecord {
    pub param: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub record: CrossingRecord,
}

pub fn excited_state_comparison(setup: &ScanSetup, grid: &[f64]) -> Result<Vec<ExcitedRecord>> {
    setup.validate()?;
    if grid.is_empty() {
        return Err(Error::Usage("empty parameter grid".into()));
    }
    grid.par_iter()
        .map(|&p| {
            let run = || -> Result<ExcitedRecord> {
                let slice = lowest_eigenpairs_with(&setup.model_at(p)?, 2, &setup.solver)?;
                let ground = reduced_spectrum(&slice.pairs[0].state, &setup.partition)?;
                let excited = reduced_spectrum(&slice.pairs[1].state, &setup.partition)?;
                let mut crossing = find_crossings(&ground, &excited, &setup.window)?;
                let gap = slice.pairs[1].energy - slice.pairs[0].energy;
                let degenerate = gap < DEGENERACY_TOLERANCE * slice.pairs[0].energy.abs().max(1.0);
                if degenerate {
                    let msg = format!(
                        "levels degenerate within {gap:.3e}; the pair is basis-dependent and so is its crossing status"
                    );
                    crossing.note = Some(match crossing.note.take() {
                        Some(n) => format!("{n}; {msg}"),
                        None => msg,
                    });
                }
                Ok(ExcitedRecord {
                    param: p,
                    gap,
                    degenerate,
                    record: CrossingRecord {
                        pair: (p, p),
                        crossing,
                    },
                })
            };
            run().map_err(|e| e.at_parameter(p))
        })
        .collect()
}
