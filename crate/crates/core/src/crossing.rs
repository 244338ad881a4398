//! Crossings between Rényi curves, pairwise crossing matrices over a
//! parameter grid, and extraction of the critical bracket from them.
//!
//! Two patterns locate a transition. In case I one phase's ground states all
//! cross each other while the other phase's do not; the boundary is where
//! crossings between neighbouring grid points die out. In case II no two
//! states of the same phase cross but states of different phases do; the
//! boundary is the interval straddled by every crossing pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{ground_state_with, SolverConfig};
use crate::entangle::{alpha_grid, reduced_spectrum, EntanglementSpectrum, Partition, EQUALITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// α range and resolution of a crossing search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingWindow {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub grid_step: f64,
    /// Width of the final bisection interval around each root.
    pub refine_tol: f64,
}

impl Default for CrossingWindow {
    fn default() -> Self {
        Self {
            alpha_min: 0.1,
            alpha_max: 2.3,
            grid_step: 0.05,
            refine_tol: 1e-4,
        }
    }
}

impl CrossingWindow {
    pub fn new(alpha_min: f64, alpha_max: f64, grid_step: f64, refine_tol: f64) -> Result<Self> {
        let w = Self {
            alpha_min,
            alpha_max,
            grid_step,
            refine_tol,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha_min > 0.0
            && self.alpha_max > self.alpha_min
            && self.alpha_max.is_finite()
            && self.grid_step > 0.0
            && self.refine_tol > 0.0
            && self.refine_tol <= self.grid_step;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid α window [{}, {}] with step {} and refine_tol {}",
                self.alpha_min, self.alpha_max, self.grid_step, self.refine_tol
            )))
        }
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        alpha_grid(self.alpha_min, self.alpha_max, self.grid_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingStatus {
    Crossed,
    NoCross,
    Identical,
}

/// Outcome of comparing two spectra over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub status: CrossingStatus,
    /// Refined crossing orders, ascending.
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Crossing {
    pub fn is_crossed(&self) -> bool {
        self.status == CrossingStatus::Crossed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub pair: (f64, f64),
    #[serde(flatten)]
    pub crossing: Crossing,
}

impl CrossingRecord {
    pub fn status(&self) -> CrossingStatus {
        self.crossing.status
    }
}

fn entropy_gap(a: &EntanglementSpectrum, b: &EntanglementSpectrum, alpha: f64) -> Result<f64> {
    Ok(a.renyi(alpha)? - b.renyi(alpha)?)
}

/// Roots in α of `S_α(a) − S_α(b)` inside `window`.
///
/// The difference is sampled on the window's grid; each sign change between
/// consecutive samples that exceed the equality tolerance is bisected on the
/// exact difference down to `refine_tol`. Touching without a sign change is
/// reported as `NoCross` with a note.
pub fn find_crossings(a: &EntanglementSpectrum, b: &EntanglementSpectrum, window: &CrossingWindow) -> Result<Crossing> {
    window.validate()?;
    let grid = window.grid()?;
    let diffs = grid
        .iter()
        .map(|&alpha| entropy_gap(a, b, alpha))
        .collect::<Result<Vec<_>>>()?;

    if diffs.iter().all(|d| d.abs() <= EQUALITY_TOLERANCE) {
        return Ok(Crossing {
            status: CrossingStatus::Identical,
            alphas: Vec::new(),
            note: None,
        });
    }

    let mut roots = Vec::new();
    let mut touches = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    let mut flat_since_last = None;
    for (&alpha, &d) in grid.iter().zip(&diffs) {
        if d.abs() <= EQUALITY_TOLERANCE {
            if last.is_some() && flat_since_last.is_none() {
                flat_since_last = Some(alpha);
            }
            continue;
        }
        if let Some((prev_alpha, prev_d)) = last {
            if (prev_d > 0.0) != (d > 0.0) {
                roots.push(bisect(a, b, prev_alpha, prev_d, alpha, window.refine_tol)?);
            } else if let Some(touch) = flat_since_last {
                touches.push(touch);
            }
        }
        last = Some((alpha, d));
        flat_since_last = None;
    }

    let note = (!touches.is_empty()).then(|| {
        let list: Vec<String> = touches.iter().map(|t| format!("{t:.4}")).collect();
        format!("tangency below tolerance near α = {}", list.join(", "))
    });
    Ok(Crossing {
        status: if roots.is_empty() {
            CrossingStatus::NoCross
        } else {
            CrossingStatus::Crossed
        },
        alphas: roots,
        note,
    })
}

fn bisect(
    a: &EntanglementSpectrum,
    b: &EntanglementSpectrum,
    mut lo: f64,
    d_lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let lo_positive = d_lo > 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let d = entropy_gap(a, b, mid)?;
        if d == 0.0 {
            return Ok(mid);
        }
        if (d > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Symmetric matrix of crossing records over an ascending parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingMatrix {
    pub params: Vec<f64>,
    pub records: Vec<Vec<CrossingRecord>>,
}

impl CrossingMatrix {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn record(&self, i: usize, j: usize) -> &CrossingRecord {
        &self.records[i][j]
    }

    pub fn status(&self, i: usize, j: usize) -> CrossingStatus {
        self.records[i][j].status()
    }

    pub fn crossed(&self, i: usize, j: usize) -> bool {
        self.status(i, j) == CrossingStatus::Crossed
    }

    /// Whether each neighbouring pair `(i, i+1)` crosses.
    pub fn adjacent_crossed(&self) -> Vec<bool> {
        (0..self.len().saturating_sub(1)).map(|i| self.crossed(i, i + 1)).collect()
    }

    pub fn any_crossed(&self) -> bool {
        (0..self.len()).any(|i| (i + 1..self.len()).any(|j| self.crossed(i, j)))
    }
}

fn check_grid(params: &[f64]) -> Result<()> {
    if params.is_empty() {
        return Err(Error::Usage("empty parameter grid".into()));
    }
    if params.iter().any(|p| !p.is_finite()) || params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("parameter grid must be finite, ascending and unique".into()));
    }
    Ok(())
}

/// Fills every pair from precomputed spectra.
pub fn matrix_from_spectra(
    params: &[f64],
    spectra: &[EntanglementSpectrum],
    window: &CrossingWindow,
) -> Result<CrossingMatrix> {
    check_grid(params)?;
    if params.len() != spectra.len() {
        return Err(Error::Dimension {
            expected: params.len(),
            got: spectra.len(),
        });
    }
    window.validate()?;
    let n = params.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, j)| find_crossings(&spectra[i], &spectra[j], window))
        .collect::<Result<Vec<_>>>()?;

    let identical = Crossing {
        status: CrossingStatus::Identical,
        alphas: Vec::new(),
        note: None,
    };
    let mut records: Vec<Vec<CrossingRecord>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| CrossingRecord {
                    pair: (params[i], params[j]),
                    crossing: identical.clone(),
                })
                .collect()
        })
        .collect();
    for (&(i, j), crossing) in pairs.iter().zip(upper) {
        records[j][i].crossing = crossing.clone();
        records[i][j].crossing = crossing;
    }
    Ok(CrossingMatrix {
        params: params.to_vec(),
        records,
    })
}

/// A one-parameter family of ground states to scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSetup {
    /// Family, fixed parameters and chain length; the swept parameter's value
    /// here is ignored.
    pub base: ModelSpec,
    pub param: String,
    pub partition: Partition,
    pub window: CrossingWindow,
    pub solver: SolverConfig,
}

impl ScanSetup {
    /// Equal bipartition, default window and solver.
    pub fn new(base: ModelSpec, param: &str) -> Result<Self> {
        base.with_param(param, 0.0)?;
        Ok(Self {
            base,
            param: param.to_string(),
            partition: Partition::equal(base.n_sites())?,
            window: CrossingWindow::default(),
            solver: SolverConfig::default(),
        })
    }

    pub fn with_window(mut self, window: CrossingWindow) -> Self {
        self.window = window;
        self
    }

    pub fn with_sites(&self, n_sites: usize) -> Result<Self> {
        let block = if 2 * self.partition.block_a_size() == self.partition.n_sites() {
            n_sites / 2
        } else {
            self.partition.block_a_size()
        };
        Ok(Self {
            base: self.base.with_sites(n_sites)?,
            partition: if block * 2 == n_sites {
                Partition::equal(n_sites)?
            } else {
                Partition::new(n_sites, block)?
            },
            ..self.clone()
        })
    }

    pub fn model_at(&self, value: f64) -> Result<ModelSpec> {
        self.base.with_param(&self.param, value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.partition.n_sites() != self.base.n_sites() {
            return Err(Error::Config(format!(
                "partition is for {} sites but the model has {}",
                self.partition.n_sites(),
                self.base.n_sites()
            )));
        }
        self.window.validate()?;
        self.model_at(0.0).map(|_| ())
    }

    /// Ground-state spectrum at one parameter value.
    pub fn spectrum_at(&self, value: f64) -> Result<EntanglementSpectrum> {
        let run = || -> Result<EntanglementSpectrum> {
            let gs = ground_state_with(&self.model_at(value)?, &self.solver)?;
            reduced_spectrum(&gs.state, &self.partition)
        };
        run().map_err(|e| e.at_parameter(value))
    }

    /// Ground-state spectra over `grid`, computed in parallel.
    pub fn spectra(&self, grid: &[f64]) -> Result<Vec<EntanglementSpectrum>> {
        self.validate()?;
        grid.par_iter().map(|&p| self.spectrum_at(p)).collect()
    }
}

/// Solves each grid point's ground state once and compares all pairs.
pub fn crossing_matrix(setup: &ScanSetup, grid: &[f64]) -> Result<CrossingMatrix> {
    check_grid(grid)?;
    let spectra = setup.spectra(grid)?;
    matrix_from_spectra(grid, &spectra, &setup.window)
}

/// Which side of the transition carries the mutually crossing phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pattern {
    /// Ground states cross within one phase only.
    CaseI(Side),
    /// Ground states cross only across phases.
    CaseII,
    Indeterminate,
}

struct RegionStats {
    left_states: usize,
    right_states: usize,
    left_cells: (usize, usize),
    right_cells: (usize, usize),
    /// States with at least one crossing into the other region.
    left_covered: usize,
    right_covered: usize,
}

impl RegionStats {
    fn new(m: &CrossingMatrix, split: f64) -> Self {
        let left: Vec<usize> = (0..m.len()).filter(|&i| m.params[i] < split).collect();
        let right: Vec<usize> = (0..m.len()).filter(|&i| m.params[i] > split).collect();
        let within = |idx: &[usize]| {
            let mut crossed = 0;
            let mut total = 0;
            for (k, &i) in idx.iter().enumerate() {
                for &j in &idx[k + 1..] {
                    total += 1;
                    crossed += m.crossed(i, j) as usize;
                }
            }
            (crossed, total)
        };
        let covered = |from: &[usize], to: &[usize]| {
            from.iter()
                .filter(|&&i| to.iter().any(|&j| m.crossed(i, j)))
                .count()
        };
        Self {
            left_states: left.len(),
            right_states: right.len(),
            left_cells: within(&left),
            right_cells: within(&right),
            left_covered: covered(&left, &right),
            right_covered: covered(&right, &left),
        }
    }

    /// Pattern and a coherence score in [0, 1].
    fn classify(&self) -> (Pattern, f64) {
        if self.left_states < 2 || self.right_states < 2 {
            return (Pattern::Indeterminate, 0.0);
        }
        let frac = |(crossed, total): (usize, usize)| crossed as f64 / total as f64;
        let majority = |(crossed, total): (usize, usize)| 2 * crossed > total;
        let minority = |(crossed, total): (usize, usize)| 2 * (total - crossed) > total;
        let (l, r) = (self.left_cells, self.right_cells);
        if majority(l) && minority(r) {
            return (Pattern::CaseI(Side::Below), 0.5 * (frac(l) + 1.0 - frac(r)));
        }
        if majority(r) && minority(l) {
            return (Pattern::CaseI(Side::Above), 0.5 * (frac(r) + 1.0 - frac(l)));
        }
        let left_cov = self.left_covered as f64 / self.left_states as f64;
        let right_cov = self.right_covered as f64 / self.right_states as f64;
        if minority(l) && minority(r) && left_cov > 0.5 && right_cov > 0.5 {
            let score = 0.25 * ((1.0 - frac(l)) + (1.0 - frac(r)) + left_cov + right_cov);
            return (Pattern::CaseII, score);
        }
        (Pattern::Indeterminate, 0.0)
    }
}

/// Classifies the matrix with regions `p < split` and `p > split`.
///
/// Case I needs a strict majority of within-region pairs crossed on one side
/// and not crossed on the other. Case II needs both sides mostly non-crossing
/// while a strict majority of each side's states cross some state of the
/// other side. Each side needs at least two grid points.
pub fn classify_pattern(m: &CrossingMatrix, split: f64) -> Pattern {
    RegionStats::new(m, split).classify().0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BracketRule {
    CaseI,
    CaseII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBracket {
    pub lo: f64,
    pub hi: f64,
    pub rule: BracketRule,
    /// Side of the crossing phase for case I.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing_side: Option<Side>,
    /// Region split the pattern was classified with.
    pub split: f64,
    pub confidence_note: String,
}

impl CriticalBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Non-indeterminate patterns over all candidate splits (grid points and
/// midpoints between neighbours), most coherent first; ties keep the lower
/// split first.
pub fn ranked_patterns(m: &CrossingMatrix) -> Vec<(Pattern, f64, f64)> {
    let p = &m.params;
    let mut candidates: Vec<f64> = Vec::with_capacity(2 * p.len());
    for i in 0..p.len() {
        candidates.push(p[i]);
        if i + 1 < p.len() {
            candidates.push(0.5 * (p[i] + p[i + 1]));
        }
    }
    let mut ranked: Vec<(Pattern, f64, f64)> = candidates
        .into_iter()
        .filter_map(|split| {
            let (pattern, score) = RegionStats::new(m, split).classify();
            (pattern != Pattern::Indeterminate).then_some((pattern, split, score))
        })
        .collect();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2));
    ranked
}

/// The most coherent pattern, or `Indeterminate` with a NaN split.
pub fn best_pattern(m: &CrossingMatrix) -> (Pattern, f64, f64) {
    ranked_patterns(m)
        .into_iter()
        .next()
        .unwrap_or((Pattern::Indeterminate, f64::NAN, 0.0))
}

/// Extracts the critical interval from a crossing matrix.
///
/// Case I with the crossing phase below: `lo` is the last grid point that
/// crosses its upper neighbour, `hi` the first point above `lo` that does not
/// cross its lower neighbour. The mirrored rule applies when the crossing
/// phase lies above. Case II: the intersection of `[p_i, p_j]` over all
/// crossing pairs.
pub fn critical_bracket(m: &CrossingMatrix) -> Result<CriticalBracket> {
    if !m.any_crossed() {
        return Err(Error::NoSignal(format!(
            "no pair crosses on the grid [{}, {}]",
            m.params.first().copied().unwrap_or(f64::NAN),
            m.params.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let adjacent = m.adjacent_crossed();
    let pattern_str: String = adjacent.iter().map(|&c| if c { 'c' } else { '.' }).collect();
    // A classification whose interval comes out inconsistent is passed over
    // for the next most coherent one.
    let mut first_err = None;
    for (pattern, split, score) in ranked_patterns(m) {
        match bracket_for(m, &adjacent, &pattern_str, pattern, split, score) {
            Ok(b) => return Ok(b),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| {
        Error::Indeterminate(format!(
            "no split yields a case I or case II pattern (neighbour crossings: {pattern_str})"
        ))
    }))
}

fn bracket_for(
    m: &CrossingMatrix,
    adjacent: &[bool],
    pattern_str: &str,
    pattern: Pattern,
    split: f64,
    score: f64,
) -> Result<CriticalBracket> {
    let p = &m.params;
    match pattern {
        Pattern::Indeterminate => unreachable!("ranked patterns exclude indeterminate"),
        Pattern::CaseI(side) => {
            let (lo_idx, hi_idx) = match side {
                Side::Below => {
                    let last = adjacent.iter().rposition(|&c| c).ok_or_else(|| {
                        Error::Indeterminate(format!("no neighbouring pair crosses ({pattern_str})"))
                    })?;
                    let stop = (last + 1..adjacent.len()).find(|&j| !adjacent[j]).ok_or_else(|| {
                        Error::Indeterminate(format!(
                            "neighbour crossings reach the upper end of the grid ({pattern_str})"
                        ))
                    })?;
                    (last, stop + 1)
                }
                Side::Above => {
                    let first = adjacent.iter().position(|&c| c).ok_or_else(|| {
                        Error::Indeterminate(format!("no neighbouring pair crosses ({pattern_str})"))
                    })?;
                    let stop = (0..first).rev().find(|&j| !adjacent[j]).ok_or_else(|| {
                        Error::Indeterminate(format!(
                            "neighbour crossings reach the lower end of the grid ({pattern_str})"
                        ))
                    })?;
                    (stop, first + 1)
                }
            };
            let (inside, outside) = match side {
                Side::Below => (&adjacent[..lo_idx], &adjacent[hi_idx..]),
                Side::Above => (&adjacent[hi_idx.min(adjacent.len())..], &adjacent[..lo_idx]),
            };
            let contiguous = inside.iter().all(|&c| c) && outside.iter().all(|&c| !c);
            let mut note = format!("case I, coherence {score:.3} at split {split}; neighbour crossings {pattern_str}");
            if !contiguous {
                note.push_str("; non-contiguous neighbour crossings");
            }
            Ok(CriticalBracket {
                lo: p[lo_idx],
                hi: p[hi_idx],
                rule: BracketRule::CaseI,
                crossing_side: Some(side),
                split,
                confidence_note: note,
            })
        }
        Pattern::CaseII => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            let mut count = 0;
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    if m.crossed(i, j) {
                        lo = lo.max(p[i]);
                        hi = hi.min(p[j]);
                        count += 1;
                    }
                }
            }
            if lo > hi {
                return Err(Error::Indeterminate(format!(
                    "case II crossing intervals do not overlap (max lower end {lo} > min upper end {hi})"
                )));
            }
            if split < lo || split > hi {
                return Err(Error::Indeterminate(format!(
                    "case II split {split} lies outside the crossing intersection [{lo}, {hi}]"
                )));
            }
            Ok(CriticalBracket {
                lo,
                hi,
                rule: BracketRule::CaseII,
                crossing_side: None,
                split,
                confidence_note: format!(
                    "case II, coherence {score:.3} at split {split}; intersection of {count} crossing pairs"
                ),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: &[f64]) -> EntanglementSpectrum {
        EntanglementSpectrum::new(p.to_vec()).unwrap()
    }

    /// Builds a matrix directly from a list of crossed index pairs.
    fn synthetic(params: &[f64], crossed: &[(usize, usize)]) -> CrossingMatrix {
        let n = params.len();
        let records = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let hit = crossed.contains(&(i.min(j), i.max(j)));
                        CrossingRecord {
                            pair: (params[i], params[j]),
                            crossing: Crossing {
                                status: if i == j {
                                    CrossingStatus::Identical
                                } else if hit {
                                    CrossingStatus::Crossed
                                } else {
                                    CrossingStatus::NoCross
                                },
                                alphas: if hit { vec![0.5] } else { vec![] },
                                note: None,
                            },
                        }
                    })
                    .collect()
            })
            .collect();
        CrossingMatrix {
            params: params.to_vec(),
            records,
        }
    }

    fn grid(start: f64, step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
    }

    /// Reference Ising table, g = 0.94 .. 1.04: pair (i, j) crosses iff i + j ≤ 9.
    fn ising_table() -> CrossingMatrix {
        let mut crossed = Vec::new();
        for i in 0..11 {
            for j in i + 1..11 {
                if i + j <= 9 {
                    crossed.push((i, j));
                }
            }
        }
        synthetic(&grid(0.94, 0.01, 11), &crossed)
    }

    /// Reference XXZ table, Δ = 0.4 .. 1.6.
    fn xxz_table() -> CrossingMatrix {
        let crossed = [
            (0, 10), (0, 11), (0, 12), (1, 10), (1, 11), (2, 9), (2, 10),
            (3, 9), (4, 8), (5, 7),
        ];
        synthetic(&grid(0.4, 0.1, 13), &crossed)
    }

    #[test]
    fn identical_spectra() {
        let s = spec(&[0.6, 0.3, 0.1]);
        let c = find_crossings(&s, &s, &CrossingWindow::default()).unwrap();
        assert_eq!(c.status, CrossingStatus::Identical);
        assert!(c.alphas.is_empty());
    }

    #[test]
    fn incomparable_pair_crosses_once() {
        let a = spec(&[0.55, 0.15, 0.15, 0.15]);
        let b = spec(&[0.50, 0.25, 0.24, 0.01]);
        let w = CrossingWindow::default();
        let c = find_crossings(&a, &b, &w).unwrap();
        assert_eq!(c.status, CrossingStatus::Crossed);
        assert_eq!(c.alphas.len(), 1);
        let root = c.alphas[0];
        let f = |x: f64| a.renyi(x).unwrap() - b.renyi(x).unwrap();
        assert!(f(root - w.refine_tol).signum() != f(root + w.refine_tol).signum());
        let mirrored = find_crossings(&b, &a, &w).unwrap();
        assert_eq!(mirrored.alphas, c.alphas);
    }

    #[test]
    fn dominated_pair_does_not_cross() {
        let c = find_crossings(&spec(&[0.5, 0.5]), &spec(&[0.7, 0.3]), &CrossingWindow::default()).unwrap();
        assert_eq!(c.status, CrossingStatus::NoCross);
        assert!(c.note.is_none());
    }

    #[test]
    fn window_validation() {
        assert!(CrossingWindow::new(0.0, 2.0, 0.1, 1e-4).is_err());
        assert!(CrossingWindow::new(0.5, 0.4, 0.1, 1e-4).is_err());
        assert!(CrossingWindow::new(0.1, 2.0, 0.01, 0.1).is_err());
        assert!(CrossingWindow::new(0.1, 2.0, 0.05, 1e-4).is_ok());
    }

    #[test]
    fn classify_reference_tables() {
        assert_eq!(classify_pattern(&ising_table(), 0.99), Pattern::CaseI(Side::Below));
        assert_eq!(classify_pattern(&xxz_table(), 1.0), Pattern::CaseII);
        let empty = synthetic(&grid(0.0, 0.1, 8), &[]);
        assert_eq!(classify_pattern(&empty, 0.35), Pattern::Indeterminate);
    }

    #[test]
    fn brackets_of_reference_tables() {
        let b = critical_bracket(&ising_table()).unwrap();
        assert_eq!((b.lo, b.hi, b.rule), (0.98, 1.0, BracketRule::CaseI));
        assert_eq!(b.crossing_side, Some(Side::Below));

        let b = critical_bracket(&xxz_table()).unwrap();
        assert_eq!((b.lo, b.hi, b.rule), (0.9, 1.1, BracketRule::CaseII));
    }

    #[test]
    fn mirrored_case_one() {
        // crossing phase above: reference XY table for h = 0.7 .. 1.3
        let crossed = [
            (0, 5), (0, 6), (1, 5), (1, 6), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5), (3, 6),
            (4, 5), (4, 6), (5, 6),
        ];
        let m = synthetic(&grid(0.7, 0.1, 7), &crossed);
        assert_eq!(classify_pattern(&m, 1.0), Pattern::CaseI(Side::Above));
        let b = critical_bracket(&m).unwrap();
        assert_eq!((b.lo, b.hi), (0.9, 1.1));
        assert_eq!(b.crossing_side, Some(Side::Above));
    }

    #[test]
    fn inconsistent_case_two_falls_back() {
        // nearly unentangled states at small g never cross each other, which
        // scores a case II split at 0.8 whose crossing intervals are disjoint
        let mut crossed: Vec<(usize, usize)> = Vec::new();
        crossed.extend((3..=10).flat_map(|j| [(0, j), (1, j)]));
        crossed.extend((3..=8).map(|j| (2, j)));
        crossed.extend((4..=7).map(|j| (3, j)));
        crossed.extend([(4, 5), (4, 6)]);
        let m = synthetic(&grid(0.5, 0.1, 11), &crossed);
        assert_eq!(best_pattern(&m).0, Pattern::CaseII);
        let b = critical_bracket(&m).unwrap();
        assert_eq!((b.lo, b.hi, b.rule), (0.9, 1.1, BracketRule::CaseI));
    }

    #[test]
    fn bracket_errors() {
        let empty = synthetic(&grid(0.0, 0.1, 6), &[]);
        assert!(matches!(critical_bracket(&empty), Err(Error::NoSignal(_))));
        // every pair crosses: no region without crossings
        let all: Vec<(usize, usize)> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).collect();
        let full = synthetic(&grid(0.0, 0.1, 6), &all);
        assert!(matches!(critical_bracket(&full), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn matrix_is_symmetric_with_identical_diagonal() {
        let spectra = vec![
            spec(&[0.55, 0.15, 0.15, 0.15]),
            spec(&[0.50, 0.25, 0.24, 0.01]),
            spec(&[0.7, 0.3]),
        ];
        let m = matrix_from_spectra(&[1.0, 2.0, 3.0], &spectra, &CrossingWindow::default()).unwrap();
        for i in 0..3 {
            assert_eq!(m.status(i, i), CrossingStatus::Identical);
            for j in 0..3 {
                assert_eq!(m.record(i, j).crossing, m.record(j, i).crossing);
                assert_eq!(m.record(i, j).pair, (m.params[i], m.params[j]));
            }
        }
        assert!(m.crossed(0, 1));
        assert!(matrix_from_spectra(&[2.0, 1.0, 3.0], &spectra, &CrossingWindow::default()).is_err());
    }
}
