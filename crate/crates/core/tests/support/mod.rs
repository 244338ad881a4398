//! Generators and property checks shared by the property suite and the
//! acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ere_core::crossing::{find_crossings, CrossingStatus, CrossingWindow, ScanSetup};
use ere_core::eigensolve::StateVector;
use ere_core::entangle::{
    block_b_spectrum, majorizes, reduced_spectrum, renyi_dominance, Dominance, EntanglementSpectrum, Partition,
};
use ere_core::model::ModelSpec;
use ere_core::scan::{sweep, SweepConfig};
use ere_core::Error;

/// Random state of `n` sites; `skew` concentrates weight on few amplitudes
/// so low-entanglement states show up too.
pub fn random_state(seed: u64, n: usize, skew: f64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..1usize << n)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * 2.0 - 1.0;
            x * (-skew * rng.random::<f64>() * 12.0).exp()
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    StateVector::from_amplitudes(v).unwrap()
}

pub fn random_spectrum(seed: u64, len: usize, sharpness: f64) -> EntanglementSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..len).map(|_| rng.random::<f64>().powf(sharpness) + 1e-6).collect();
    let total: f64 = w.iter().sum();
    EntanglementSpectrum::new(w.iter().map(|x| x / total).collect()).unwrap()
}

pub fn spectrum_strategy() -> impl Strategy<Value = EntanglementSpectrum> {
    (any::<u64>(), 1usize..=32, 0.5f64..8.0).prop_map(|(s, len, k)| random_spectrum(s, len, k))
}

pub fn state_strategy(sites: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (StateVector, usize)> {
    (any::<u64>(), sites, 0.0f64..1.5)
        .prop_flat_map(|(s, n, skew)| (Just(random_state(s, n, skew)), 1..n))
}

/// A pair `(ψ, φ)` with `ψ ≺ φ`: ψ is φ after a chain of T-transforms
/// (partial averaging of two entries).
pub fn majorized_pair_strategy() -> impl Strategy<Value = (EntanglementSpectrum, EntanglementSpectrum)> {
    (spectrum_strategy(), any::<u64>(), 0usize..6).prop_map(|(phi, seed, steps)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = phi.probs().to_vec();
        p.resize(p.len().max(2), 0.0);
        for _ in 0..steps {
            let i = rng.random_range(0..p.len());
            let j = rng.random_range(0..p.len());
            let t: f64 = rng.random();
            let (a, b) = (p[i], p[j]);
            p[i] = t * a + (1.0 - t) * b;
            p[j] = (1.0 - t) * a + t * b;
        }
        (EntanglementSpectrum::new(p).unwrap(), phi)
    })
}

pub fn alpha_probe() -> Vec<f64> {
    let mut a: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64).collect();
    a.extend([0.999_999_999_5, 1.000_000_000_5, 5.0, 20.0, 100.0]);
    a.sort_by(f64::total_cmp);
    a
}

pub fn check_monotone(spec: &EntanglementSpectrum) -> Result<(), TestCaseError> {
    let alphas = alpha_probe();
    let s: Vec<f64> = alphas.iter().map(|&a| spec.renyi(a).unwrap()).collect();
    for (w, a) in s.windows(2).zip(alphas.windows(2)) {
        prop_assert!(w[1] <= w[0] + 1e-12, "S({}) = {} > S({}) = {}", a[1], w[1], a[0], w[0]);
    }
    Ok(())
}

pub fn check_schmidt_symmetry(state: &StateVector, block: usize) -> Result<(), TestCaseError> {
    let part = Partition::new(state.n_sites(), block).unwrap();
    let a = reduced_spectrum(state, &part).unwrap();
    let b = block_b_spectrum(state, &part).unwrap();
    let len = a.rank().max(b.rank());
    for i in 0..len {
        let x = a.probs().get(i).copied().unwrap_or(0.0);
        let y = b.probs().get(i).copied().unwrap_or(0.0);
        prop_assert!((x - y).abs() <= 1e-10, "λ_{i}: {x} vs {y}");
    }
    Ok(())
}

pub fn check_bounds(state: &StateVector, block: usize) -> Result<(), TestCaseError> {
    let part = Partition::new(state.n_sites(), block).unwrap();
    let spec = reduced_spectrum(state, &part).unwrap();
    let max = part.max_entropy_bits();
    for a in alpha_probe() {
        let s = spec.renyi(a).unwrap();
        prop_assert!((0.0..=max + 1e-12).contains(&s), "S_{a} = {s} outside [0, {max}]");
    }
    Ok(())
}

pub fn check_local_flip(state: &StateVector, block: usize, site: usize) -> Result<(), TestCaseError> {
    let n = state.n_sites();
    let part = Partition::new(n, block).unwrap();
    let amps = state.amplitudes();
    let flipped: Vec<f64> = (0..amps.len()).map(|b| amps[b ^ (1 << (site % n))]).collect();
    let a = reduced_spectrum(state, &part).unwrap();
    let b = reduced_spectrum(&StateVector::from_amplitudes(flipped).unwrap(), &part).unwrap();
    prop_assert_eq!(a.rank(), b.rank());
    for (x, y) in a.probs().iter().zip(b.probs()) {
        prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
    }
    Ok(())
}

pub fn check_majorization_dominance(psi: &EntanglementSpectrum, phi: &EntanglementSpectrum) -> Result<(), TestCaseError> {
    let grid = CrossingWindow::default().grid().unwrap();
    if majorizes(psi, phi) {
        let d = renyi_dominance(psi, phi, &grid).unwrap();
        prop_assert!(
            matches!(d, Dominance::FirstGeqEverywhere | Dominance::Identical),
            "ψ ≺ φ but dominance is {d:?}"
        );
        let c = find_crossings(psi, phi, &CrossingWindow::default()).unwrap();
        prop_assert!(c.alphas.is_empty(), "ψ ≺ φ but curves cross at {:?}", c.alphas);
    }
    Ok(())
}

pub fn check_roots(a: &EntanglementSpectrum, b: &EntanglementSpectrum) -> Result<(), TestCaseError> {
    let w = CrossingWindow::default();
    let ab = find_crossings(a, b, &w).unwrap();
    let ba = find_crossings(b, a, &w).unwrap();
    prop_assert_eq!(&ab.alphas, &ba.alphas);
    prop_assert_eq!(ab.status, ba.status);
    prop_assert_eq!(ab.status == CrossingStatus::Crossed, !ab.alphas.is_empty());
    let f = |x: f64| a.renyi(x).unwrap() - b.renyi(x).unwrap();
    for &r in &ab.alphas {
        prop_assert!(r >= w.alpha_min && r <= w.alpha_max);
        let (lo, hi) = (f(r - w.refine_tol), f(r + w.refine_tol));
        if lo.abs() > 1e-10 && hi.abs() > 1e-10 {
            prop_assert!((lo > 0.0) != (hi > 0.0), "root {r}: f = {lo} and {hi} on either side");
        }
    }
    Ok(())
}

/// Enlarging the window by whole steps or halving its step never loses a
/// crossing.
pub fn check_window_changes(a: &EntanglementSpectrum, b: &EntanglementSpectrum, grow: usize) -> Result<(), TestCaseError> {
    let base = CrossingWindow::new(0.3, 1.8, 0.05, 1e-4).unwrap();
    let wide = CrossingWindow::new(
        base.alpha_min - 0.05 * grow.min(4) as f64,
        base.alpha_max + 0.05 * grow as f64,
        0.05,
        1e-4,
    )
    .unwrap();
    let fine = CrossingWindow {
        grid_step: base.grid_step / 2.0,
        ..base
    };
    let c0 = find_crossings(a, b, &base).unwrap();
    for w in [wide, fine] {
        let c = find_crossings(a, b, &w).unwrap();
        if c0.status == CrossingStatus::Crossed {
            prop_assert_eq!(c.status, CrossingStatus::Crossed);
            for r in &c0.alphas {
                prop_assert!(
                    c.alphas.iter().any(|x| (x - r).abs() <= 2.0 * base.refine_tol),
                    "root {r} lost with window {w:?}: {:?}",
                    c.alphas
                );
            }
        }
    }
    Ok(())
}

/// Parameters of a small Ising sweep for the refinement property.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub n: usize,
    pub start: f64,
    pub steps: usize,
    pub step: f64,
    pub levels: usize,
}

pub fn sweep_case_strategy() -> impl Strategy<Value = SweepCase> {
    (prop_oneof![Just(4usize), Just(6)], 0usize..8, 6usize..14, prop_oneof![Just(0.05), Just(0.1)], 1usize..=2)
        .prop_map(|(n, s, steps, step, levels)| SweepCase {
            n,
            start: 0.3 + 0.05 * s as f64,
            steps,
            step,
            levels,
        })
}

/// Each refined bracket lies inside the previous bracket widened by one
/// step, and is no wider than it. Returns whether the sweep produced a
/// bracket at all.
pub fn check_nesting(case: &SweepCase) -> Result<bool, TestCaseError> {
    let setup = ScanSetup::new(ModelSpec::ising(1.0, case.n).unwrap(), "g").unwrap();
    let stop = case.start + case.step * case.steps as f64;
    let cfg = SweepConfig::new(setup, case.start, stop, case.step)
        .unwrap()
        .with_refine_levels(case.levels)
        .unwrap();
    let out = match sweep(&cfg) {
        Ok(out) => out,
        Err(e) => {
            let root = e.root();
            prop_assert!(matches!(root, Error::NoSignal(_) | Error::Indeterminate(_)), "{e}");
            return Ok(false);
        }
    };
    for w in out.levels.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let slack = 1e-12;
        prop_assert!(next.bracket.lo >= prev.bracket.lo - prev.step - slack);
        prop_assert!(next.bracket.hi <= prev.bracket.hi + prev.step + slack);
        prop_assert!(next.bracket.width() <= prev.bracket.width() + slack);
        prop_assert!((next.step - prev.step / 10.0).abs() < 1e-15);
    }
    for l in &out.levels {
        let inside = l.matrix.params.iter().any(|&p| p >= l.bracket.lo && p <= l.bracket.hi);
        prop_assert!(inside);
    }
    Ok(true)
}
