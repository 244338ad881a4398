//! Restarted Lanczos with full reorthogonalization and deflation.
//!
//! Eigenpairs are found one at a time. Every Krylov vector is kept orthogonal
//! to the pairs already locked, so each pass sees `H` restricted to their
//! orthogonal complement and converges to the next level up, including exact
//! degeneracies a single Krylov sequence would miss. A pass that ends above
//! tolerance restarts from its Ritz vector.
//!
//! The start vector is supported on one symmetry sector. `H` maps the sector
//! into itself exactly (entries outside it stay exactly zero through matvecs
//! and Gram-Schmidt), so the whole iteration stays in that sector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm, residual, SolverConfig};
use crate::error::{Error, Result};
use crate::model::Hamiltonian;

const CHECK_EVERY: usize = 5;

pub(super) fn lowest(
    ham: &Hamiltonian,
    k: usize,
    sector: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let dim = ham.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    let mut scratch = vec![0.0; dim];
    let mut iterations = 0usize;

    for _ in 0..k {
        let mut start = vec![0.0; dim];
        for &b in sector {
            start[b] = rng.random::<f64>() - 0.5;
        }
        let mut best = f64::INFINITY;
        let mut accepted = None;
        for _ in 0..=cfg.max_restarts {
            orthogonalize(&mut start, &locked);
            let n = norm(&start);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::Convergence {
                    iterations,
                    best_residual: best,
                });
            }
            start.iter_mut().for_each(|x| *x /= n);

            let pass = krylov_pass(ham, &start, &locked, sector.len(), cfg)?;
            iterations += pass.steps;
            ham.apply_into(&pass.ritz, &mut scratch)?;
            let energy = dot(&pass.ritz, &scratch);
            let r = residual(ham, energy, &pass.ritz, &mut scratch)?;
            best = best.min(r);
            if r <= cfg.tol {
                accepted = Some((energy, pass.ritz, r));
                break;
            }
            start = pass.ritz;
        }
        let (theta, v, r) = accepted.ok_or(Error::Convergence {
            iterations,
            best_residual: best,
        })?;
        locked.push(v.clone());
        out.push((theta, v, r));
    }
    // Deflation finds levels in order up to round-off; sort to be safe.
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

struct Pass {
    ritz: Vec<f64>,
    steps: usize,
}

/// Two rounds of classical Gram-Schmidt against `basis`.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in basis {
            let c = dot(w, u);
            w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn lowest_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut idx = 0;
    for i in 1..m {
        if eig.eigenvalues[i] < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    (eig.eigenvalues[idx], eig.eigenvectors.column(idx).iter().copied().collect())
}

fn krylov_pass(
    ham: &Hamiltonian,
    start: &[f64],
    locked: &[Vec<f64>],
    sector_dim: usize,
    cfg: &SolverConfig,
) -> Result<Pass> {
    let dim = ham.dim();
    let max_steps = cfg.krylov_dim.min(sector_dim - locked.len()).max(1);
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alphas: Vec<f64> = Vec::with_capacity(max_steps);
    let mut betas: Vec<f64> = Vec::with_capacity(max_steps);
    let mut w = vec![0.0; dim];
    let mut ritz = (0.0, vec![1.0]);

    for j in 0..max_steps {
        ham.apply_into(&basis[j], &mut w)?;
        let alpha = dot(&w, &basis[j]);
        alphas.push(alpha);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let beta = norm(&w);

        let last = j + 1 == max_steps;
        let scale = alphas.iter().fold(1.0f64, |m, a| m.max(a.abs()));
        let breakdown = beta <= 1e-13 * scale;
        if last || breakdown || (j + 1) % CHECK_EVERY == 0 {
            ritz = lowest_ritz(&alphas, &betas);
            let estimate = beta * ritz.1.last().map_or(0.0, |y| y.abs());
            if last || breakdown || estimate <= 0.1 * cfg.tol {
                break;
            }
        }
        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
    }

    let coeffs = ritz.1;
    let mut x = vec![0.0; dim];
    for (c, v) in coeffs.iter().zip(&basis) {
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += c * vi);
    }
    orthogonalize(&mut x, locked);
    let n = norm(&x);
    x.iter_mut().for_each(|xi| *xi /= n);
    Ok(Pass {
        ritz: x,
        steps: alphas.len(),
    })
}
