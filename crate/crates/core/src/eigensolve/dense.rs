use nalgebra::{DMatrix, SymmetricEigen};

use super::residual;
use crate::error::Result;
use crate::model::{BasisIndex, Hamiltonian};

/// Full diagonalization of `H` restricted to `sector`, which must be closed
/// under `H`; returns the `k` lowest `(energy, vector, residual)` with vectors
/// embedded in the full space.
pub(super) fn lowest(ham: &Hamiltonian, k: usize, sector: &[usize]) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let dim = ham.dim();
    let n = ham.spec().n_sites();
    let mut local = vec![usize::MAX; dim];
    for (j, &b) in sector.iter().enumerate() {
        local[b] = j;
    }
    let mut h = DMatrix::<f64>::zeros(sector.len(), sector.len());
    for (j, &b) in sector.iter().enumerate() {
        for (row, amp) in ham.element_action(BasisIndex::new(b, n)?)? {
            h[(local[row.value()], j)] += amp;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut scratch = vec![0.0; dim];
    order
        .into_iter()
        .take(k)
        .map(|idx| {
            let mut v = vec![0.0; dim];
            for (&b, x) in sector.iter().zip(eig.eigenvectors.column(idx).iter()) {
                v[b] = *x;
            }
            let energy = eig.eigenvalues[idx];
            let r = residual(ham, energy, &v, &mut scratch)?;
            Ok((energy, v, r))
        })
        .collect()
}
