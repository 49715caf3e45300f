//! Seeded random inputs: entries i.i.d. uniform on `[0,1)`, each
//! independently zeroed with probability [`ZERO_PROB`].

use rand::Rng;

use crate::matrix::{NonNegMatrix, WeightVector};
use crate::set_radius::MatrixSet;

pub const ZERO_PROB: f64 = 0.3;

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> NonNegMatrix {
    let data = (0..dim * dim)
        .map(|_| {
            let keep = rng.random::<f64>() >= ZERO_PROB;
            let v = rng.random::<f64>();
            if keep {
                v
            } else {
                0.0
            }
        })
        .collect();
    NonNegMatrix::new(dim, data).expect("uniform samples are finite and non-negative")
}

/// Entrywise-positive matrix with entries uniform on `[lo, 1)`.
pub fn random_positive_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64) -> NonNegMatrix {
    let data = (0..dim * dim).map(|_| lo + (1.0 - lo) * rng.random::<f64>()).collect();
    NonNegMatrix::new(dim, data).expect("uniform samples are finite and non-negative")
}

pub fn random_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, size: usize) -> MatrixSet {
    MatrixSet::new((0..size.max(1)).map(|_| random_matrix(rng, dim)).collect()).expect("nonempty, equal dimensions")
}

/// `m` positive weights summing to 1, each at least `0.05 / m` before
/// normalisation so no factor degenerates.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize) -> WeightVector {
    let raw: Vec<f64> = (0..m.max(1)).map(|_| 0.05 + rng.random::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / sum).collect();
    // Put the rounding residue on the last weight so the sum is 1 to the ulp.
    let head: f64 = w[..w.len() - 1].iter().sum();
    let last = w.len() - 1;
    w[last] = 1.0 - head;
    WeightVector::strict(w).expect("normalised positive weights")
}
