#![allow(dead_code)]

use hjsr_core::{MatrixSet, NonNegMatrix, WeightVector};
use proptest::prelude::*;

/// Entries uniform on [0,1) with a 30% zero mask, as in the campaign.
pub fn matrix(dim: usize) -> impl Strategy<Value = NonNegMatrix> {
    prop::collection::vec((prop::bool::weighted(0.3), 0.0f64..1.0), dim * dim).prop_map(move |cells| {
        let data = cells.into_iter().map(|(zero, v)| if zero { 0.0 } else { v }).collect();
        NonNegMatrix::new(dim, data).unwrap()
    })
}

pub fn matrices(dim: usize, count: usize) -> impl Strategy<Value = Vec<NonNegMatrix>> {
    prop::collection::vec(matrix(dim), count)
}

pub fn any_matrix(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = NonNegMatrix> {
    dims.prop_flat_map(matrix)
}

pub fn set(dim: usize, sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = MatrixSet> {
    prop::collection::vec(matrix(dim), sizes).prop_map(|m| MatrixSet::new(m).unwrap())
}

/// Strict weights of length `m`, each bounded away from zero.
pub fn weights(m: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.05f64..1.0, m).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|v| v / sum).collect();
        let head: f64 = w[..w.len() - 1].iter().sum();
        let last = w.len() - 1;
        w[last] = 1.0 - head;
        WeightVector::strict(w).unwrap()
    })
}

pub fn assert_le_entrywise(lhs: &NonNegMatrix, rhs: &NonNegMatrix, rel: f64) {
    for (i, (a, b)) in lhs.as_slice().iter().zip(rhs.as_slice()).enumerate() {
        assert!(*a <= b * (1.0 + rel), "entry {i}: {a} > {b}");
    }
}
