//! Dense non-negative square matrices and the Hadamard algebra on them.
//!
//! Storage is row-major: `data[i * dim + j]` holds entry `(i, j)`. Every
//! constructor validates that entries are finite and non-negative, so any
//! `NonNegMatrix` in hand is a valid model of a positive kernel operator on
//! a finite measure space with counting measure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the weight sum when checking the normalisation.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct NonNegMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for NonNegMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let m = NonNegMatrix::from_rows(&raw.rows)?;
        if m.dim != raw.dim {
            return Err(Error::Dimension {
                expected: raw.dim,
                found: m.dim,
            });
        }
        Ok(m)
    }
}

impl From<NonNegMatrix> for RawMatrix {
    fn from(m: NonNegMatrix) -> Self {
        RawMatrix {
            dim: m.dim,
            rows: m.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl NonNegMatrix {
    /// Builds a matrix from row-major data of length `dim * dim`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidEntry {
                row: pos / dim,
                col: pos % dim,
                value: data[pos],
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// The all-ones matrix `J`.
    pub fn ones(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![1.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Internal constructor for results of operations that preserve
    /// non-negativity by construction.
    pub(crate) fn from_parts(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        debug_assert!(data.iter().all(|v| *v >= 0.0));
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|v| *v > 0.0)
    }

    /// Multiplies every entry by a non-negative scalar.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain(format!("scale factor {c} must be finite and >= 0")));
        }
        Ok(Self::from_parts(
            self.dim,
            self.data.iter().map(|v| v * c).collect(),
        ))
    }

    /// Entrywise comparison `self <= other`.
    pub fn le_entrywise(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (yi, row) in y.iter_mut().zip(self.rows()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn max_row_sum(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_col_sum(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on the given (sorted) index set.
    pub(crate) fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self::from_parts(k, data)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl fmt::Display for NonNegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// How strictly the weights of a geometric mean must be normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// `sum == 1` within [`WEIGHT_SUM_TOL`].
    StrictSumOne,
    /// `sum >= 1`; only meaningful for matrices, never for kernel models.
    RelaxedSumGeOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    mode: WeightMode,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, mode: WeightMode) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Weights(format!("weight {w} is not a positive finite number")));
        }
        let sum: f64 = weights.iter().sum();
        match mode {
            WeightMode::StrictSumOne if (sum - 1.0).abs() > WEIGHT_SUM_TOL => {
                return Err(Error::Weights(format!("weights sum to {sum}, expected 1")));
            }
            WeightMode::RelaxedSumGeOne if sum < 1.0 - WEIGHT_SUM_TOL => {
                return Err(Error::Weights(format!("weights sum to {sum}, expected >= 1")));
            }
            _ => {}
        }
        Ok(Self { weights, mode })
    }

    pub fn strict(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, WeightMode::StrictSumOne)
    }

    pub fn relaxed(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, WeightMode::RelaxedSumGeOne)
    }

    /// `m` equal weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("weight vector"));
        }
        Self::strict(vec![1.0 / m as f64; m])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Entrywise product `A ∘ B`.
pub fn hadamard_product(a: &NonNegMatrix, b: &NonNegMatrix) -> Result<NonNegMatrix> {
    a.check_same_dim(b)?;
    Ok(NonNegMatrix::from_parts(
        a.dim,
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    ))
}

/// Entrywise power `A^(alpha)` with the convention `0^alpha = 0`.
pub fn hadamard_power(a: &NonNegMatrix, alpha: f64) -> Result<NonNegMatrix> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "Hadamard exponent must be positive and finite, got {alpha}"
        )));
    }
    Ok(NonNegMatrix::from_parts(
        a.dim,
        a.data.iter().map(|&v| pow_nonneg(v, alpha)).collect(),
    ))
}

#[inline]
pub(crate) fn pow_nonneg(v: f64, alpha: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if alpha == 1.0 {
        v
    } else if alpha == 0.5 {
        v.sqrt()
    } else {
        v.powf(alpha)
    }
}

/// Weighted Hadamard geometric mean `A_1^(w_1) ∘ ... ∘ A_m^(w_m)`.
pub fn hadamard_geometric_mean(mats: &[&NonNegMatrix], w: &WeightVector) -> Result<NonNegMatrix> {
    let first = mats.first().ok_or(Error::Empty("geometric mean needs at least one matrix"))?;
    if mats.len() != w.len() {
        return Err(Error::Weights(format!(
            "{} matrices but {} weights",
            mats.len(),
            w.len()
        )));
    }
    for m in &mats[1..] {
        first.check_same_dim(m)?;
    }
    let dim = first.dim;
    let mut data = vec![1.0; dim * dim];
    for (m, &alpha) in mats.iter().zip(w.weights()) {
        for (acc, &v) in data.iter_mut().zip(&m.data) {
            *acc *= pow_nonneg(v, alpha);
        }
    }
    Ok(NonNegMatrix::from_parts(dim, data))
}

/// `out = a b` for row-major `n × n` slices; `out` must start zeroed.
pub(crate) fn mul_into(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b[k * n..(k + 1) * n];
            for (o, bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

/// Ordinary matrix product `A B`.
pub fn mat_product(a: &NonNegMatrix, b: &NonNegMatrix) -> Result<NonNegMatrix> {
    a.check_same_dim(b)?;
    Ok(mat_product_unchecked(a, b))
}

pub(crate) fn mat_product_unchecked(a: &NonNegMatrix, b: &NonNegMatrix) -> NonNegMatrix {
    let n = a.dim;
    let mut out = vec![0.0; n * n];
    mul_into(&a.data, &b.data, n, &mut out);
    NonNegMatrix::from_parts(n, out)
}

/// `min(max row sum, max column sum)`: the smaller of the induced
/// `∞`-norm and `1`-norm. Both are submultiplicative and monotone on the
/// non-negative cone, so the minimum bounds `ρ(A)` from above.
pub fn operator_norm(a: &NonNegMatrix) -> f64 {
    a.max_row_sum().min(a.max_col_sum())
}
