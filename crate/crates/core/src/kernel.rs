//! Nyström models of positive kernel operators on `L²([0,1])`.
//!
//! A kernel `a(x, y)` is sampled on the midpoint grid `x_i = (i + ½)/n`
//! with uniform weights `1/n`. Hadamard operations act on the samples;
//! composition and the matrix view go through the quadrature weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pow_nonneg, NonNegMatrix, WeightMode, WeightVector};

/// Points per axis used to check non-negativity of polynomial kernels.
const SEPARABLE_CHECK_POINTS: usize = 1025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `a(x, y) = c`.
    Constant { c: f64 },
    /// `a(x, y) = exp(-s |x - y|)`.
    ExpAbs { scale: f64 },
    /// `a(x, y) = exp(-s (x - y)²)`.
    Gaussian { scale: f64 },
    /// `a(x, y) = f(x) g(y)` with polynomial coefficients in ascending order.
    Separable { f: Vec<f64>, g: Vec<f64> },
    /// Constant on each cell of a `blocks × blocks` partition of `[0,1]²`.
    /// Values come from `values` when given, otherwise uniformly from
    /// `[0,1)` with the given seed.
    PiecewiseConstant {
        blocks: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<Vec<f64>>>,
    },
}

impl KernelSpec {
    /// Short kind name, as used in input files.
    pub fn kind(&self) -> &'static str {
        match self {
            KernelSpec::Constant { .. } => "constant",
            KernelSpec::ExpAbs { .. } => "exp_abs",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Separable { .. } => "separable",
            KernelSpec::PiecewiseConstant { .. } => "piecewise_constant",
        }
    }

    /// One representative of each catalog kind.
    pub fn catalog() -> Vec<(String, KernelSpec)> {
        vec![
            ("constant".into(), KernelSpec::Constant { c: 1.0 }),
            ("exp_abs".into(), KernelSpec::ExpAbs { scale: 1.0 }),
            ("gaussian".into(), KernelSpec::Gaussian { scale: 4.0 }),
            (
                "separable".into(),
                KernelSpec::Separable {
                    f: vec![1.0, 1.0],
                    g: vec![0.5, 0.0, 2.0],
                },
            ),
            (
                "piecewise_constant".into(),
                KernelSpec::PiecewiseConstant {
                    blocks: 4,
                    seed: Some(7),
                    values: None,
                },
            ),
        ]
    }

    /// Resolves parameters into an evaluable kernel, validating them.
    fn compile(&self) -> Result<Compiled> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::KernelSpec(format!("{name} must be finite and non-negative, got {v}")))
            }
        };
        match self {
            KernelSpec::Constant { c } => {
                finite_nonneg("constant c", *c)?;
                Ok(Compiled::Constant(*c))
            }
            KernelSpec::ExpAbs { scale } => {
                finite_nonneg("exp_abs scale", *scale)?;
                Ok(Compiled::ExpAbs(*scale))
            }
            KernelSpec::Gaussian { scale } => {
                finite_nonneg("gaussian scale", *scale)?;
                Ok(Compiled::Gaussian(*scale))
            }
            KernelSpec::Separable { f, g } => {
                for (name, p) in [("f", f), ("g", g)] {
                    if p.is_empty() {
                        return Err(Error::KernelSpec(format!("separable {name} has no coefficients")));
                    }
                    if let Some(c) = p.iter().find(|c| !c.is_finite()) {
                        return Err(Error::KernelSpec(format!("separable {name} coefficient {c} is not finite")));
                    }
                    for i in 0..SEPARABLE_CHECK_POINTS {
                        let x = i as f64 / (SEPARABLE_CHECK_POINTS - 1) as f64;
                        let v = horner(p, x);
                        if v < 0.0 {
                            return Err(Error::KernelSpec(format!(
                                "separable {name}({x}) = {v} is negative on [0,1]"
                            )));
                        }
                    }
                }
                Ok(Compiled::Separable(f.clone(), g.clone()))
            }
            KernelSpec::PiecewiseConstant { blocks, seed, values } => {
                let k = *blocks;
                if k == 0 {
                    return Err(Error::KernelSpec("piecewise_constant needs blocks >= 1".into()));
                }
                let table = match (values, seed) {
                    (Some(rows), _) => {
                        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                            return Err(Error::KernelSpec(format!("piecewise_constant values must be {k}×{k}")));
                        }
                        for (i, row) in rows.iter().enumerate() {
                            for (j, &v) in row.iter().enumerate() {
                                finite_nonneg(&format!("piecewise_constant value ({i}, {j})"), v)?;
                            }
                        }
                        rows.iter().flatten().copied().collect()
                    }
                    (None, Some(seed)) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                        (0..k * k).map(|_| rng.random::<f64>()).collect()
                    }
                    (None, None) => {
                        return Err(Error::KernelSpec("piecewise_constant needs a seed or a values table".into()))
                    }
                };
                Ok(Compiled::Piecewise(k, table))
            }
        }
    }
}

enum Compiled {
    Constant(f64),
    ExpAbs(f64),
    Gaussian(f64),
    Separable(Vec<f64>, Vec<f64>),
    Piecewise(usize, Vec<f64>),
}

impl Compiled {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Compiled::Constant(c) => *c,
            Compiled::ExpAbs(s) => (-s * (x - y).abs()).exp(),
            Compiled::Gaussian(s) => (-s * (x - y) * (x - y)).exp(),
            Compiled::Separable(f, g) => horner(f, x) * horner(g, y),
            Compiled::Piecewise(k, table) => {
                let cell = |t: f64| ((t * *k as f64) as usize).min(k - 1);
                table[cell(x) * k + cell(y)]
            }
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Kernel samples on an `n`-point midpoint grid with quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    n: usize,
    /// Row-major `n × n`, `samples[i*n + j] = a(x_i, x_j)`.
    samples: Vec<f64>,
    weights: Vec<f64>,
}

impl KernelModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.sample(i, j) == self.sample(j, i)))
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.weights != other.weights {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Model of the composed operator `AB`, whose kernel is
    /// `∫ a(x, z) b(z, y) dz`, evaluated with the same quadrature.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let n = self.n;
        let mut samples = vec![0.0; n * n];
        for i in 0..n {
            let out = &mut samples[i * n..(i + 1) * n];
            for z in 0..n {
                let az = self.samples[i * n + z] * self.weights[z];
                if az == 0.0 {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(&other.samples[z * n..(z + 1) * n]) {
                    *o += az * b;
                }
            }
        }
        Ok(Self {
            n,
            samples,
            weights: self.weights.clone(),
        })
    }
}

/// Samples `spec` at the midpoints of an `n`-cell grid on `[0,1]`.
pub fn discretize(spec: &KernelSpec, n: usize) -> Result<KernelModel> {
    if n < 2 {
        return Err(Error::Domain(format!("kernel grid needs n >= 2, got {n}")));
    }
    let kernel = spec.compile()?;
    let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let mut samples = Vec::with_capacity(n * n);
    for &xi in &x {
        for &yj in &x {
            let v = kernel.eval(xi, yj);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::KernelSpec(format!(
                    "{} kernel is {v} at ({xi}, {yj})",
                    spec.kind()
                )));
            }
            samples.push(v);
        }
    }
    Ok(KernelModel {
        n,
        samples,
        weights: vec![1.0 / n as f64; n],
    })
}

/// `M[i][j] = samples[i][j] · w_j`, so that `(Af)(x_i) ≈ Σ_j M[i][j] f(x_j)`
/// and operator composition matches the matrix product.
pub fn to_matrix(km: &KernelModel) -> NonNegMatrix {
    let n = km.n;
    let data = km
        .samples
        .chunks_exact(n)
        .flat_map(|row| row.iter().zip(&km.weights).map(|(k, w)| k * w))
        .collect();
    NonNegMatrix::from_parts(n, data)
}

/// Kernel of `A_1^(α_1) ∘ ... ∘ A_m^(α_m)`: the samples are combined
/// entrywise, the quadrature weights are kept. Only strict weights are
/// accepted.
pub fn kernel_hadamard_mean(models: &[&KernelModel], w: &WeightVector) -> Result<KernelModel> {
    let first = models.first().ok_or(Error::Empty("kernel mean needs at least one model"))?;
    if w.mode() != WeightMode::StrictSumOne {
        return Err(Error::Weights("kernel Hadamard means require weights summing to 1".into()));
    }
    if models.len() != w.len() {
        return Err(Error::Weights(format!("{} kernels but {} weights", models.len(), w.len())));
    }
    for m in &models[1..] {
        first.check_grid(m)?;
    }
    let mut samples = vec![1.0; first.samples.len()];
    for (m, &alpha) in models.iter().zip(w.weights()) {
        for (acc, &v) in samples.iter_mut().zip(&m.samples) {
            *acc *= pow_nonneg(v, alpha);
        }
    }
    Ok(KernelModel {
        n: first.n,
        samples,
        weights: first.weights.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::hadamard_geometric_mean;
    use crate::spectral::spectral_radius;

    #[test]
    fn constant_kernel() {
        let km = discretize(&KernelSpec::Constant { c: 1.0 }, 4).unwrap();
        assert!(km.samples().iter().all(|&v| v == 1.0));
        assert!(km.weights().iter().all(|&w| w == 0.25));
        let m = to_matrix(&km);
        assert!(m.as_slice().iter().all(|&v| v == 0.25));
        let r = spectral_radius(&m);
        assert!(r.contains(1.0, 1e-12));
    }

    #[test]
    fn separable_of_ones_is_constant_one() {
        let a = discretize(&KernelSpec::Separable { f: vec![1.0], g: vec![1.0] }, 5).unwrap();
        let b = discretize(&KernelSpec::Constant { c: 1.0 }, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exp_abs_two_point_grid() {
        let km = discretize(&KernelSpec::ExpAbs { scale: 1.0 }, 2).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(km.samples(), &[1.0, e, e, 1.0]);
    }

    #[test]
    fn zero_kernel_gives_zero_matrix() {
        let km = discretize(&KernelSpec::Constant { c: 0.0 }, 3).unwrap();
        assert!(to_matrix(&km).is_zero());
    }

    #[test]
    fn separable_radius_approaches_integral() {
        // f = 1 + x, g = x: ∫ f g = 5/6; the midpoint rule converges as 1/n².
        let spec = KernelSpec::Separable {
            f: vec![1.0, 1.0],
            g: vec![0.0, 1.0],
        };
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let r = spectral_radius(&to_matrix(&discretize(&spec, n).unwrap()));
            let err = (r.midpoint() - 5.0 / 6.0).abs();
            assert!(err < prev);
            assert!(err <= 0.1 / (n * n) as f64, "n={n} err={err}");
            prev = err;
        }
    }

    #[test]
    fn symmetric_kinds() {
        for spec in [KernelSpec::ExpAbs { scale: 2.0 }, KernelSpec::Gaussian { scale: 3.0 }] {
            assert!(discretize(&spec, 9).unwrap().is_symmetric());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(discretize(&KernelSpec::Constant { c: -1.0 }, 4).is_err());
        assert!(discretize(&KernelSpec::ExpAbs { scale: f64::NAN }, 4).is_err());
        assert!(discretize(&KernelSpec::Constant { c: 1.0 }, 1).is_err());
        let neg = KernelSpec::Separable {
            f: vec![1.0, -2.0],
            g: vec![1.0],
        };
        assert!(matches!(discretize(&neg, 4), Err(Error::KernelSpec(_))));
        let bad_table = KernelSpec::PiecewiseConstant {
            blocks: 2,
            seed: None,
            values: Some(vec![vec![1.0, 2.0]]),
        };
        assert!(discretize(&bad_table, 4).is_err());
        let unseeded = KernelSpec::PiecewiseConstant {
            blocks: 2,
            seed: None,
            values: None,
        };
        assert!(discretize(&unseeded, 4).is_err());
    }

    #[test]
    fn piecewise_is_seeded_and_blocky() {
        let spec = KernelSpec::PiecewiseConstant {
            blocks: 4,
            seed: Some(7),
            values: None,
        };
        let a = discretize(&spec, 16).unwrap();
        assert_eq!(a, discretize(&spec, 16).unwrap());
        // Cells 0..4 of the 16-grid share block 0.
        assert_eq!(a.sample(0, 0), a.sample(3, 2));
        let table = KernelSpec::PiecewiseConstant {
            blocks: 2,
            seed: None,
            values: Some(vec![vec![1.0, 2.0], vec![3.0, 4.0]]),
        };
        let t = discretize(&table, 4).unwrap();
        assert_eq!(t.sample(0, 3), 2.0);
        assert_eq!(t.sample(3, 0), 3.0);
    }

    #[test]
    fn hadamard_mean_examples() {
        let half = WeightVector::strict(vec![0.5, 0.5]).unwrap();
        let four = discretize(&KernelSpec::Constant { c: 4.0 }, 4).unwrap();
        let nine = discretize(&KernelSpec::Constant { c: 9.0 }, 4).unwrap();
        let six = kernel_hadamard_mean(&[&four, &nine], &half).unwrap();
        assert!(six.samples().iter().all(|&v| (v - 6.0).abs() < 1e-15));

        let g = discretize(&KernelSpec::Gaussian { scale: 2.0 }, 6).unwrap();
        let one = WeightVector::strict(vec![1.0]).unwrap();
        assert_eq!(kernel_hadamard_mean(&[&g], &one).unwrap(), g);

        let zero = discretize(&KernelSpec::Constant { c: 0.0 }, 6).unwrap();
        assert!(kernel_hadamard_mean(&[&g, &zero], &half)
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));

        let relaxed = WeightVector::relaxed(vec![1.0, 1.0]).unwrap();
        assert!(kernel_hadamard_mean(&[&four, &nine], &relaxed).is_err());
        let other_grid = discretize(&KernelSpec::Constant { c: 1.0 }, 5).unwrap();
        assert!(kernel_hadamard_mean(&[&four, &other_grid], &half).is_err());
    }

    #[test]
    fn mean_commutes_with_matrix_view_up_to_weights() {
        let w = WeightVector::strict(vec![0.3, 0.7]).unwrap();
        let a = discretize(&KernelSpec::ExpAbs { scale: 1.5 }, 8).unwrap();
        let b = discretize(&KernelSpec::Gaussian { scale: 2.0 }, 8).unwrap();
        let via_kernels = to_matrix(&kernel_hadamard_mean(&[&a, &b], &w).unwrap());
        let via_matrices = hadamard_geometric_mean(&[&to_matrix(&a), &to_matrix(&b)], &w).unwrap();
        // With Σα = 1 and uniform weights the two agree.
        for (x, y) in via_kernels.as_slice().iter().zip(via_matrices.as_slice()) {
            assert!((x - y).abs() <= 1e-12 * x.max(1e-300));
        }
    }

    #[test]
    fn composition_matches_matrix_product() {
        let a = discretize(&KernelSpec::ExpAbs { scale: 1.0 }, 7).unwrap();
        let b = discretize(&KernelSpec::PiecewiseConstant { blocks: 3, seed: Some(1), values: None }, 7).unwrap();
        let lhs = to_matrix(&a.compose(&b).unwrap());
        let rhs = crate::matrix::mat_product(&to_matrix(&a), &to_matrix(&b)).unwrap();
        for (x, y) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            assert!((x - y).abs() <= 1e-14);
        }
    }
}
