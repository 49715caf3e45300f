//! Certified enclosures of the spectral radius of a single non-negative
//! matrix.
//!
//! The bracket is assembled from the Frobenius normal form: `ρ(A)` is the
//! maximum of the spectral radii of the irreducible diagonal blocks. A
//! `1×1` block contributes its diagonal entry exactly. Every larger block
//! is irreducible, so a shifted power iteration started from the all-ones
//! vector keeps the iterate strictly positive and the Collatz–Wielandt
//! quotients `min_i (Bx)_i/x_i <= ρ(B) <= max_i (Bx)_i/x_i` close in on
//! `ρ(B)` from both sides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::NonNegMatrix;

pub const DEFAULT_TOL_REL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// A certified interval `[lower, upper]` containing a spectral radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBracket {
    pub lower: f64,
    pub upper: f64,
    /// Product length that produced `lower` (1 for a single matrix).
    pub lower_depth: usize,
    /// Product length that produced `upper` (1 for a single matrix).
    pub upper_depth: usize,
    pub method: String,
    /// Set when an iteration or product budget stopped refinement early.
    /// The interval is still a valid enclosure, only wider than requested.
    #[serde(default)]
    pub truncated: bool,
}

impl RadiusBracket {
    pub fn exact(value: f64, method: &str) -> Self {
        Self {
            lower: value,
            upper: value,
            lower_depth: 1,
            upper_depth: 1,
            method: method.to_string(),
            truncated: false,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper)
        } else {
            self.lower
        }
    }

    pub fn contains(&self, value: f64, margin: f64) -> bool {
        self.lower - margin <= value && value <= self.upper + margin
    }

    /// Multiplies both endpoints by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lower: self.lower * c,
            upper: self.upper * c,
            ..self.clone()
        }
    }
}

/// Encloses `ρ(A)` to relative width `tol_rel` or until `max_iter` power
/// steps have been spent on some irreducible block. In the latter case the
/// best certified interval found so far is returned with `truncated` set.
pub fn spectral_radius_bracket(a: &NonNegMatrix, tol_rel: f64, max_iter: usize) -> Result<RadiusBracket> {
    if !(tol_rel.is_finite() && tol_rel > 0.0) {
        return Err(Error::Domain(format!("tol_rel must be positive, got {tol_rel}")));
    }
    if a.is_zero() {
        return Ok(RadiusBracket::exact(0.0, "zero-matrix"));
    }
    if a.dim() == 1 {
        return Ok(RadiusBracket::exact(a.get(0, 0), "scalar"));
    }

    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    let mut converged = true;
    let mut blocks = 0usize;

    let classes = if a.is_positive() {
        vec![(0..a.dim()).collect::<Vec<_>>()]
    } else {
        irreducible_classes(a)
    };
    for class in &classes {
        let (lo, hi, ok) = if class.len() == 1 {
            let v = a.get(class[0], class[0]);
            (v, v, true)
        } else {
            blocks += 1;
            let block = if class.len() == a.dim() {
                a.clone()
            } else {
                a.principal(class)
            };
            collatz_wielandt(&block, tol_rel, max_iter)
        };
        // A block whose certified upper bound sits below the current lower
        // bound cannot change the result, so a stall there is harmless.
        converged &= ok || hi <= lower;
        lower = lower.max(lo);
        upper = upper.max(hi);
    }

    let method = if classes.len() == 1 {
        "collatz-wielandt".to_string()
    } else {
        format!("collatz-wielandt/frobenius-form({} classes, {blocks} cyclic)", classes.len())
    };
    Ok(RadiusBracket {
        lower,
        upper,
        lower_depth: 1,
        upper_depth: 1,
        method,
        truncated: !converged,
    })
}

/// Default-tolerance convenience wrapper.
pub fn spectral_radius(a: &NonNegMatrix) -> RadiusBracket {
    spectral_radius_bracket(a, DEFAULT_TOL_REL, DEFAULT_MAX_ITER).expect("default tolerance is positive")
}

/// Shifted power iteration on an irreducible block of size >= 2.
/// Returns `(lower, upper, converged)`.
fn collatz_wielandt(b: &NonNegMatrix, tol_rel: f64, max_iter: usize) -> (f64, f64, bool) {
    let n = b.dim();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut best_lo = 0.0f64;
    let mut best_hi = f64::INFINITY;
    let mut shift = 0.0;

    for it in 0..max_iter.max(1) {
        b.mul_vec(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        best_lo = best_lo.max(lo);
        best_hi = best_hi.min(hi);
        if best_hi - best_lo <= tol_rel * best_hi {
            return (best_lo, best_hi, true);
        }
        if it == 0 {
            // (A + sI) is primitive for irreducible A and any s > 0; a shift
            // near ρ damps the peripheral eigenvalues of periodic blocks.
            shift = 0.5 * (lo + hi);
        }
        let mut max = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi + shift * *xi;
            max = max.max(*xi);
        }
        for xi in &mut x {
            *xi /= max;
        }
    }
    (best_lo, best_hi, false)
}

/// Partition of the index set into the strongly connected classes of the
/// support graph (`i -> j` iff `a_ij > 0`), each class sorted.
pub(crate) fn irreducible_classes(a: &NonNegMatrix) -> Vec<Vec<usize>> {
    let n = a.dim();
    let mut reach = vec![false; n * n];
    let mut stack = Vec::with_capacity(n);
    for s in 0..n {
        let row = &mut reach[s * n..(s + 1) * n];
        row[s] = true;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if a.get(u, v) > 0.0 && !row[v] {
                    row[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && reach[i * n + j] && reach[j * n + i])
            .collect();
        for &j in &class {
            assigned[j] = true;
        }
        classes.push(class);
    }
    classes
}

/// Spectral radius of a matrix of dimension at most 3 from the closed-form
/// roots of its characteristic polynomial. Used as an independent oracle.
pub fn spectral_radius_exact_small(a: &NonNegMatrix) -> Result<f64> {
    match a.dim() {
        1 => Ok(a.get(0, 0)),
        2 => {
            let tr = a.get(0, 0) + a.get(1, 1);
            let det = a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(1, 0);
            Ok(quadratic_max_modulus(-tr, det))
        }
        3 => {
            let g = |i, j| a.get(i, j);
            let tr = g(0, 0) + g(1, 1) + g(2, 2);
            let minors = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) + g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0)
                + g(1, 1) * g(2, 2)
                - g(1, 2) * g(2, 1);
            let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
            Ok(cubic_max_modulus(-tr, minors, -det))
        }
        d => Err(Error::Domain(format!(
            "closed-form spectral radius supports dimension <= 3, got {d}"
        ))),
    }
}

/// Largest root modulus of `λ² + pλ + q`.
fn quadratic_max_modulus(p: f64, q: f64) -> f64 {
    let disc = p * p - 4.0 * q;
    if disc >= 0.0 {
        // Stable pair: the larger-magnitude root first, then q / r1.
        let r1 = -0.5 * (p + p.signum() * disc.sqrt());
        let r2 = if r1 != 0.0 { q / r1 } else { 0.0 };
        r1.abs().max(r2.abs())
    } else {
        // Complex pair with modulus sqrt(q).
        q.sqrt()
    }
}

/// Largest root modulus of `λ³ + aλ² + bλ + c`.
fn cubic_max_modulus(a: f64, b: f64, c: f64) -> f64 {
    let real = cubic_real_root(a, b, c);
    let r = polish(real, a, b, c);
    // Deflate: λ³ + aλ² + bλ + c = (λ - r)(λ² + pλ + q).
    let p = a + r;
    let q = b + r * p;
    r.abs().max(quadratic_max_modulus(p, q))
}

/// Some real root of the monic cubic, preferring the largest one when all
/// three are real.
fn cubic_real_root(a: f64, b: f64, c: f64) -> f64 {
    let shift = a / 3.0;
    // Depressed cubic t³ + pt + q with λ = t - a/3.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let t = if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-half_q + s).cbrt();
        let v = (-half_q - s).cbrt();
        u + v
    } else if p == 0.0 {
        (-q).cbrt()
    } else {
        // Three real roots; the k = 0 branch is the largest.
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    };
    t - shift
}

fn polish(mut r: f64, a: f64, b: f64, c: f64) -> f64 {
    for _ in 0..3 {
        let f = ((r + a) * r + b) * r + c;
        let df = (3.0 * r + 2.0 * a) * r + b;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = r - f / df;
        if !next.is_finite() || (next - r).abs() >= (r.abs() + 1.0) {
            break;
        }
        let f_next = ((next + a) * next + b) * next + c;
        if f_next.abs() >= f.abs() {
            break;
        }
        r = next;
    }
    r
}
