//! Finite matrix sets, their product semigroup, and certified brackets for
//! the generalized spectral radius `ρ(Σ)` and the joint spectral radius
//! `ρ̂(Σ)`.
//!
//! For a finite set of matrices both radii coincide, so every product
//! `P ∈ Σ^m` gives a lower bound `ρ(P)^{1/m}` and every induced norm gives
//! an upper bound `(max_{P ∈ Σ^m} ‖P‖)^{1/m}`. Only finite-depth quantities
//! are ever reported; nothing is extrapolated.
//!
//! Upper bounds are taken per norm and then minimised over a small family
//! of induced norms: the max-row-sum and max-column-sum norms, and the same
//! two norms rescaled by a positive Perron-type vector of `Σ A`. The
//! minimum of two norms is not itself submultiplicative, so the family is
//! never collapsed into a single per-matrix quantity before the max.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hadamard_geometric_mean, mat_product_unchecked, mul_into, NonNegMatrix, WeightVector};
use crate::spectral::{spectral_radius, spectral_radius_bracket, RadiusBracket, DEFAULT_MAX_ITER, DEFAULT_TOL_REL};

pub const DEFAULT_MAX_PRODUCTS: usize = 2_000_000;
pub const DEFAULT_MAX_DEPTH: usize = 6;
/// Default Gripenberg slack relative to the current upper bound.
pub const DEFAULT_RELATIVE_DELTA: f64 = 1e-3;

/// A finite, nonempty, dimension-homogeneous set of non-negative matrices.
/// Members keep their insertion order; duplicates are retained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSet {
    dim: usize,
    members: Vec<NonNegMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl MatrixSet {
    pub fn new(members: Vec<NonNegMatrix>) -> Result<Self> {
        let dim = members.first().ok_or(Error::Empty("matrix set needs at least one member"))?.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            dim,
            members,
            label: None,
        })
    }

    pub fn singleton(a: NonNegMatrix) -> Self {
        Self {
            dim: a.dim(),
            members: vec![a],
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[NonNegMatrix] {
        &self.members
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Multiplies every member by `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            members: self.members.iter().map(|m| m.scale(c)).collect::<Result<_>>()?,
            label: self.label.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Pruning {
    Off,
    /// Branch-and-bound on product prefixes. `delta: None` means
    /// [`DEFAULT_RELATIVE_DELTA`] times the current upper bound.
    Gripenberg { delta: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_depth: usize,
    pub max_products: usize,
    pub pruning: Pruning,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
            max_products: DEFAULT_MAX_PRODUCTS,
            pruning: Pruning::Off,
        }
    }
}

impl EnumerationBudget {
    pub fn with_depth(max_depth: usize) -> Self {
        Self {
            max_depth,
            ..Self::default()
        }
    }

    pub fn pruned(mut self, delta: Option<f64>) -> Self {
        self.pruning = Pruning::Gripenberg { delta };
        self
    }

    fn validate(&self, set: &MatrixSet) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Domain("max_depth must be at least 1".into()));
        }
        if let Pruning::Gripenberg { delta: Some(d) } = self.pruning {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Domain(format!("pruning delta must be positive, got {d}")));
            }
        }
        if self.max_products < set.len() {
            return Err(Error::Budget {
                needed: set.len() as u128,
                cap: self.max_products,
            });
        }
        Ok(())
    }
}

/// `|S|^m` without overflow.
pub fn power_count(size: usize, m: usize) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..m {
        n = n.saturating_mul(size as u128);
    }
    n
}

fn check_cap(needed: u128, cap: usize) -> Result<()> {
    if needed > cap as u128 {
        return Err(Error::Budget { needed, cap });
    }
    Ok(())
}

/// `{ AB : A ∈ P, B ∈ S }` in lexicographic order of `(A, B)`.
pub fn set_product(p: &MatrixSet, s: &MatrixSet) -> Result<MatrixSet> {
    if p.dim != s.dim {
        return Err(Error::Dimension {
            expected: p.dim,
            found: s.dim,
        });
    }
    let members = p
        .members
        .par_iter()
        .flat_map_iter(|a| s.members.iter().map(move |b| mat_product_unchecked(a, b)))
        .collect();
    Ok(MatrixSet {
        dim: p.dim,
        members,
        label: None,
    })
}

/// All `|S|^m` ordered products of length `m`. Fails when that count
/// exceeds `max_products`.
pub fn set_power(s: &MatrixSet, m: usize, max_products: usize) -> Result<MatrixSet> {
    if m == 0 {
        return Err(Error::Domain("set power needs m >= 1".into()));
    }
    check_cap(power_count(s.len(), m), max_products)?;
    let mut out = MatrixSet {
        dim: s.dim,
        members: s.members.clone(),
        label: None,
    };
    for _ in 1..m {
        out = set_product(&out, s)?;
    }
    Ok(out)
}

/// `{ A_1^(w_1) ∘ ... ∘ A_m^(w_m) : A_i ∈ Ψ_i }` in lexicographic order.
pub fn hadamard_mean_of_sets(sets: &[&MatrixSet], w: &WeightVector) -> Result<MatrixSet> {
    let first = sets.first().ok_or(Error::Empty("Hadamard mean needs at least one set"))?;
    if sets.len() != w.len() {
        return Err(Error::Weights(format!("{} sets but {} weights", sets.len(), w.len())));
    }
    for s in &sets[1..] {
        if s.dim != first.dim {
            return Err(Error::Dimension {
                expected: first.dim,
                found: s.dim,
            });
        }
    }
    let total: usize = sets.iter().map(|s| s.len()).product();
    let members = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            // Mixed-radix decode with the first set as the most significant digit.
            let mut picks = vec![0usize; sets.len()];
            for (slot, s) in picks.iter_mut().zip(sets).rev() {
                *slot = flat % s.len();
                flat /= s.len();
            }
            let chosen: Vec<&NonNegMatrix> = picks.iter().zip(sets).map(|(&i, s)| &s.members[i]).collect();
            hadamard_geometric_mean(&chosen, w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixSet {
        dim: first.dim,
        members,
        label: None,
    })
}

/// Induced norms used for upper bounds. All four are operator norms on the
/// non-negative cone, hence submultiplicative and monotone.
#[derive(Debug, Clone)]
pub(crate) struct NormFamily {
    right: Vec<f64>,
    left: Vec<f64>,
}

pub(crate) const NORM_COUNT: usize = 4;

impl NormFamily {
    pub(crate) fn for_set(s: &MatrixSet) -> Self {
        let n = s.dim;
        let mut sum = vec![0.0; n * n];
        for m in &s.members {
            for (acc, v) in sum.iter_mut().zip(m.as_slice()) {
                *acc += v;
            }
        }
        let scale = sum.iter().cloned().fold(0.0, f64::max);
        if scale > 0.0 {
            for v in &mut sum {
                *v /= scale;
            }
        }
        let mut transposed = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                transposed[j * n + i] = sum[i * n + j];
            }
        }
        Self {
            right: perron_weights(&sum, n),
            left: perron_weights(&transposed, n),
        }
    }

    /// `[‖P‖_∞, ‖P‖_1, ‖D⁻¹PD‖_∞, ‖DPD⁻¹‖_1]` with `D` built from the
    /// right and left weight vectors.
    pub(crate) fn norms(&self, a: &[f64], n: usize) -> [f64; NORM_COUNT] {
        let mut row_max = 0.0f64;
        let mut wrow_max = 0.0f64;
        for i in 0..n {
            let row = &a[i * n..(i + 1) * n];
            let mut s = 0.0;
            let mut ws = 0.0;
            for (v, x) in row.iter().zip(&self.right) {
                s += v;
                ws += v * x;
            }
            row_max = row_max.max(s);
            wrow_max = wrow_max.max(ws / self.right[i]);
        }
        let mut col_max = 0.0f64;
        let mut wcol_max = 0.0f64;
        for j in 0..n {
            let mut s = 0.0;
            let mut ws = 0.0;
            for (i, y) in self.left.iter().enumerate() {
                let v = a[i * n + j];
                s += v;
                ws += y * v;
            }
            col_max = col_max.max(s);
            wcol_max = wcol_max.max(ws / self.left[j]);
        }
        [row_max, col_max, wrow_max, wcol_max]
    }
}

/// Strictly positive approximate Perron vector of a non-negative matrix via
/// a fixed number of shifted power steps (the shift keeps every entry > 0).
fn perron_weights(a: &[f64], n: usize) -> Vec<f64> {
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..64 {
        for i in 0..n {
            y[i] = a[i * n..(i + 1) * n].iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + x[i];
        }
        let max = y.iter().cloned().fold(0.0, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = (yi / max).max(1e-150);
        }
    }
    x
}

/// `max_{A ∈ S^m} ρ(A)^{1/m}` using certified Collatz–Wielandt lower bounds:
/// a certified lower bound for `ρ(S)`.
pub fn gsr_lower(s: &MatrixSet, m: usize, max_products: usize) -> Result<f64> {
    let power = set_power(s, m, max_products)?;
    let best = power
        .members
        .par_iter()
        .map(|p| spectral_radius(p).lower)
        .reduce(|| 0.0, f64::max);
    Ok(root(best, m))
}

/// `min_norm (max_{A ∈ S^m} ‖A‖)^{1/m}` over the induced-norm family: a
/// certified upper bound for `ρ̂(S)` and hence for `ρ(S)`.
pub fn jsr_upper(s: &MatrixSet, m: usize, max_products: usize) -> Result<f64> {
    let power = set_power(s, m, max_products)?;
    let family = NormFamily::for_set(s);
    let maxima = power
        .members
        .par_iter()
        .map(|p| family.norms(p.as_slice(), p.dim()))
        .reduce(|| [0.0; NORM_COUNT], max_norms);
    Ok(root(min_of(&maxima), m))
}

/// Certified lower bound for `ρ(P)`, refined to full precision only when a
/// coarse enclosure cannot rule out beating `target`.
fn product_radius_lower(p: &NonNegMatrix, target: f64) -> f64 {
    let coarse = spectral_radius_bracket(p, 1e-4, 200).expect("positive tolerance");
    if coarse.upper < target {
        return coarse.lower;
    }
    spectral_radius_bracket(p, DEFAULT_TOL_REL, DEFAULT_MAX_ITER)
        .expect("positive tolerance")
        .lower
}

fn max_norms(a: [f64; NORM_COUNT], b: [f64; NORM_COUNT]) -> [f64; NORM_COUNT] {
    std::array::from_fn(|k| a[k].max(b[k]))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[inline]
fn root(v: f64, m: usize) -> f64 {
    if m == 1 {
        v
    } else {
        v.powf(1.0 / m as f64)
    }
}

/// Bookkeeping from one call to [`radius_bracket_detailed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationStats {
    /// Number of products whose norms (and possibly spectral radius) were
    /// evaluated, across all depths.
    pub products_evaluated: u64,
    /// Deepest level fully evaluated.
    pub depth_reached: usize,
    /// Prefixes discarded by pruning.
    pub pruned_prefixes: u64,
    /// Largest slack used by pruning, if pruning was on.
    pub delta: Option<f64>,
    /// Factor indices of the product attaining the lower bound.
    pub lower_word: Vec<u32>,
    /// Every prefix was pruned before `max_depth`: the upper bound is final.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRadius {
    pub bracket: RadiusBracket,
    pub stats: EnumerationStats,
}

/// Certified bracket for `ρ(S) = ρ̂(S)`; see [`radius_bracket_detailed`].
pub fn radius_bracket(s: &MatrixSet, budget: &EnumerationBudget) -> Result<RadiusBracket> {
    radius_bracket_detailed(s, budget).map(|r| r.bracket)
}

/// One enumeration level stored flat, products back to back. `ids` index
/// into the history entry of the current depth, which records parent and
/// last factor for word reconstruction.
struct Level {
    mats: Vec<f64>,
    ids: Vec<u32>,
    /// Running Gripenberg bounds, one per norm: `‖P‖_k <= bound[k]^len`.
    bound: Vec<[f64; NORM_COUNT]>,
}

impl Level {
    fn len(&self) -> usize {
        self.ids.len()
    }
}

struct Eval {
    rho_root: f64,
    norms: [f64; NORM_COUNT],
}

fn word_of(history: &[(Vec<u32>, Vec<u32>)], depth: usize, mut idx: usize) -> Vec<u32> {
    let mut word = vec![0u32; depth];
    for d in (0..depth).rev() {
        let (parent, last) = &history[d];
        word[d] = last[idx];
        idx = parent[idx] as usize;
    }
    word
}

/// Enumerates `S, S², ...` level by level up to `budget.max_depth`.
///
/// * `lower` is the best `ρ(P)^{1/m}` over every evaluated product.
/// * Without pruning, `upper` is the minimum over depths of the
///   norm-family bound on the whole level.
/// * With Gripenberg pruning, a prefix `P` of length `m` carries bounds
///   `b_k(P)` with `‖P‖_k <= b_k(P)^m` for each norm of the family; it is
///   discarded once every `b_k(P) <= lower + δ`. Any infinite product then
///   splits into discarded prefixes and surviving depth-`d` prefixes, so
///   for each norm `max(discarded b_k, surviving b_k at depth d)` bounds
///   `ρ̂(S)`, and the minimum over norms never exceeds the exhaustive bound
///   by more than `δ`.
///
/// When the next level would exceed `max_products`, enumeration stops at
/// the last complete level and the bracket is marked `truncated`.
///
/// Each level is evaluated in parallel and reduced in a fixed order, with
/// ties on the lower bound going to the lexicographically smallest factor
/// word, so the result does not depend on the worker count.
pub fn radius_bracket_detailed(s: &MatrixSet, budget: &EnumerationBudget) -> Result<SetRadius> {
    budget.validate(s)?;

    if s.len() == 1 {
        // Σ^m = {A^m}: both radii equal ρ(A) exactly.
        let mut bracket = spectral_radius(&s.members[0]);
        bracket.method = format!("singleton/{}", bracket.method);
        return Ok(SetRadius {
            bracket,
            stats: EnumerationStats {
                products_evaluated: 1,
                depth_reached: 1,
                pruned_prefixes: 0,
                delta: None,
                lower_word: vec![0],
                exhausted: true,
            },
        });
    }

    let family = NormFamily::for_set(s);
    let n = s.dim;
    let nn = n * n;
    let k = s.len();
    let member_norms: Vec<[f64; NORM_COUNT]> = s.members.iter().map(|m| family.norms(m.as_slice(), n)).collect();
    let pruning = budget.pruning;

    let mut lower = 0.0f64;
    let mut lower_depth = 1usize;
    let mut lower_word: Vec<u32> = vec![0];
    let mut upper = f64::INFINITY;
    let mut upper_depth = 1usize;
    let mut discarded_max = [0.0f64; NORM_COUNT];
    let mut max_delta: Option<f64> = None;
    let mut evaluated: u64 = 0;
    let mut pruned: u64 = 0;
    let mut truncated = false;
    let mut exhausted = false;
    let mut depth_reached = 0;
    let mut history: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();

    let mut level = Level {
        mats: s.members.iter().flat_map(|m| m.as_slice().iter().copied()).collect(),
        ids: (0..k as u32).collect(),
        bound: member_norms.clone(),
    };
    let mut entry: (Vec<u32>, Vec<u32>) = (vec![0; k], (0..k as u32).collect());

    for depth in 1..=budget.max_depth {
        if depth > 1 {
            let needed = level.len() as u128 * k as u128;
            if u128::from(evaluated) + needed > budget.max_products as u128 {
                truncated = true;
                break;
            }
            let count = level.len() * k;
            let mut mats = vec![0.0; count * nn];
            mats.par_chunks_mut(k * nn).enumerate().for_each(|(p, out)| {
                let parent = &level.mats[p * nn..(p + 1) * nn];
                for (j, m) in s.members.iter().enumerate() {
                    mul_into(parent, m.as_slice(), n, &mut out[j * nn..(j + 1) * nn]);
                }
            });
            let mut bound = Vec::with_capacity(count);
            for b in &level.bound {
                for mn in &member_norms {
                    // ‖P A‖ <= ‖P‖ ‖A‖ <= max(b(P), ‖A‖)^{len}
                    bound.push(max_norms(*b, *mn));
                }
            }
            entry = (
                level.ids.iter().flat_map(|&h| std::iter::repeat_n(h, k)).collect(),
                (0..count).map(|i| (i % k) as u32).collect(),
            );
            level = Level {
                mats,
                ids: (0..count as u32).collect(),
                bound,
            };
        }

        let prev_lower = lower;
        let target = prev_lower.powi(depth as i32);
        let evals: Vec<Eval> = level
            .mats
            .par_chunks(nn)
            .map(|p| {
                let norms = family.norms(p, n);
                let cap = root(min_of(&norms), depth);
                // ρ(P)^{1/d} <= ‖P‖^{1/d}, so a product whose smallest norm
                // is already below the running lower bound cannot raise it.
                let rho_root = if cap < prev_lower {
                    0.0
                } else {
                    root(product_radius_lower(&NonNegMatrix::from_parts(n, p.to_vec()), target), depth)
                };
                Eval { rho_root, norms }
            })
            .collect();
        evaluated += level.len() as u64;
        depth_reached = depth;
        history.push(std::mem::take(&mut entry));

        for (i, ev) in evals.iter().enumerate() {
            // Level order is lexicographic, so within a level the first
            // maximiser already has the smallest word.
            let better = ev.rho_root > lower
                || (ev.rho_root == lower
                    && ev.rho_root > 0.0
                    && depth != lower_depth
                    && word_of(&history, depth, i) < lower_word);
            if better {
                lower = ev.rho_root;
                lower_depth = depth;
                lower_word = word_of(&history, depth, i);
            }
        }

        let level_upper = match pruning {
            Pruning::Off => {
                let maxima = evals.iter().fold([0.0; NORM_COUNT], |acc, e| max_norms(acc, e.norms));
                root(min_of(&maxima), depth)
            }
            Pruning::Gripenberg { .. } => {
                for (b, ev) in level.bound.iter_mut().zip(&evals) {
                    for (bk, nk) in b.iter_mut().zip(ev.norms) {
                        *bk = bk.min(root(nk, depth));
                    }
                }
                min_of(&level.bound.iter().fold(discarded_max, |acc, b| max_norms(acc, *b)))
            }
        };
        if level_upper < upper {
            upper = level_upper;
            upper_depth = depth;
        }

        if let Pruning::Gripenberg { delta } = pruning {
            let delta = delta.unwrap_or(DEFAULT_RELATIVE_DELTA * upper);
            max_delta = Some(max_delta.map_or(delta, |d: f64| d.max(delta)));
            let threshold = lower + delta;
            let before = level.len();
            let mut kept = Level {
                mats: Vec::with_capacity(level.mats.len()),
                ids: Vec::with_capacity(before),
                bound: Vec::with_capacity(before),
            };
            for i in 0..before {
                let b = level.bound[i];
                if b.iter().all(|&x| x <= threshold) {
                    discarded_max = max_norms(discarded_max, b);
                } else {
                    kept.ids.push(level.ids[i]);
                    kept.mats.extend_from_slice(&level.mats[i * nn..(i + 1) * nn]);
                    kept.bound.push(b);
                }
            }
            pruned += (before - kept.len()) as u64;
            level = kept;
            if level.len() == 0 {
                let final_upper = min_of(&discarded_max);
                if final_upper < upper {
                    upper = final_upper;
                    upper_depth = depth;
                }
                exhausted = true;
                break;
            }
        }
    }

    if lower > upper {
        // Only rounding can cross the endpoints; keep the interval ordered.
        upper = lower;
    }
    let method = match pruning {
        Pruning::Off => "exhaustive".to_string(),
        Pruning::Gripenberg { .. } => "gripenberg".to_string(),
    };
    Ok(SetRadius {
        bracket: RadiusBracket {
            lower,
            upper,
            lower_depth,
            upper_depth,
            method,
            truncated,
        },
        stats: EnumerationStats {
            products_evaluated: evaluated,
            depth_reached,
            pruned_prefixes: pruned,
            delta: max_delta,
            lower_word,
            exhausted,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::WeightVector;

    fn m(rows: &[&[f64]]) -> NonNegMatrix {
        NonNegMatrix::from_rows(rows).unwrap()
    }

    fn shifts() -> MatrixSet {
        MatrixSet::new(vec![m(&[&[0.0, 2.0], &[0.0, 0.0]]), m(&[&[0.0, 0.0], &[2.0, 0.0]])]).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(MatrixSet::new(vec![]).is_err());
        assert!(MatrixSet::new(vec![NonNegMatrix::ones(2), NonNegMatrix::ones(3)]).is_err());
        assert_eq!(shifts().len(), 2);
    }

    #[test]
    fn set_power_examples() {
        let a = m(&[&[1.0, 1.0], &[0.0, 2.0]]);
        let cube = set_power(&MatrixSet::singleton(a.clone()), 3, 100).unwrap();
        let a2 = mat_product_unchecked(&a, &a);
        assert_eq!(cube.members(), &[mat_product_unchecked(&a2, &a)]);
        assert_eq!(set_power(&shifts(), 3, 100).unwrap().len(), 8);
        assert_eq!(set_power(&shifts(), 1, 100).unwrap().members(), shifts().members());
        assert!(matches!(set_power(&shifts(), 3, 7), Err(Error::Budget { needed: 8, cap: 7 })));
        assert!(set_power(&shifts(), 0, 100).is_err());
    }

    #[test]
    fn set_power_order_is_lexicographic() {
        let s = shifts();
        let p = set_power(&s, 2, 10).unwrap();
        let (a, b) = (&s.members()[0], &s.members()[1]);
        let expect = [
            mat_product_unchecked(a, a),
            mat_product_unchecked(a, b),
            mat_product_unchecked(b, a),
            mat_product_unchecked(b, b),
        ];
        assert_eq!(p.members(), &expect);
    }

    #[test]
    fn set_product_examples() {
        let a = m(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let b = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let c = m(&[&[3.0, 0.0], &[1.0, 1.0]]);
        let sa = MatrixSet::singleton(a.clone());
        let sb = MatrixSet::singleton(b.clone());
        assert_eq!(set_product(&sa, &sb).unwrap().members(), &[mat_product_unchecked(&a, &b)]);
        let ab = MatrixSet::new(vec![a.clone(), b.clone()]).unwrap();
        let sc = MatrixSet::singleton(c.clone());
        assert_eq!(
            set_product(&ab, &sc).unwrap().members(),
            &[mat_product_unchecked(&a, &c), mat_product_unchecked(&b, &c)]
        );
        let three = MatrixSet::new(vec![a, b, c]).unwrap();
        assert_eq!(set_product(&shifts(), &three).unwrap().len(), 6);
        assert!(set_product(&shifts(), &MatrixSet::singleton(NonNegMatrix::ones(3))).is_err());
    }

    #[test]
    fn hadamard_mean_of_sets_examples() {
        let half = WeightVector::strict(vec![0.5, 0.5]).unwrap();
        let a = m(&[&[4.0, 1.0], &[0.0, 9.0]]);
        let b = m(&[&[1.0, 4.0], &[3.0, 1.0]]);
        let got = hadamard_mean_of_sets(&[&MatrixSet::singleton(a.clone()), &MatrixSet::singleton(b.clone())], &half)
            .unwrap();
        assert_eq!(got.members(), &[hadamard_geometric_mean(&[&a, &b], &half).unwrap()]);

        let three = MatrixSet::new(vec![a.clone(), b.clone(), NonNegMatrix::ones(2)]).unwrap();
        let six = hadamard_mean_of_sets(&[&shifts(), &three], &half).unwrap();
        assert_eq!(six.len(), 6);
        // Second set varies fastest.
        assert_eq!(
            six.members()[1],
            hadamard_geometric_mean(&[&shifts().members()[0], &b], &half).unwrap()
        );

        let j = MatrixSet::singleton(NonNegMatrix::ones(3));
        let w = WeightVector::strict(vec![0.2, 0.3, 0.5]).unwrap();
        let jj = hadamard_mean_of_sets(&[&j, &j, &j], &w).unwrap();
        for (got, want) in jj.members()[0].as_slice().iter().zip(NonNegMatrix::ones(3).as_slice()) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(hadamard_mean_of_sets(&[&shifts()], &half).is_err());
    }

    #[test]
    fn gsr_lower_and_jsr_upper_on_shifts() {
        let s = shifts();
        assert_eq!(gsr_lower(&s, 2, 100).unwrap(), 2.0);
        assert_eq!(gsr_lower(&s, 1, 100).unwrap(), 0.0);
        assert_eq!(jsr_upper(&s, 1, 100).unwrap(), 2.0);
        assert!(gsr_lower(&s, 10, 100).is_err());
    }

    #[test]
    fn jsr_upper_singletons_and_scaling() {
        let id = MatrixSet::singleton(NonNegMatrix::identity(3));
        for k in 1..5 {
            assert_eq!(jsr_upper(&id, k, 10).unwrap(), 1.0);
        }
        let s = MatrixSet::new(vec![m(&[&[0.3, 0.9], &[0.2, 0.1]]), m(&[&[0.5, 0.0], &[0.7, 0.4]])]).unwrap();
        let scaled = s.scale(3.0).unwrap();
        for k in 1..4 {
            let a = jsr_upper(&s, k, 100).unwrap();
            let b = jsr_upper(&scaled, k, 100).unwrap();
            assert!((b - 3.0 * a).abs() <= 1e-12 * b, "{a} {b}");
        }
    }

    #[test]
    fn min_of_two_norms_per_product_is_not_an_upper_bound() {
        // Each member has min(row, col) norm 1 but ρ(AB)^{1/2} = √2.
        let s = MatrixSet::new(vec![m(&[&[1.0, 1.0], &[0.0, 0.0]]), m(&[&[1.0, 0.0], &[1.0, 0.0]])]).unwrap();
        let per_product_min = s
            .members()
            .iter()
            .map(crate::matrix::operator_norm)
            .fold(0.0, f64::max);
        assert_eq!(per_product_min, 1.0);
        let lo = gsr_lower(&s, 2, 100).unwrap();
        assert!((lo - 2f64.sqrt()).abs() < 1e-12);
        assert!(jsr_upper(&s, 1, 100).unwrap() >= lo);
    }

    #[test]
    fn shift_pair_bracket_is_tight_at_depth_two() {
        let r = radius_bracket(&shifts(), &EnumerationBudget::with_depth(2)).unwrap();
        assert_eq!((r.lower, r.upper), (2.0, 2.0));
        assert_eq!(r.lower_depth, 2);
    }

    #[test]
    fn lower_word_is_lexicographically_smallest() {
        // AB and BA both have ρ = 4 at depth 2.
        for budget in [EnumerationBudget::with_depth(4), EnumerationBudget::with_depth(4).pruned(None)] {
            let r = radius_bracket_detailed(&shifts(), &budget).unwrap();
            assert_eq!(r.stats.lower_word, vec![0, 1]);
            assert_eq!(r.bracket.lower_depth, 2);
        }
        let s = MatrixSet::new(vec![
            m(&[&[0.2, 0.0], &[0.0, 0.1]]),
            m(&[&[0.0, 1.0], &[0.0, 0.0]]),
            m(&[&[0.0, 0.0], &[1.0, 0.0]]),
        ])
        .unwrap();
        let r = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(3)).unwrap();
        assert_eq!(r.stats.lower_word, vec![1, 2]);
    }

    #[test]
    fn zero_set_and_singletons() {
        let z = MatrixSet::singleton(NonNegMatrix::zeros(3));
        let r = radius_bracket(&z, &EnumerationBudget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
        let zz = MatrixSet::new(vec![NonNegMatrix::zeros(2), NonNegMatrix::zeros(2)]).unwrap();
        let r = radius_bracket(&zz, &EnumerationBudget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
        let id = MatrixSet::singleton(NonNegMatrix::identity(2));
        let r = radius_bracket(&id, &EnumerationBudget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (1.0, 1.0));
    }

    #[test]
    fn budget_truncation_is_flagged_not_fatal() {
        let s = MatrixSet::new(vec![
            m(&[&[0.3, 0.9], &[0.2, 0.1]]),
            m(&[&[0.5, 0.0], &[0.7, 0.4]]),
            m(&[&[0.1, 0.2], &[0.6, 0.3]]),
        ])
        .unwrap();
        let budget = EnumerationBudget {
            max_depth: 6,
            max_products: 20,
            pruning: Pruning::Off,
        };
        let r = radius_bracket_detailed(&s, &budget).unwrap();
        assert!(r.bracket.truncated);
        assert_eq!(r.stats.depth_reached, 2);
        assert_eq!(r.stats.products_evaluated, 12);
        assert!(r.bracket.lower <= r.bracket.upper);
        let too_small = EnumerationBudget {
            max_products: 2,
            ..budget
        };
        assert!(matches!(radius_bracket(&s, &too_small), Err(Error::Budget { .. })));
    }

    #[test]
    fn pruning_never_loosens_upper_by_more_than_delta() {
        let s = MatrixSet::new(vec![
            m(&[&[0.9, 0.2, 0.0], &[0.1, 0.3, 0.4], &[0.0, 0.5, 0.2]]),
            m(&[&[0.2, 0.0, 0.3], &[0.6, 0.1, 0.0], &[0.2, 0.2, 0.2]]),
        ])
        .unwrap();
        let exh = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(8)).unwrap();
        let pr = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(8).pruned(None)).unwrap();
        let delta = pr.stats.delta.unwrap();
        assert!(pr.bracket.upper <= exh.bracket.upper + delta);
        assert!(pr.bracket.lower >= exh.bracket.lower - delta);
        assert!(pr.stats.products_evaluated <= exh.stats.products_evaluated);
        assert!(pr.bracket.lower <= exh.bracket.upper && exh.bracket.lower <= pr.bracket.upper);
    }

    #[test]
    fn depth_one_pruning_is_a_no_op() {
        let s = shifts();
        let a = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(1)).unwrap();
        let b = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(1).pruned(None)).unwrap();
        assert_eq!(a.bracket.lower, b.bracket.lower);
        assert_eq!(a.stats.products_evaluated, b.stats.products_evaluated);
    }

    #[test]
    fn invalid_budgets() {
        let s = shifts();
        assert!(radius_bracket(&s, &EnumerationBudget::with_depth(0)).is_err());
        assert!(radius_bracket(&s, &EnumerationBudget::with_depth(2).pruned(Some(-1.0))).is_err());
    }
}
