//! Spectral-radius inequality chains as bracket-ordering checks.
//!
//! Each chain is a small graph of terms `t_0, t_1, ...`; a term is a
//! product `Π r(X_j)^{e_j}` of radii of operator expressions, and every
//! link `(i, j)` asserts `t_i <= t_j`. A link is reported as a violation
//! only when the certified lower bound of `t_i` exceeds the certified upper
//! bound of `t_j` by more than the relative tolerance, so a violation is a
//! genuine counterexample rather than numerical noise.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_hadamard_mean, to_matrix, KernelModel};
use crate::matrix::{hadamard_geometric_mean, mat_product, NonNegMatrix, WeightMode, WeightVector};
use crate::sampling::{random_matrix, random_set, random_weights};
use crate::set_radius::{hadamard_mean_of_sets, radius_bracket, set_product, EnumerationBudget, MatrixSet};
use crate::spectral::{spectral_radius, spectral_radius_exact_small, RadiusBracket};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const ALPHA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Operator expression over the chain inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Input(usize),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
    /// `X_1^(w_1) ∘ ... ∘ X_m^(w_m)`; relaxed unit weights give the plain
    /// Hadamard product.
    Mean(Vec<Expr>, Vec<f64>, WeightMode),
}

fn inp(i: usize) -> Expr {
    Expr::Input(i)
}

fn prod(items: Vec<Expr>) -> Expr {
    Expr::Product(items)
}

fn pow(e: Expr, k: u32) -> Expr {
    if k == 1 {
        e
    } else {
        Expr::Power(Box::new(e), k)
    }
}

fn had(items: Vec<Expr>) -> Expr {
    let w = vec![1.0; items.len()];
    Expr::Mean(items, w, WeightMode::RelaxedSumGeOne)
}

fn mean(items: Vec<Expr>, w: Vec<f64>) -> Expr {
    Expr::Mean(items, w, WeightMode::StrictSumOne)
}

fn half(a: Expr, b: Expr) -> Expr {
    mean(vec![a, b], vec![0.5, 0.5])
}

impl Expr {
    /// Number of members when the inputs are sets of the given sizes.
    pub fn set_size(&self, sizes: &[usize]) -> u128 {
        match self {
            Expr::Input(i) => sizes[*i] as u128,
            Expr::Product(items) | Expr::Mean(items, _, _) => {
                items.iter().fold(1u128, |acc, e| acc.saturating_mul(e.set_size(sizes)))
            }
            Expr::Power(e, k) => {
                let base = e.set_size(sizes);
                (0..*k).fold(1u128, |acc, _| acc.saturating_mul(base))
            }
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        match self {
            Expr::Input(i) => names[*i].clone(),
            Expr::Product(items) => items.iter().map(|e| e.render_factor(names)).collect(),
            Expr::Power(e, k) => format!("{}^{k}", e.render_atom(names)),
            Expr::Mean(items, w, mode) => {
                if *mode == WeightMode::RelaxedSumGeOne && w.iter().all(|&x| x == 1.0) {
                    items.iter().map(|e| e.render_atom(names)).collect::<Vec<_>>().join("∘")
                } else {
                    items
                        .iter()
                        .zip(w)
                        .map(|(e, &x)| format!("{}^({})", e.render_atom(names), fmt_fraction(x)))
                        .collect::<Vec<_>>()
                        .join("∘")
                }
            }
        }
    }

    fn render_atom(&self, names: &[String]) -> String {
        match self {
            Expr::Input(_) => self.render(names),
            _ => format!("({})", self.render(names)),
        }
    }

    fn render_factor(&self, names: &[String]) -> String {
        match self {
            Expr::Mean(..) => format!("({})", self.render(names)),
            _ => self.render(names),
        }
    }

    fn eval<O: Operand>(&self, inputs: &[O]) -> Result<O> {
        match self {
            Expr::Input(i) => Ok(inputs[*i].clone()),
            Expr::Product(items) => {
                let mut acc = items[0].eval(inputs)?;
                for e in &items[1..] {
                    acc = acc.compose(&e.eval(inputs)?)?;
                }
                Ok(acc)
            }
            Expr::Power(e, k) => {
                let base = e.eval(inputs)?;
                let mut acc = base.clone();
                for _ in 1..*k {
                    acc = acc.compose(&base)?;
                }
                Ok(acc)
            }
            Expr::Mean(items, w, mode) => {
                let vals = items.iter().map(|e| e.eval(inputs)).collect::<Result<Vec<_>>>()?;
                let refs: Vec<&O> = vals.iter().collect();
                O::mean(&refs, &WeightVector::new(w.clone(), *mode)?)
            }
        }
    }
}

/// Shortest `p/q` with `q <= 12` matching `x` to 1e-12, else a decimal.
fn fmt_fraction(x: f64) -> String {
    for q in 1..=12u32 {
        let p = (x * q as f64).round();
        if (p / q as f64 - x).abs() <= 1e-12 {
            return if q == 1 { format!("{p}") } else { format!("{p}/{q}") };
        }
    }
    format!("{x:.6}")
}

/// Operations an expression needs from its operand type.
pub trait Operand: Clone + Send + Sync {
    fn compose(&self, other: &Self) -> Result<Self>;
    fn mean(items: &[&Self], w: &WeightVector) -> Result<Self>;
}

impl Operand for NonNegMatrix {
    fn compose(&self, other: &Self) -> Result<Self> {
        mat_product(self, other)
    }

    fn mean(items: &[&Self], w: &WeightVector) -> Result<Self> {
        hadamard_geometric_mean(items, w)
    }
}

impl Operand for KernelModel {
    fn compose(&self, other: &Self) -> Result<Self> {
        KernelModel::compose(self, other)
    }

    fn mean(items: &[&Self], w: &WeightVector) -> Result<Self> {
        kernel_hadamard_mean(items, w)
    }
}

impl Operand for MatrixSet {
    fn compose(&self, other: &Self) -> Result<Self> {
        set_product(self, other)
    }

    fn mean(items: &[&Self], w: &WeightVector) -> Result<Self> {
        hadamard_mean_of_sets(items, w)
    }
}

/// `Π r(X_j)^{e_j}`; factors with exponent 0 are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub factors: Vec<(Expr, f64)>,
}

impl Term {
    fn new(factors: Vec<(Expr, f64)>) -> Self {
        Self {
            factors: factors.into_iter().filter(|(_, e)| *e != 0.0).collect(),
        }
    }

    fn single(e: Expr, exponent: f64) -> Self {
        Self::new(vec![(e, exponent)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainShape {
    pub terms: Vec<Term>,
    /// `(i, j)` asserts `terms[i] <= terms[j]`.
    pub links: Vec<(usize, usize)>,
}

impl ChainShape {
    fn linear(terms: Vec<Term>) -> Self {
        let links = (1..terms.len()).map(|i| (i - 1, i)).collect();
        Self { terms, links }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Single operators: matrices, or kernel models where allowed.
    Single,
    /// Finite matrix sets; radii are `ρ = ρ̂`.
    Set,
}

/// Chain parameters; unused ones are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_k")]
    pub k: u32,
    /// Positive weights summing to 1, one per input; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_k() -> u32 {
    1
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            k: default_k(),
            weights: None,
        }
    }
}

impl ChainParams {
    fn weights_for(&self, m: usize) -> Result<Vec<f64>> {
        match &self.weights {
            Some(w) if w.len() != m => Err(Error::ChainInput(format!("{} weights for {m} inputs", w.len()))),
            Some(w) => Ok(WeightVector::strict(w.clone())?.weights().to_vec()),
            None => Ok(vec![1.0 / m as f64; m]),
        }
    }
}

pub struct ChainSpec {
    pub id: &'static str,
    pub statement: &'static str,
    pub domain: Domain,
    pub min_inputs: usize,
    pub max_inputs: Option<usize>,
    /// Whether kernel models are accepted as inputs.
    pub kernels: bool,
    pub uses_alpha: bool,
    pub uses_k: bool,
    pub uses_weights: bool,
    build: fn(usize, &ChainParams) -> Result<ChainShape>,
}

impl std::fmt::Debug for ChainSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainSpec").field("id", &self.id).finish_non_exhaustive()
    }
}

impl ChainSpec {
    /// Terms and links for `m` inputs.
    pub fn shape(&self, m: usize, params: &ChainParams) -> Result<ChainShape> {
        if m < self.min_inputs || self.max_inputs.is_some_and(|mx| m > mx) {
            return Err(Error::ChainInput(format!(
                "{} takes {} inputs, got {m}",
                self.id,
                match self.max_inputs {
                    Some(mx) if mx == self.min_inputs => format!("{mx}"),
                    Some(mx) => format!("{}..={mx}", self.min_inputs),
                    None => format!("at least {}", self.min_inputs),
                }
            )));
        }
        if !(0.0..=1.0).contains(&params.alpha) {
            return Err(Error::ChainInput(format!("alpha must lie in [0,1], got {}", params.alpha)));
        }
        if params.k == 0 {
            return Err(Error::ChainInput("k must be at least 1".into()));
        }
        (self.build)(m, params)
    }

    pub fn input_names(&self, m: usize) -> Vec<String> {
        match (self.domain, self.min_inputs == 2 && self.max_inputs == Some(2)) {
            (Domain::Single, true) => vec!["A".into(), "B".into()],
            (Domain::Set, true) => vec!["Ψ".into(), "Σ".into()],
            (Domain::Single, false) => (1..=m).map(|i| format!("A{i}")).collect(),
            (Domain::Set, false) => (1..=m).map(|i| format!("Ψ{i}")).collect(),
        }
    }
}

fn c1(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    Ok(ChainShape::linear(vec![
        Term::single(had(vec![a.clone(), b.clone()]), 1.0),
        Term::single(prod(vec![had(vec![a.clone(), a.clone()]), had(vec![b.clone(), b.clone()])]), 0.5),
        Term::single(prod(vec![a, b]), 1.0),
    ]))
}

fn c2(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    let ab = prod(vec![a.clone(), b.clone()]);
    let ba = prod(vec![b.clone(), a.clone()]);
    Ok(ChainShape::linear(vec![
        Term::single(had(vec![a, b]), 1.0),
        Term::single(had(vec![ab.clone(), ba]), 0.5),
        Term::single(ab, 1.0),
    ]))
}

fn c3(m: usize, _: &ChainParams) -> Result<ChainShape> {
    let items: Vec<Expr> = (0..m).map(inp).collect();
    Ok(ChainShape::linear(vec![
        Term::single(had(items.clone()), 1.0),
        Term::single(prod(items), 1.0),
    ]))
}

fn c4(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    let ab = prod(vec![a.clone(), b.clone()]);
    Ok(ChainShape::linear(vec![
        Term::single(had(vec![a.clone(), b.clone()]), 1.0),
        Term::single(prod(vec![had(vec![a.clone(), a]), had(vec![b.clone(), b])]), 0.5),
        Term::single(had(vec![ab.clone(), ab.clone()]), 0.5),
        Term::single(ab, 1.0),
    ]))
}

fn c5(_: usize, p: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    let ab = prod(vec![a.clone(), b.clone()]);
    let ba = prod(vec![b.clone(), a.clone()]);
    Ok(ChainShape::linear(vec![
        Term::single(had(vec![a.clone(), b.clone()]), 1.0),
        Term::single(prod(vec![had(vec![a.clone(), a]), had(vec![b.clone(), b])]), 0.5),
        Term::new(vec![
            (had(vec![ab.clone(), ab.clone()]), p.alpha / 2.0),
            (had(vec![ba.clone(), ba]), (1.0 - p.alpha) / 2.0),
        ]),
        Term::single(ab, 1.0),
    ]))
}

fn c6(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    let ab = prod(vec![a.clone(), b.clone()]);
    let ba = prod(vec![b.clone(), a.clone()]);
    Ok(ChainShape::linear(vec![
        Term::single(had(vec![a, b]), 1.0),
        Term::single(had(vec![ab.clone(), ba.clone()]), 0.5),
        Term::new(vec![
            (had(vec![ab.clone(), ab.clone()]), 0.25),
            (had(vec![ba.clone(), ba]), 0.25),
        ]),
        Term::single(ab, 1.0),
    ]))
}

fn c7(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    Ok(ChainShape::linear(vec![
        Term::single(half(a.clone(), b.clone()), 1.0),
        Term::single(prod(vec![a, b]), 0.5),
    ]))
}

fn c8(m: usize, _: &ChainParams) -> Result<ChainShape> {
    let items: Vec<Expr> = (0..m).map(inp).collect();
    let w = vec![1.0 / m as f64; m];
    Ok(ChainShape::linear(vec![
        Term::single(mean(items.clone(), w), 1.0),
        Term::single(prod(items), 1.0 / m as f64),
    ]))
}

fn cyclic_products(m: usize) -> Vec<Expr> {
    (0..m).map(|j| prod((0..m).map(|i| inp((j + i) % m)).collect())).collect()
}

fn c9(m: usize, _: &ChainParams) -> Result<ChainShape> {
    let items: Vec<Expr> = (0..m).map(inp).collect();
    let w = vec![1.0 / m as f64; m];
    Ok(ChainShape::linear(vec![
        Term::single(mean(items.clone(), w.clone()), 1.0),
        Term::single(mean(cyclic_products(m), w), 1.0 / m as f64),
        Term::single(prod(items), 1.0 / m as f64),
    ]))
}

fn c10(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (a, b) = (inp(0), inp(1));
    let ab = prod(vec![a.clone(), b.clone()]);
    let ba = prod(vec![b.clone(), a.clone()]);
    Ok(ChainShape::linear(vec![
        Term::single(half(a, b), 1.0),
        Term::single(half(ab.clone(), ba), 0.5),
        Term::single(ab, 0.5),
    ]))
}

fn c11(m: usize, p: &ChainParams) -> Result<ChainShape> {
    let w = p.weights_for(m)?;
    let items: Vec<Expr> = (0..m).map(inp).collect();
    Ok(ChainShape::linear(vec![
        Term::single(mean(items.clone(), w.clone()), 1.0),
        Term::new(items.into_iter().zip(w).collect()),
    ]))
}

fn c12(m: usize, p: &ChainParams) -> Result<ChainShape> {
    c8(m, p)
}

fn c13(_: usize, p: &ChainParams) -> Result<ChainShape> {
    c7(2, p)
}

fn c14(_: usize, p: &ChainParams) -> Result<ChainShape> {
    let (s, t) = (inp(0), inp(1));
    let st = prod(vec![s.clone(), t.clone()]);
    let ts = prod(vec![t.clone(), s.clone()]);
    let st_st = half(st.clone(), st.clone());
    let ts_ts = half(ts.clone(), ts.clone());
    Ok(ChainShape {
        terms: vec![
            Term::single(half(s.clone(), t.clone()), 1.0),
            Term::single(half(st.clone(), ts), 0.5),
            Term::new(vec![(st_st.clone(), 0.25), (ts_ts.clone(), 0.25)]),
            Term::single(st, 0.5),
            Term::single(prod(vec![half(s.clone(), s), half(t.clone(), t)]), 0.5),
            Term::new(vec![(st_st, p.alpha / 2.0), (ts_ts, (1.0 - p.alpha) / 2.0)]),
        ],
        links: vec![(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 3)],
    })
}

fn c15(_: usize, _: &ChainParams) -> Result<ChainShape> {
    let (s, t) = (inp(0), inp(1));
    let st = prod(vec![s.clone(), t.clone()]);
    let ts = prod(vec![t.clone(), s.clone()]);
    Ok(ChainShape::linear(vec![
        Term::single(half(st, ts), 1.0),
        Term::single(prod(vec![pow(s, 2), pow(t, 2)]), 0.5),
    ]))
}

fn c16(m: usize, p: &ChainParams) -> Result<ChainShape> {
    let w = p.weights_for(m)?;
    let items: Vec<Expr> = (0..m).map(inp).collect();
    let powered: Vec<Expr> = items.iter().map(|e| pow(e.clone(), p.k)).collect();
    Ok(ChainShape::linear(vec![
        Term::single(mean(items.clone(), w.clone()), 1.0),
        Term::single(mean(powered, w.clone()), 1.0 / p.k as f64),
        Term::new(items.into_iter().zip(w).collect()),
    ]))
}

fn c17(_: usize, p: &ChainParams) -> Result<ChainShape> {
    let halves = ChainParams {
        weights: None,
        ..p.clone()
    };
    c16(2, &halves)
}

fn c19(_: usize, p: &ChainParams) -> Result<ChainShape> {
    let (s, t) = (inp(0), inp(1));
    let st = prod(vec![s.clone(), t.clone()]);
    let ts = prod(vec![t, s]);
    let k = p.k;
    let kf = k as f64;
    let st_k = pow(st.clone(), k);
    let ts_k = pow(ts.clone(), k);
    Ok(ChainShape::linear(vec![
        Term::new(vec![
            (half(st.clone(), st.clone()), p.alpha / 2.0),
            (half(ts.clone(), ts), (1.0 - p.alpha) / 2.0),
        ]),
        Term::new(vec![
            (half(st_k.clone(), st_k), p.alpha / (2.0 * kf)),
            (half(ts_k.clone(), ts_k), (1.0 - p.alpha) / (2.0 * kf)),
        ]),
        Term::single(st, 0.5),
    ]))
}

macro_rules! chain {
    ($id:literal, $stmt:literal, $dom:ident, $min:expr, $max:expr, $ker:literal, $a:literal, $k:literal, $w:literal, $build:ident) => {
        ChainSpec {
            id: $id,
            statement: $stmt,
            domain: Domain::$dom,
            min_inputs: $min,
            max_inputs: $max,
            kernels: $ker,
            uses_alpha: $a,
            uses_k: $k,
            uses_weights: $w,
            build: $build,
        }
    };
}

static CATALOG: [ChainSpec; 19] = [
    chain!("C1", "ρ(A∘B) ≤ ρ((A∘A)(B∘B))^½ ≤ ρ(AB)", Single, 2, Some(2), false, false, false, false, c1),
    chain!("C2", "ρ(A∘B) ≤ ρ(AB∘BA)^½ ≤ ρ(AB)", Single, 2, Some(2), false, false, false, false, c2),
    chain!("C3", "ρ(A1∘…∘Am) ≤ ρ(A1…Am)", Single, 2, None, false, false, false, false, c3),
    chain!("C4", "ρ(A∘B) ≤ ρ((A∘A)(B∘B))^½ ≤ ρ(AB∘AB)^½ ≤ ρ(AB)", Single, 2, Some(2), false, false, false, false, c4),
    chain!("C5", "ρ(A∘B) ≤ ρ((A∘A)(B∘B))^½ ≤ ρ(AB∘AB)^(α/2) ρ(BA∘BA)^((1-α)/2) ≤ ρ(AB)", Single, 2, Some(2), false, true, false, false, c5),
    chain!("C6", "ρ(A∘B) ≤ ρ(AB∘BA)^½ ≤ ρ(AB∘AB)^¼ ρ(BA∘BA)^¼ ≤ ρ(AB)", Single, 2, Some(2), false, false, false, false, c6),
    chain!("C7", "ρ(A^(½)∘B^(½)) ≤ ρ(AB)^½", Single, 2, Some(2), true, false, false, false, c7),
    chain!("C8", "ρ(A1^(1/m)∘…∘Am^(1/m)) ≤ ρ(A1…Am)^(1/m)", Single, 2, None, true, false, false, false, c8),
    chain!("C9", "ρ(A1^(1/m)∘…∘Am^(1/m)) ≤ ρ(P1^(1/m)∘…∘Pm^(1/m))^(1/m) ≤ ρ(A1…Am)^(1/m)", Single, 2, None, true, false, false, false, c9),
    chain!("C10", "ρ(A^(½)∘B^(½)) ≤ ρ((AB)^(½)∘(BA)^(½))^½ ≤ ρ(AB)^½", Single, 2, Some(2), true, false, false, false, c10),
    chain!("C11", "r(Ψ1^(α1)∘…∘Ψm^(αm)) ≤ r(Ψ1)^α1 … r(Ψm)^αm", Set, 1, None, false, false, false, true, c11),
    chain!("C12", "r(Ψ1^(1/m)∘…∘Ψm^(1/m)) ≤ r(Ψ1…Ψm)^(1/m)", Set, 2, None, false, false, false, false, c12),
    chain!("C13", "r(Ψ^(½)∘Σ^(½)) ≤ r(ΨΣ)^½", Set, 2, Some(2), false, false, false, false, c13),
    chain!("C14", "r(Ψ^(½)∘Σ^(½)) ≤ r((ΨΣ)^(½)∘(ΣΨ)^(½))^½ ≤ r((ΨΣ)^(½)∘(ΨΣ)^(½))^¼ r((ΣΨ)^(½)∘(ΣΨ)^(½))^¼ ≤ r(ΨΣ)^½ and r(Ψ^(½)∘Σ^(½)) ≤ r((Ψ^(½)∘Ψ^(½))(Σ^(½)∘Σ^(½)))^½ ≤ r((ΨΣ)^(½)∘(ΨΣ)^(½))^(α/2) r((ΣΨ)^(½)∘(ΣΨ)^(½))^((1-α)/2) ≤ r(ΨΣ)^½", Set, 2, Some(2), false, true, false, false, c14),
    chain!("C15", "r((ΨΣ)^(½)∘(ΣΨ)^(½)) ≤ r(Ψ²Σ²)^½", Set, 2, Some(2), false, false, false, false, c15),
    chain!("C16", "r(Ψ1^(α1)∘…∘Ψm^(αm)) ≤ r((Ψ1^k)^(α1)∘…∘(Ψm^k)^(αm))^(1/k) ≤ r(Ψ1)^α1 … r(Ψm)^αm", Set, 1, None, false, false, true, true, c16),
    chain!("C17", "r(Ψ^(½)∘Σ^(½)) ≤ r((Ψ^k)^(½)∘(Σ^k)^(½))^(1/k) ≤ r(Ψ)^½ r(Σ)^½", Set, 2, Some(2), false, false, true, false, c17),
    chain!("C18", "ρ(A1^(α1)∘…∘Am^(αm)) ≤ ρ((A1^k)^(α1)∘…∘(Am^k)^(αm))^(1/k) ≤ ρ(A1)^α1 … ρ(Am)^αm", Single, 1, None, false, false, true, true, c16),
    chain!("C19", "r((ΨΣ)^(½)∘(ΨΣ)^(½))^(α/2) r((ΣΨ)^(½)∘(ΣΨ)^(½))^((1-α)/2) ≤ r(((ΨΣ)^k)^(½)∘((ΨΣ)^k)^(½))^(α/2k) r(((ΣΨ)^k)^(½)∘((ΣΨ)^k)^(½))^((1-α)/2k) ≤ r(ΨΣ)^½", Set, 2, Some(2), false, true, true, false, c19),
];

pub fn chain_catalog() -> &'static [ChainSpec] {
    &CATALOG
}

pub fn chain_by_id(id: &str) -> Option<&'static ChainSpec> {
    CATALOG.iter().find(|c| c.id.eq_ignore_ascii_case(id))
}

/// Inputs for one chain evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "items", rename_all = "snake_case")]
pub enum ChainInputs {
    Matrices(Vec<NonNegMatrix>),
    Kernels(Vec<KernelModel>),
    Sets(Vec<MatrixSet>),
}

impl ChainInputs {
    pub fn len(&self) -> usize {
        match self {
            ChainInputs::Matrices(v) => v.len(),
            ChainInputs::Kernels(v) => v.len(),
            ChainInputs::Sets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn summary(&self) -> InputSummary {
        match self {
            ChainInputs::Matrices(v) => InputSummary {
                kind: "matrices".into(),
                dims: v.iter().map(|m| m.dim()).collect(),
                sizes: None,
            },
            ChainInputs::Kernels(v) => InputSummary {
                kind: "kernels".into(),
                dims: v.iter().map(|k| k.n()).collect(),
                sizes: None,
            },
            ChainInputs::Sets(v) => InputSummary {
                kind: "sets".into(),
                dims: v.iter().map(|s| s.dim()).collect(),
                sizes: Some(v.iter().map(|s| s.len()).collect()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub budget: EnumerationBudget,
    pub tol: f64,
    /// Use the closed-form eigenvalue oracle for single matrices of
    /// dimension at most 3.
    pub exact_small: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            budget: EnumerationBudget::default(),
            tol: DEFAULT_TOL,
            exact_small: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violation,
    InconclusiveBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub kind: String,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub expression: String,
    pub exponent: f64,
    /// Absent when the operand could not be built within budget.
    pub bracket: Option<RadiusBracket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub expression: String,
    pub factors: Vec<FactorReport>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub left: usize,
    pub right: usize,
    pub verdict: Verdict,
    /// `upper(right) - lower(left)`; negative beyond tolerance means violation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub inputs: InputSummary,
    pub params: ParamsReport,
    pub terms: Vec<TermReport>,
    pub pairs: Vec<PairReport>,
    pub verdict: Verdict,
    /// Full inputs, attached only to violations so they can be replayed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<ChainInputs>,
}

impl ChainReport {
    /// One line per term, for terminals.
    pub fn render(&self) -> String {
        let mut out = format!("{} {:?}\n", self.id, self.verdict);
        for (i, t) in self.terms.iter().enumerate() {
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.12}"));
            let _ = writeln!(out, "  t{i} [{}, {}]  {}", fmt(t.lower), fmt(t.upper), t.expression);
        }
        out
    }
}

fn radius_of_matrix(m: &NonNegMatrix, exact_small: bool) -> RadiusBracket {
    let b = spectral_radius(m);
    if exact_small && m.dim() <= 3 {
        // The closed form can lose digits at repeated roots; clamping into
        // the certified enclosure keeps the value sound.
        let v = spectral_radius_exact_small(m).expect("dimension at most 3");
        let v = if v.is_finite() { v.clamp(b.lower, b.upper) } else { b.midpoint() };
        RadiusBracket::exact(v, "closed-form")
    } else {
        b
    }
}

enum Outcome {
    Bracket(RadiusBracket),
    OverBudget,
}

/// Evaluates every term and link of `spec` on `inputs`.
pub fn evaluate_chain(
    spec: &ChainSpec,
    inputs: &ChainInputs,
    params: &ChainParams,
    opts: &EvalOptions,
) -> Result<ChainReport> {
    let m = inputs.len();
    match (spec.domain, inputs) {
        (Domain::Single, ChainInputs::Matrices(_)) | (Domain::Set, ChainInputs::Sets(_)) => {}
        (Domain::Single, ChainInputs::Kernels(_)) if spec.kernels => {}
        _ => {
            return Err(Error::ChainInput(format!(
                "{} does not accept {} inputs",
                spec.id,
                inputs.summary().kind
            )))
        }
    }
    if !(opts.tol.is_finite() && opts.tol >= 0.0) {
        return Err(Error::ChainInput(format!("tolerance must be non-negative, got {}", opts.tol)));
    }
    let summary = inputs.summary();
    if summary.dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::ChainInput(format!("{} inputs have mixed dimensions {:?}", spec.id, summary.dims)));
    }
    let shape = spec.shape(m, params)?;
    let names = spec.input_names(m);

    let mut cache: HashMap<String, Outcome> = HashMap::new();
    let mut radius = |e: &Expr| -> Result<RadiusBracket> {
        let key = format!("{e:?}");
        if let Some(Outcome::Bracket(b)) = cache.get(&key) {
            return Ok(b.clone());
        }
        if let Some(Outcome::OverBudget) = cache.get(&key) {
            return Err(Error::Budget { needed: 0, cap: 0 });
        }
        let out = match inputs {
            ChainInputs::Matrices(v) => Outcome::Bracket(radius_of_matrix(&e.eval(v)?, opts.exact_small)),
            ChainInputs::Kernels(v) => Outcome::Bracket(spectral_radius(&to_matrix(&e.eval(v)?))),
            ChainInputs::Sets(v) => {
                let sizes: Vec<usize> = v.iter().map(|s| s.len()).collect();
                if e.set_size(&sizes) > opts.budget.max_products as u128 {
                    Outcome::OverBudget
                } else {
                    match radius_bracket(&e.eval(v)?, &opts.budget) {
                        Ok(b) => Outcome::Bracket(b),
                        Err(Error::Budget { .. }) => Outcome::OverBudget,
                        Err(other) => return Err(other),
                    }
                }
            }
        };
        let result = match &out {
            Outcome::Bracket(b) => Ok(b.clone()),
            Outcome::OverBudget => Err(Error::Budget { needed: 0, cap: 0 }),
        };
        cache.insert(key, out);
        result
    };

    let rname = if spec.domain == Domain::Set { "r" } else { "ρ" };
    let mut terms = Vec::with_capacity(shape.terms.len());
    for term in &shape.terms {
        let mut factors = Vec::with_capacity(term.factors.len());
        let (mut lo, mut hi) = (Some(1.0f64), Some(1.0f64));
        for (e, exponent) in &term.factors {
            let bracket = match radius(e) {
                Ok(b) => Some(b),
                Err(Error::Budget { .. }) => None,
                Err(other) => return Err(other),
            };
            match &bracket {
                Some(b) => {
                    lo = lo.map(|x| x * b.lower.powf(*exponent));
                    hi = hi.map(|x| x * b.upper.powf(*exponent));
                }
                None => {
                    lo = None;
                    hi = None;
                }
            }
            factors.push(FactorReport {
                expression: e.render(&names),
                exponent: *exponent,
                bracket,
            });
        }
        let expression = factors
            .iter()
            .map(|f| {
                if f.exponent == 1.0 {
                    format!("{rname}({})", f.expression)
                } else {
                    format!("{rname}({})^{}", f.expression, fmt_fraction(f.exponent))
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        terms.push(TermReport {
            expression,
            factors,
            lower: lo,
            upper: hi,
        });
    }

    let pairs: Vec<PairReport> = shape
        .links
        .iter()
        .map(|&(l, r)| match (terms[l].lower, terms[r].upper) {
            (Some(lo), Some(hi)) => PairReport {
                left: l,
                right: r,
                verdict: if lo > hi * (1.0 + opts.tol) {
                    Verdict::Violation
                } else {
                    Verdict::Consistent
                },
                slack: Some(hi - lo),
            },
            _ => PairReport {
                left: l,
                right: r,
                verdict: Verdict::InconclusiveBudget,
                slack: None,
            },
        })
        .collect();
    let verdict = overall(pairs.iter().map(|p| p.verdict));

    Ok(ChainReport {
        id: spec.id.to_string(),
        seed: None,
        trial: None,
        inputs: summary,
        params: ParamsReport {
            m,
            alpha: spec.uses_alpha.then_some(params.alpha),
            k: spec.uses_k.then_some(params.k),
            weights: if spec.uses_weights {
                Some(params.weights_for(m)?)
            } else {
                None
            },
        },
        terms,
        pairs,
        verdict,
        counterexample: (verdict == Verdict::Violation).then(|| inputs.clone()),
    })
}

/// Violation dominates, then inconclusive, then consistent.
pub fn overall(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Consistent;
    for v in verdicts {
        match v {
            Verdict::Violation => return Verdict::Violation,
            Verdict::InconclusiveBudget => out = Verdict::InconclusiveBudget,
            Verdict::Consistent => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive matrix-dimension range.
    pub dims: (usize, usize),
    /// Inclusive set-size range for set chains.
    pub set_sizes: (usize, usize),
    /// Chain ids, in catalog order.
    pub chains: Vec<String>,
    pub options: EvalOptions,
}

impl CampaignConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            dims: (2, 4),
            set_sizes: (1, 3),
            chains: CATALOG.iter().map(|c| c.id.to_string()).collect(),
            options: EvalOptions::default(),
        }
    }
}

/// Random draws shared by every chain in one trial.
struct TrialInputs {
    matrices: Vec<NonNegMatrix>,
    sets: Vec<MatrixSet>,
    m: usize,
    k: u32,
    alpha: f64,
    weights2: Vec<f64>,
    weights_m: Vec<f64>,
}

fn draw_trial(seed: u64, trial: usize, dims: (usize, usize), sizes: (usize, usize)) -> TrialInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let dim = rng.random_range(dims.0..=dims.1);
    let m = rng.random_range(2..=3usize);
    let k = rng.random_range(1..=3u32);
    let alpha = ALPHA_GRID[rng.random_range(0..ALPHA_GRID.len())];
    let weights2 = random_weights(&mut rng, 2).weights().to_vec();
    let weights_m = random_weights(&mut rng, m).weights().to_vec();
    let matrices = (0..3).map(|_| random_matrix(&mut rng, dim)).collect();
    let sets = (0..3)
        .map(|_| {
            let size = rng.random_range(sizes.0..=sizes.1);
            random_set(&mut rng, dim, size)
        })
        .collect();
    TrialInputs {
        matrices,
        sets,
        m,
        k,
        alpha,
        weights2,
        weights_m,
    }
}

fn trial_case(spec: &ChainSpec, t: &TrialInputs) -> (ChainInputs, ChainParams) {
    let m = match spec.max_inputs {
        Some(mx) if mx == spec.min_inputs => mx,
        _ => t.m,
    };
    let weights = if spec.uses_weights {
        Some(if m == 2 { t.weights2.clone() } else { t.weights_m.clone() })
    } else {
        None
    };
    let params = ChainParams {
        alpha: t.alpha,
        k: t.k,
        weights,
    };
    let inputs = match spec.domain {
        Domain::Single => ChainInputs::Matrices(t.matrices[..m].to_vec()),
        Domain::Set => ChainInputs::Sets(t.sets[..m].to_vec()),
    };
    (inputs, params)
}

/// Runs the selected chains on `trials` seeded random cases. Trial `t`
/// draws from stream `t` of a ChaCha8 generator seeded with `seed`, so the
/// inputs of a trial do not depend on the chain selection or on other
/// trials. Reports come back in catalog × trial order.
pub fn randomized_campaign(cfg: &CampaignConfig) -> Result<Vec<ChainReport>> {
    if cfg.trials == 0 {
        return Err(Error::Domain("campaign needs at least one trial".into()));
    }
    if cfg.dims.0 == 0 || cfg.dims.0 > cfg.dims.1 || cfg.set_sizes.0 == 0 || cfg.set_sizes.0 > cfg.set_sizes.1 {
        return Err(Error::Domain(format!(
            "bad campaign ranges: dims {:?}, sizes {:?}",
            cfg.dims, cfg.set_sizes
        )));
    }
    let specs = cfg
        .chains
        .iter()
        .map(|id| chain_by_id(id).ok_or_else(|| Error::ChainInput(format!("unknown chain {id}"))))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<TrialInputs> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| draw_trial(cfg.seed, t, cfg.dims, cfg.set_sizes))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    jobs.par_iter()
        .map(|&(c, t)| {
            let (inputs, params) = trial_case(specs[c], &trials[t]);
            let mut report = evaluate_chain(specs[c], &inputs, &params, &cfg.options)?;
            report.seed = Some(cfg.seed);
            report.trial = Some(t);
            Ok(report)
        })
        .collect()
}
