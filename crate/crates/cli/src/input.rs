//! Versioned JSON input documents.
//!
//! ```json
//! {
//!   "version": 1,
//!   "entries": [
//!     {"name": "A", "kind": "matrix", "payload": {"dim": 2, "rows": [[0, 1], [1, 0]]}},
//!     {"name": "S", "kind": "matrix_set", "payload": {"dim": 2, "members": [[[0, 2], [0, 0]]]}},
//!     {"name": "K", "kind": "kernel_spec", "payload": {"kind": "exp_abs", "scale": 1}},
//!     {"name": "w", "kind": "weights", "payload": [0.25, 0.75]}
//!   ],
//!   "checks": [{"chain": "C2", "inputs": ["A", "A"]}],
//!   "campaign": {"seed": 42, "trials": 10}
//! }
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use anyhow::{Context, Result};
use hjsr_core::{
    chain_by_id, discretize, ChainInputs, ChainParams, ChainSpec, Domain, KernelModel, KernelSpec, MatrixSet,
    NonNegMatrix, Pruning,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::usage;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_KERNEL_GRID: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub version: u32,
    #[serde(default)]
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub campaign: Option<CampaignBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub name: String,
    pub kind: String,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub chain: String,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Name of a `weights` entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    /// Grid size for kernel inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignBlock {
    pub seed: u64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_sizes: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruning: Option<Pruning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Matrix(NonNegMatrix),
    Set(MatrixSet),
    Kernel(KernelSpec),
    Weights(Vec<f64>),
}

impl Item {
    fn kind(&self) -> &'static str {
        match self {
            Item::Matrix(_) => "matrix",
            Item::Set(_) => "matrix_set",
            Item::Kernel(_) => "kernel_spec",
            Item::Weights(_) => "weights",
        }
    }
}

/// A parsed document together with its validated entries, in file order.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub doc: InputDocument,
    pub items: Vec<(String, Item)>,
    pub bytes: Vec<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixPayload {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetPayload {
    dim: usize,
    members: Vec<Vec<Vec<f64>>>,
}

fn check_rows(name: &str, dim: usize, rows: &[Vec<f64>], at: &str) -> Result<NonNegMatrix> {
    if dim == 0 {
        return Err(usage(format!("entry '{name}'{at}: dim must be at least 1")));
    }
    if rows.len() != dim {
        return Err(usage(format!("entry '{name}'{at}: expected {dim} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(usage(format!("entry '{name}'{at}: row {i} has {} entries, expected {dim}", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(usage(format!(
                    "entry '{name}'{at}: element [{i}][{j}] = {v} must be finite and non-negative"
                )));
            }
        }
    }
    NonNegMatrix::from_rows(rows).map_err(|e| usage(format!("entry '{name}'{at}: {e}")))
}

fn payload<T: for<'de> Deserialize<'de>>(entry: &Entry) -> Result<T> {
    serde_json::from_value(entry.payload.clone())
        .map_err(|e| usage(format!("entry '{}' ({}): bad payload: {e}", entry.name, entry.kind)))
}

fn resolve_entry(entry: &Entry) -> Result<Item> {
    let name = &entry.name;
    match entry.kind.as_str() {
        "matrix" => {
            let p: MatrixPayload = payload(entry)?;
            Ok(Item::Matrix(check_rows(name, p.dim, &p.rows, "")?))
        }
        "matrix_set" => {
            let p: SetPayload = payload(entry)?;
            if p.members.is_empty() {
                return Err(usage(format!("entry '{name}': a matrix set needs at least one member")));
            }
            let members = p
                .members
                .iter()
                .enumerate()
                .map(|(i, rows)| check_rows(name, p.dim, rows, &format!(" member {i}")))
                .collect::<Result<Vec<_>>>()?;
            let set = MatrixSet::new(members).map_err(|e| usage(format!("entry '{name}': {e}")))?;
            Ok(Item::Set(set.with_label(name.clone())))
        }
        "kernel_spec" => {
            let spec: KernelSpec = payload(entry)?;
            // Compile once so bad specs fail at load time.
            discretize(&spec, 2).map_err(|e| usage(format!("entry '{name}': {e}")))?;
            Ok(Item::Kernel(spec))
        }
        "weights" => {
            let w: Vec<f64> = payload(entry)?;
            if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(usage(format!("entry '{name}': weight {i} = {v} must be positive")));
            }
            Ok(Item::Weights(w))
        }
        other => Err(usage(format!(
            "entry '{name}': unknown kind '{other}' (expected matrix, matrix_set, kernel_spec or weights)"
        ))),
    }
}

impl Resolved {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(bytes: Vec<u8>) -> Result<Self> {
        let doc: InputDocument = serde_json::from_slice(&bytes).map_err(|e| usage(e.to_string()))?;
        Self::from_document(doc, bytes)
    }

    pub fn from_document(doc: InputDocument, bytes: Vec<u8>) -> Result<Self> {
        if doc.version != FORMAT_VERSION {
            return Err(usage(format!("unsupported version {} (expected {FORMAT_VERSION})", doc.version)));
        }
        let mut seen = HashSet::new();
        let mut items = Vec::with_capacity(doc.entries.len());
        for e in &doc.entries {
            if !seen.insert(e.name.as_str()) {
                return Err(usage(format!("entry '{}' is defined twice", e.name)));
            }
            items.push((e.name.clone(), resolve_entry(e)?));
        }
        let out = Self { doc, items, bytes };
        for (i, c) in out.doc.checks.iter().enumerate() {
            out.check_inputs(c).map_err(|e| usage(format!("check {i} ({}): {e}", c.chain)))?;
        }
        Ok(out)
    }

    pub fn get(&self, name: &str) -> Result<&Item> {
        self.items
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, it)| it)
            .ok_or_else(|| usage(format!("no entry named '{name}'")))
    }

    pub fn sets(&self) -> Vec<(&str, MatrixSet)> {
        self.items
            .iter()
            .filter_map(|(n, it)| match it {
                Item::Set(s) => Some((n.as_str(), s.clone())),
                Item::Matrix(m) => Some((n.as_str(), MatrixSet::singleton(m.clone()).with_label(n.clone()))),
                _ => None,
            })
            .collect()
    }

    pub fn kernels(&self) -> Vec<(String, KernelSpec)> {
        self.items
            .iter()
            .filter_map(|(n, it)| match it {
                Item::Kernel(k) => Some((n.clone(), k.clone())),
                _ => None,
            })
            .collect()
    }

    /// Builds the chain inputs and parameters for a check. Matrices passed
    /// to set chains become singleton sets.
    pub fn check_inputs(&self, c: &Check) -> Result<(&'static ChainSpec, ChainInputs, ChainParams)> {
        let spec = chain_by_id(&c.chain).ok_or_else(|| usage(format!("unknown chain '{}'", c.chain)))?;
        let items = c.inputs.iter().map(|n| self.get(n)).collect::<Result<Vec<_>>>()?;
        let wrong = |it: &Item| usage(format!("{} does not accept {} inputs", spec.id, it.kind()));
        let inputs = match (spec.domain, items.first()) {
            (_, None) => return Err(usage("check has no inputs")),
            (Domain::Single, Some(Item::Kernel(_))) => {
                let n = c.grid.unwrap_or(DEFAULT_KERNEL_GRID);
                let models = items
                    .iter()
                    .map(|it| match it {
                        Item::Kernel(k) => discretize(k, n).map_err(|e| usage(e.to_string())),
                        other => Err(wrong(other)),
                    })
                    .collect::<Result<Vec<KernelModel>>>()?;
                ChainInputs::Kernels(models)
            }
            (Domain::Single, _) => ChainInputs::Matrices(
                items
                    .iter()
                    .map(|it| match it {
                        Item::Matrix(m) => Ok(m.clone()),
                        other => Err(wrong(other)),
                    })
                    .collect::<Result<_>>()?,
            ),
            (Domain::Set, _) => ChainInputs::Sets(
                items
                    .iter()
                    .map(|it| match it {
                        Item::Set(s) => Ok(s.clone()),
                        Item::Matrix(m) => Ok(MatrixSet::singleton(m.clone())),
                        other => Err(wrong(other)),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let weights = match &c.weights {
            None => None,
            Some(name) => match self.get(name)? {
                Item::Weights(w) => Some(w.clone()),
                other => return Err(usage(format!("'{name}' is a {}, not weights", other.kind()))),
            },
        };
        let defaults = ChainParams::default();
        let params = ChainParams {
            alpha: c.alpha.unwrap_or(defaults.alpha),
            k: c.k.unwrap_or(defaults.k),
            weights,
        };
        Ok((spec, inputs, params))
    }
}

/// A self-contained document reproducing one chain evaluation.
pub fn reproducer(chain: &str, inputs: &ChainInputs, params: &ChainParams) -> Option<InputDocument> {
    let matrix_value = |m: &NonNegMatrix| serde_json::to_value(m).expect("matrices serialize");
    let mut entries = Vec::new();
    let names: Vec<String> = match inputs {
        ChainInputs::Matrices(ms) => ms
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let name = format!("A{}", i + 1);
                entries.push(Entry {
                    name: name.clone(),
                    kind: "matrix".into(),
                    payload: matrix_value(m),
                });
                name
            })
            .collect(),
        ChainInputs::Sets(ss) => ss
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let name = format!("S{}", i + 1);
                let members: Vec<Value> = s.members().iter().map(|m| matrix_value(m)["rows"].clone()).collect();
                let mut payload = BTreeMap::new();
                payload.insert("dim", Value::from(s.dim()));
                payload.insert("members", Value::from(members));
                entries.push(Entry {
                    name: name.clone(),
                    kind: "matrix_set".into(),
                    payload: serde_json::to_value(payload).expect("maps serialize"),
                });
                name
            })
            .collect(),
        ChainInputs::Kernels(_) => return None,
    };
    let weights = params.weights.as_ref().map(|w| {
        entries.push(Entry {
            name: "w".into(),
            kind: "weights".into(),
            payload: serde_json::to_value(w).expect("weights serialize"),
        });
        "w".to_string()
    });
    Some(InputDocument {
        version: FORMAT_VERSION,
        entries,
        checks: vec![Check {
            chain: chain.to_string(),
            inputs: names,
            alpha: Some(params.alpha),
            k: Some(params.k),
            weights,
            grid: None,
        }],
        campaign: None,
    })
}
