use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hjsr_core::{ChainReport, EnumerationStats, RadiusBracket};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "hjsr";

/// Machine-readable output of every subcommand. Everything except
/// `timing` depends only on the input and options, never on the worker
/// count or the clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// `sha256:` digest of the input file, or of the canonical campaign
    /// settings for generated inputs.
    pub input_digest: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<ChainReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
    /// Wall-clock seconds per phase.
    pub timing: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub name: String,
    pub size: usize,
    pub dim: usize,
    pub bracket: RadiusBracket,
    pub stats: EnumerationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSection {
    pub grids: Vec<usize>,
    pub rows: Vec<KernelRow>,
    pub residuals: Vec<Residual>,
    /// `(chain, left, right)` cases whose verdict differs between grids.
    pub flips: Vec<(String, String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub chain: String,
    pub left: String,
    pub right: String,
    pub grid: usize,
    pub verdict: hjsr_core::Verdict,
    /// Bracket midpoint of each term.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub chain: String,
    pub left: String,
    pub right: String,
    pub term: usize,
    pub n: usize,
    pub value_n: f64,
    pub value_2n: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSection {
    pub size: usize,
    pub dim: usize,
    pub depth: usize,
    pub seed: u64,
    pub exhaustive: SetRecord,
    pub pruned: SetRecord,
    /// Pruned products over exhaustive products.
    pub ratio: f64,
    pub delta: f64,
    pub delta_equal: bool,
}

impl ReportDocument {
    pub fn new(command: &str, input_digest: String) -> Self {
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input_digest,
            chains: Vec::new(),
            sets: Vec::new(),
            kernel: None,
            bench: None,
            timing: BTreeMap::new(),
        }
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timing.entry(phase.into()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}
