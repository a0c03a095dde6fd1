//! Shared command plumbing: atomic writes, run manifests, seed derivation,
//! and small input loaders.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use etud_core::hetnet::HeteroGraph;
use etud_core::NodeId;

/// Stage tags for deriving per-stage seeds from the master seed:
/// `stage_seed = splitmix64(master ^ splitmix64(tag))`.
pub const STAGE_SYNTH: u64 = 1;
pub const STAGE_SPLIT: u64 = 2;
pub const STAGE_LEARN: u64 = 3;
pub const STAGE_DETECT: u64 = 4;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stage_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag))
}

/// Writes through a temporary file in the same directory and renames on
/// success, so failures never leave partial outputs behind.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let tmp = tmp_sibling(path);
    std::fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Runs a writer against a temporary path, then renames into place.
pub fn commit<E>(path: &Path, f: impl FnOnce(&Path) -> std::result::Result<(), E>) -> Result<()>
where
    E: std::error::Error + Send + Sync + 'static,
{
    let tmp = tmp_sibling(path);
    f(&tmp).with_context(|| format!("writing {}", path.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn tmp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Run manifest: what was configured, which seeds were used, digests of
/// every input, every artifact written, and per-stage wall-clock timings.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn seed(&mut self, stage: &str, seed: u64) {
        self.seeds.insert(stage.to_string(), seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes =
            std::fs::read(path).with_context(|| format!("reading input {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs
            .insert(path.display().to_string(), format!("sha256:{hex}"));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings_ms
            .insert(stage.to_string(), start.elapsed().as_millis());
        out
    }

    /// Writes the manifest itself (also listed among the outputs).
    pub fn write(mut self, path: &Path) -> Result<()> {
        self.output(path);
        let json = serde_json::to_string_pretty(&self)?;
        write_atomic(path, json.as_bytes())
    }
}

/// Reads a user list file: one node id per line, `#` comments allowed.
pub fn load_user_list(path: &Path, g: &HeteroGraph) -> Result<Vec<NodeId>> {
    let content =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut users = Vec::new();
    for (ln, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let id = g.node_id(line).with_context(|| {
            format!("{}:{}: unknown node '{line}'", path.display(), ln + 1)
        })?;
        users.push(id);
    }
    users.sort();
    users.dedup();
    Ok(users)
}

/// Nodes of the named type, for picking the rankable song set.
pub fn nodes_of_type_name(g: &HeteroGraph, type_name: &str) -> Result<Vec<NodeId>> {
    let t = g
        .registry()
        .node_type_by_name(type_name)
        .with_context(|| format!("graph has no node type named '{type_name}'"))?;
    Ok(g.nodes_of_type(t))
}
