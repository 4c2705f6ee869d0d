use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use switchsafe::automaton::{GraphJson, LabeledGraph};
use switchsafe::engine::{MultiSet, MultiSetJson};
use switchsafe::system::{SwitchedSystem, SystemJson};

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

pub fn load_system(path: &Path) -> Result<SwitchedSystem, CliError> {
    let j: SystemJson = read_json(path)?;
    SwitchedSystem::try_from(&j).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

/// Accepts a graph file or a system file, whose graph is used.
pub fn load_graph(path: &Path) -> Result<LabeledGraph, CliError> {
    let v: Value = read_json(path)?;
    let g = match v.get("graph") {
        Some(inner) => inner.clone(),
        None => v,
    };
    let j: GraphJson =
        serde_json::from_value(g).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })?;
    LabeledGraph::try_from(&j).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

pub fn load_multiset(path: &Path, sys: &SwitchedSystem) -> Result<(MultiSet, MultiSetJson), CliError> {
    let j: MultiSetJson = read_json(path)?;
    let ms = MultiSet::from_json(&j, sys).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })?;
    Ok((ms, j))
}

/// Node indices for a comma-separated list of names.
pub fn node_list(g: &LabeledGraph, names: &str) -> Result<Vec<usize>, CliError> {
    names
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| g.index_of(n).ok_or_else(|| CliError::Input(format!("unknown node {n:?}"))))
        .collect()
}
