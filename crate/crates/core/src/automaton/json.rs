use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Edge, GraphError, LabeledGraph};

/// Wire form `{"nodes":[…], "modes":N, "edges":[["a","b",1],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    pub modes: usize,
    pub edges: Vec<(String, String, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl From<&LabeledGraph> for GraphJson {
    fn from(g: &LabeledGraph) -> Self {
        GraphJson {
            nodes: g.names().to_vec(),
            modes: g.mode_count(),
            edges: g
                .edges()
                .iter()
                .map(|e| (g.name(e.source).to_string(), g.name(e.target).to_string(), e.label))
                .collect(),
            provenance: None,
        }
    }
}

impl TryFrom<&GraphJson> for LabeledGraph {
    type Error = GraphError;

    fn try_from(j: &GraphJson) -> Result<Self, GraphError> {
        let find = |n: &str| j.nodes.iter().position(|m| m == n).ok_or_else(|| GraphError::UnknownNode(n.to_string()));
        let edges = j
            .edges
            .iter()
            .map(|(s, d, l)| Ok(Edge::new(find(s)?, find(d)?, *l)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        LabeledGraph::new(j.nodes.clone(), j.modes, edges)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(16).map(|b| format!("{b:02x}")).collect()
}

/// Content hash of the graph's wire form.
pub fn graph_hash(g: &LabeledGraph) -> String {
    let text = serde_json::to_string(&GraphJson::from(g)).expect("graph serializes");
    hex_digest(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::abc;
    use super::*;

    #[test]
    fn round_trip() {
        let g = abc();
        let text = serde_json::to_string(&GraphJson::from(&g)).unwrap();
        assert!(text.contains(r#"["a","b",1]"#));
        let back: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LabeledGraph::try_from(&back).unwrap(), g);
        assert_eq!(graph_hash(&g), graph_hash(&LabeledGraph::try_from(&back).unwrap()));
        assert_eq!(graph_hash(&g).len(), 32);
    }

    #[test]
    fn unknown_node_rejected() {
        let j: GraphJson = serde_json::from_str(r#"{"nodes":["a"],"modes":1,"edges":[["a","z",1]]}"#).unwrap();
        assert_eq!(LabeledGraph::try_from(&j).unwrap_err(), GraphError::UnknownNode("z".into()));
    }
}
