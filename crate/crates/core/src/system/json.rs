use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::automaton::{GraphJson, LabeledGraph};
use crate::geometry::{Polytope, PolytopeJson};

use super::{Mode, SwitchedSystem, SystemError};

/// Wire form of one mode: `{"A":[[…]], "W":<polytope or "zero">}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    pub w: DisturbanceJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DisturbanceJson {
    Tag(String),
    Set(PolytopeJson),
}

/// Wire form `{"dim":n, "modes":[…], "graph":{…}, "X":{"node":<polytope>…}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub dim: usize,
    pub modes: Vec<ModeJson>,
    pub graph: GraphJson,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Map<String, Value>>,
}

fn matrix_from_rows(mode: usize, rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>, SystemError> {
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(SystemError::MatrixShape { mode, rows: rows.len(), cols, dim });
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

impl From<&SwitchedSystem> for SystemJson {
    fn from(sys: &SwitchedSystem) -> Self {
        let modes = sys
            .modes()
            .iter()
            .map(|m| ModeJson {
                a: m.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
                w: if m.is_nominal() {
                    DisturbanceJson::Tag("zero".into())
                } else {
                    DisturbanceJson::Set(PolytopeJson::from(&m.w))
                },
            })
            .collect();
        let x = sys.constraints().map(|xs| {
            xs.iter()
                .enumerate()
                .map(|(j, p)| {
                    (
                        sys.graph().name(j).to_string(),
                        serde_json::to_value(PolytopeJson::from(p)).expect("polytope serializes"),
                    )
                })
                .collect()
        });
        SystemJson { dim: sys.dim(), modes, graph: GraphJson::from(sys.graph()), x }
    }
}

impl TryFrom<&SystemJson> for SwitchedSystem {
    type Error = SystemError;

    fn try_from(j: &SystemJson) -> Result<Self, SystemError> {
        let graph = LabeledGraph::try_from(&j.graph)?;
        let n = j.dim;
        let modes = j
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let a = matrix_from_rows(i + 1, &m.a, n)?;
                let w = match &m.w {
                    DisturbanceJson::Tag(t) if t == "zero" => Polytope::zero(n),
                    DisturbanceJson::Tag(t) => {
                        return Err(SystemError::Invalid(format!("unknown disturbance tag {t:?}")))
                    }
                    DisturbanceJson::Set(p) => {
                        Polytope::try_from(p).map_err(|e| SystemError::Invalid(format!("W_{}: {e}", i + 1)))?
                    }
                };
                Ok(Mode::new(a, w))
            })
            .collect::<Result<Vec<_>, SystemError>>()?;
        let constraints = match &j.x {
            None => None,
            Some(map) => {
                let mut xs = Vec::with_capacity(graph.node_count());
                for name in graph.names() {
                    let v =
                        map.get(name).ok_or_else(|| SystemError::Invalid(format!("X has no set for node {name:?}")))?;
                    let pj: PolytopeJson = serde_json::from_value(v.clone())
                        .map_err(|e| SystemError::Invalid(format!("X_{name}: {e}")))?;
                    xs.push(Polytope::try_from(&pj).map_err(|e| SystemError::Invalid(format!("X_{name}: {e}")))?);
                }
                if let Some(extra) = map.keys().find(|k| graph.index_of(k).is_none()) {
                    return Err(SystemError::Invalid(format!("X names unknown node {extra:?}")));
                }
                Some(xs)
            }
        };
        SwitchedSystem::new(n, modes, graph, constraints)
    }
}

/// Content hash of the system's wire form.
pub fn system_hash(sys: &SwitchedSystem) -> String {
    let text = serde_json::to_string(&SystemJson::from(sys)).expect("system serializes");
    crate::automaton::json_hex_digest(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn round_trip_preserves_hash() {
        let sys = two_node_scalar(0.1);
        let text = serde_json::to_string(&SystemJson::from(&sys)).unwrap();
        let j: SystemJson = serde_json::from_str(&text).unwrap();
        let back = SwitchedSystem::try_from(&j).unwrap();
        assert_eq!(system_hash(&back), system_hash(&sys));
        assert_eq!(serde_json::to_string(&SystemJson::from(&back)).unwrap(), text);
    }

    #[test]
    fn zero_disturbance_tag() {
        let text = r#"{"dim":1,"modes":[{"A":[[0.5]],"W":"zero"}],
            "graph":{"nodes":["q"],"modes":1,"edges":[["q","q",1]]},
            "X":{"q":{"dim":1,"hrep":[[1.0,1.0],[-1.0,1.0]]}}}"#;
        let j: SystemJson = serde_json::from_str(text).unwrap();
        let sys = SwitchedSystem::try_from(&j).unwrap();
        assert!(sys.is_nominal());
        assert!(sys.validate().passes());
    }

    #[test]
    fn bad_matrix_shape() {
        let text = r#"{"dim":2,"modes":[{"A":[[0.5]],"W":"zero"}],
            "graph":{"nodes":["q"],"modes":1,"edges":[["q","q",1]]}}"#;
        let j: SystemJson = serde_json::from_str(text).unwrap();
        assert!(matches!(SwitchedSystem::try_from(&j), Err(SystemError::MatrixShape { .. })));
    }
}
