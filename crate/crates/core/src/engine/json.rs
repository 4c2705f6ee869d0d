use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::geometry::{Polytope, PolytopeJson};
use crate::system::{system_hash, SwitchedSystem};

use super::member::Member;
use super::{EngineError, MultiSet, SetKind};

/// Wire form `{"system":hash, "kind":…, "epsilon":e, "iterations":k,
/// "sets":{"node": polytope | [polytope…]}}`. Unknown top-level fields are
/// kept in `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSetJson {
    pub system: String,
    pub kind: String,
    pub epsilon: Option<f64>,
    pub iterations: usize,
    pub sets: Map<String, Value>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

fn member_value(m: &Member) -> Value {
    let one = |p: &Polytope| serde_json::to_value(PolytopeJson::from(p)).expect("polytope serializes");
    match m.as_convex() {
        Some(p) => one(p),
        None => Value::Array(m.pieces().iter().map(one).collect()),
    }
}

fn member_from_value(v: &Value) -> Result<Member, EngineError> {
    let one = |v: &Value| -> Result<Polytope, EngineError> {
        let pj: PolytopeJson =
            serde_json::from_value(v.clone()).map_err(|e| EngineError::Mismatch(format!("bad polytope: {e}")))?;
        Ok(Polytope::try_from(&pj)?)
    };
    match v {
        Value::Array(items) => {
            let pieces = items.iter().map(one).collect::<Result<Vec<_>, _>>()?;
            Member::from_pieces(pieces, usize::MAX)
        }
        other => Ok(Member::convex(one(other)?)),
    }
}

impl MultiSet {
    /// Wire form with members keyed by the node names of `sys`.
    pub fn to_json(&self, sys: &SwitchedSystem) -> MultiSetJson {
        let sets =
            self.members.iter().enumerate().map(|(j, m)| (sys.graph().name(j).to_string(), member_value(m))).collect();
        MultiSetJson {
            system: self.system.clone(),
            kind: self.kind.as_str().to_string(),
            epsilon: self.epsilon,
            iterations: self.iteration,
            sets,
            extra: Map::new(),
        }
    }

    /// Reads a multi-set for `sys`; the recorded system hash must match.
    pub fn from_json(j: &MultiSetJson, sys: &SwitchedSystem) -> Result<MultiSet, EngineError> {
        let hash = system_hash(sys);
        if j.system != hash {
            return Err(EngineError::Mismatch(format!(
                "multi-set was computed for system {} but this system hashes to {hash}",
                j.system
            )));
        }
        let kind =
            SetKind::parse(&j.kind).ok_or_else(|| EngineError::Mismatch(format!("unknown kind {:?}", j.kind)))?;
        let members = sys
            .graph()
            .names()
            .iter()
            .map(|name| {
                let v =
                    j.sets.get(name).ok_or_else(|| EngineError::Mismatch(format!("no member for node {name:?}")))?;
                member_from_value(v)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(extra) = j.sets.keys().find(|k| sys.graph().index_of(k).is_none()) {
            return Err(EngineError::Mismatch(format!("member for unknown node {extra:?}")));
        }
        let mut ms = MultiSet::new(sys, kind, j.iterations, members)?;
        ms.epsilon = j.epsilon;
        Ok(ms)
    }
}
