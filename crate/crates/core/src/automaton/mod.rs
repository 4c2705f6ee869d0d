//! Labeled switching graphs: walks, unavoidable node sets, reduced graphs,
//! product and path-dependent lifts, and dwell-time generators.

mod dwell;
mod json;
mod lift;
mod reduce;
mod unavoidable;

pub use dwell::{dwell_graph, infer_dwell, DwellKind};
pub use json::{graph_hash, hex_digest as json_hex_digest, GraphJson};
pub use lift::{lift_p, lift_t, LiftIndexMap, LiftKind};
pub use reduce::{reduce, ReducedEdge, ReductionPlan};
pub use unavoidable::{
    greedy_unavoidable, is_unavoidable, minimal_unavoidable, minimal_unavoidable_capped, DEFAULT_SEARCH_CAP,
};

use std::collections::VecDeque;

use thiserror::Error;

/// Default cap on the number of walks any enumeration may produce.
pub const DEFAULT_WALK_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("edge {edge} refers to node {node} but the graph has {count} nodes")]
    NodeOutOfRange { edge: usize, node: usize, count: usize },
    #[error("edge {edge} has label {label} outside 1..={modes}")]
    LabelOutOfRange { edge: usize, label: usize, modes: usize },
    #[error("duplicate edge ({0}, {1}, {2})")]
    DuplicateEdge(String, String, usize),
    #[error("duplicate node name {0:?}")]
    DuplicateName(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("enumeration exceeded the budget of {0}")]
    BudgetExceeded(usize),
    #[error("subset search over {nodes} nodes exceeds the cap of {cap}")]
    SearchBudgetExceeded { nodes: usize, cap: usize },
    #[error("node set is not {horizon}-unavoidable")]
    NotUnavoidable { horizon: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// Edge `(source, target, label)`; labels run over `1..=modes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub label: usize,
}

impl Edge {
    pub fn new(source: usize, target: usize, label: usize) -> Self {
        Self { source, target, label }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    names: Vec<String>,
    modes: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

/// Outcome of [`LabeledGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphReport {
    pub strongly_connected: bool,
    /// Nodes without an outgoing or without an incoming edge.
    pub dangling: Vec<usize>,
    pub labels_in_range: bool,
    pub unused_labels: Vec<usize>,
}

impl GraphReport {
    pub fn is_valid(&self) -> bool {
        self.strongly_connected && self.dangling.is_empty() && self.labels_in_range
    }
}

/// Node and label sequence of a walk.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalkLabel {
    pub nodes: Vec<usize>,
    pub labels: Vec<usize>,
}

impl WalkLabel {
    pub fn trivial(node: usize) -> Self {
        Self { nodes: vec![node], labels: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    pub fn end(&self) -> usize {
        *self.nodes.last().expect("walk has at least one node")
    }

    pub fn push(&mut self, e: &Edge) {
        debug_assert_eq!(self.end(), e.source);
        self.nodes.push(e.target);
        self.labels.push(e.label);
    }

    pub fn extended(&self, e: &Edge) -> Self {
        let mut w = self.clone();
        w.push(e);
        w
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(&self, other: &WalkLabel) -> Self {
        debug_assert_eq!(self.end(), other.start());
        let mut w = self.clone();
        w.nodes.extend_from_slice(&other.nodes[1..]);
        w.labels.extend_from_slice(&other.labels);
        w
    }

    /// Whether every step is an edge of `g`.
    pub fn is_walk_of(&self, g: &LabeledGraph) -> bool {
        self.nodes.len() == self.labels.len() + 1
            && self.labels.iter().enumerate().all(|(i, &l)| g.has_edge(self.nodes[i], self.nodes[i + 1], l))
    }
}

impl LabeledGraph {
    pub fn new(names: Vec<String>, modes: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let m = names.len();
        if m == 0 {
            return Err(GraphError::Empty);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(GraphError::DuplicateName(n.clone()));
            }
        }
        let mut out = vec![Vec::new(); m];
        let mut inc = vec![Vec::new(); m];
        for (k, e) in edges.iter().enumerate() {
            for node in [e.source, e.target] {
                if node >= m {
                    return Err(GraphError::NodeOutOfRange { edge: k, node, count: m });
                }
            }
            if e.label == 0 || e.label > modes {
                return Err(GraphError::LabelOutOfRange { edge: k, label: e.label, modes });
            }
            if edges[..k].contains(e) {
                return Err(GraphError::DuplicateEdge(names[e.source].clone(), names[e.target].clone(), e.label));
            }
            out[e.source].push(k);
            inc[e.target].push(k);
        }
        Ok(Self { names, modes, edges, out, inc })
    }

    /// Nodes named `"1"`, `"2"`, ….
    pub fn numbered(nodes: usize, modes: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        Self::new((1..=nodes).map(|i| i.to_string()).collect(), modes, edges)
    }

    /// Builds from named triples.
    pub fn from_named(names: &[&str], modes: usize, edges: &[(&str, &str, usize)]) -> Result<Self, GraphError> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let find = |n: &str| names.iter().position(|m| m == n).ok_or_else(|| GraphError::UnknownNode(n.to_string()));
        let edges = edges
            .iter()
            .map(|&(s, d, l)| Ok(Edge::new(find(s)?, find(d)?, l)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        Self::new(names, modes, edges)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[node].iter().map(move |&k| &self.edges[k])
    }

    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.inc[node].iter().map(move |&k| &self.edges[k])
    }

    pub fn has_edge(&self, s: usize, d: usize, label: usize) -> bool {
        s < self.node_count() && self.out_edges(s).any(|e| e.target == d && e.label == label)
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            let next: Vec<usize> = if forward {
                self.out_edges(u).map(|e| e.target).collect()
            } else {
                self.in_edges(u).map(|e| e.source).collect()
            };
            for v in next {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.reach(0, true).iter().all(|&s| s) && self.reach(0, false).iter().all(|&s| s)
    }

    pub fn validate(&self) -> GraphReport {
        let dangling = (0..self.node_count()).filter(|&i| self.out[i].is_empty() || self.inc[i].is_empty()).collect();
        let unused_labels = (1..=self.modes).filter(|l| !self.edges.iter().any(|e| e.label == *l)).collect();
        GraphReport {
            strongly_connected: self.is_strongly_connected(),
            dangling,
            labels_in_range: self.edges.iter().all(|e| e.label >= 1 && e.label <= self.modes),
            unused_labels,
        }
    }

    /// All walks with exactly `length` edges from `from`, optionally ending at `to`.
    pub fn walks(
        &self,
        from: usize,
        to: Option<usize>,
        length: usize,
        cap: usize,
    ) -> Result<Vec<WalkLabel>, GraphError> {
        let mut out = Vec::new();
        let mut stack = vec![WalkLabel::trivial(from)];
        while let Some(w) = stack.pop() {
            if w.len() == length {
                if to.is_none_or(|t| t == w.end()) {
                    out.push(w);
                    if out.len() > cap {
                        return Err(GraphError::BudgetExceeded(cap));
                    }
                }
                continue;
            }
            let ext: Vec<&Edge> = self.out_edges(w.end()).collect();
            for e in ext.into_iter().rev() {
                stack.push(w.extended(e));
            }
        }
        Ok(out)
    }

    /// Walks with exactly `length` edges from every node, in node order.
    pub fn all_walks(&self, length: usize, cap: usize) -> Result<Vec<WalkLabel>, GraphError> {
        let mut out = Vec::new();
        for s in 0..self.node_count() {
            out.extend(self.walks(s, None, length, cap.saturating_sub(out.len()))?);
        }
        Ok(out)
    }

    /// Shortest-path edge counts; `gd(i,i) = 0`.
    pub fn distances(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.node_count())
            .map(|s| {
                let mut d = vec![None; self.node_count()];
                d[s] = Some(0);
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    let du = d[u].unwrap_or(0);
                    for e in self.out_edges(u) {
                        if d[e.target].is_none() {
                            d[e.target] = Some(du + 1);
                            queue.push_back(e.target);
                        }
                    }
                }
                d
            })
            .collect()
    }

    /// A walk realizing `labels`, starting at `start` or anywhere.
    pub fn realize(&self, start: Option<usize>, labels: &[usize]) -> Option<WalkLabel> {
        let starts: Vec<usize> = match start {
            Some(s) => vec![s],
            None => (0..self.node_count()).collect(),
        };
        for s in starts {
            let mut stack = vec![WalkLabel::trivial(s)];
            while let Some(w) = stack.pop() {
                if w.len() == labels.len() {
                    return Some(w);
                }
                let want = labels[w.len()];
                for e in self.out_edges(w.end()).filter(|e| e.label == want) {
                    stack.push(w.extended(e));
                }
            }
        }
        None
    }
}
