use super::unavoidable::is_unavoidable;
use super::{Edge, GraphError, LabeledGraph, WalkLabel, DEFAULT_WALK_CAP};

/// Edge of the reduced graph together with the parent walk it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedEdge {
    /// Position of the source within `ReductionPlan::y`.
    pub source: usize,
    pub target: usize,
    pub walk: WalkLabel,
}

/// Reduced graph on an unavoidable node set `y`.
///
/// Reduced edge `k` carries label `k + 1`; every reduced node is the parent
/// node `y[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionPlan {
    pub parent: LabeledGraph,
    pub y: Vec<usize>,
    pub horizon: usize,
    pub edges: Vec<ReducedEdge>,
    pub graph: LabeledGraph,
    pub theta_min: usize,
    pub theta_max: usize,
    /// For each parent node outside `y`: walks from a `y` node to it whose
    /// interior avoids `y`. Empty for nodes of `y`.
    pub entry_walks: Vec<Vec<WalkLabel>>,
    /// For each parent node outside `y`: walks from it to a `y` node whose
    /// interior avoids `y`. Empty for nodes of `y`.
    pub exit_walks: Vec<Vec<WalkLabel>>,
}

impl ReductionPlan {
    pub fn in_y(&self, node: usize) -> bool {
        self.y.contains(&node)
    }

    /// Position of a parent node in `y`.
    pub fn reduced_index(&self, node: usize) -> Option<usize> {
        self.y.iter().position(|&v| v == node)
    }
}

/// Walks out of `start` that stop at the first `y` node reached.
///
/// Calls `on_inner` for every prefix ending outside `y` and returns the walks
/// that reach `y`.
fn walks_to_y(
    g: &LabeledGraph,
    in_y: &[bool],
    start: usize,
    mut on_inner: impl FnMut(&WalkLabel),
) -> Result<Vec<WalkLabel>, GraphError> {
    let mut done = Vec::new();
    let mut stack = vec![WalkLabel::trivial(start)];
    let mut visited = 0usize;
    while let Some(w) = stack.pop() {
        visited += 1;
        if visited > DEFAULT_WALK_CAP {
            return Err(GraphError::BudgetExceeded(DEFAULT_WALK_CAP));
        }
        let ext: Vec<&Edge> = g.out_edges(w.end()).collect();
        for e in ext.into_iter().rev() {
            let next = w.extended(e);
            if in_y[e.target] {
                done.push(next);
            } else {
                stack.push(next);
            }
        }
        if !w.is_empty() {
            on_inner(&w);
        }
    }
    // DFS emits finished walks out of order; restore edge order.
    done.sort_by(|a, b| a.nodes.len().cmp(&b.nodes.len()).then(a.cmp(b)));
    Ok(done)
}

pub fn reduce(g: &LabeledGraph, y: &[usize], m: usize) -> Result<ReductionPlan, GraphError> {
    let mut y: Vec<usize> = y.to_vec();
    y.sort_unstable();
    y.dedup();
    if y.is_empty() || y.iter().any(|&v| v >= g.node_count()) {
        return Err(GraphError::InvalidParameters("unavoidable set must be a nonempty node subset".into()));
    }
    if !is_unavoidable(g, &y, m) {
        return Err(GraphError::NotUnavoidable { horizon: m });
    }
    let mut in_y = vec![false; g.node_count()];
    for &v in &y {
        in_y[v] = true;
    }
    let mut entry_walks = vec![Vec::new(); g.node_count()];
    let mut edges = Vec::new();
    for (si, &s) in y.iter().enumerate() {
        let mut inner = Vec::new();
        let done = walks_to_y(g, &in_y, s, |w| inner.push(w.clone()))?;
        inner.sort_by(|a, b| a.nodes.len().cmp(&b.nodes.len()).then(a.cmp(b)));
        for w in inner {
            entry_walks[w.end()].push(w);
        }
        for w in done {
            let target = y.iter().position(|&v| v == w.end()).expect("walk ends in y");
            edges.push(ReducedEdge { source: si, target, walk: w });
        }
    }
    let mut exit_walks = vec![Vec::new(); g.node_count()];
    for j in 0..g.node_count() {
        if !in_y[j] {
            exit_walks[j] = walks_to_y(g, &in_y, j, |_| {})?;
        }
    }
    let names = y.iter().map(|&v| g.name(v).to_string()).collect();
    let reduced_edges = edges.iter().enumerate().map(|(k, e)| Edge::new(e.source, e.target, k + 1)).collect();
    let graph = LabeledGraph::new(names, edges.len(), reduced_edges)?;
    let theta_min = edges.iter().map(|e| e.walk.len()).min().unwrap_or(0);
    let theta_max = edges.iter().map(|e| e.walk.len()).max().unwrap_or(0);
    Ok(ReductionPlan { parent: g.clone(), y, horizon: m, edges, graph, theta_min, theta_max, entry_walks, exit_walks })
}
