use super::{Edge, GraphError, LabeledGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DwellKind {
    /// Each mode stays active for at least `tau` steps before a switch.
    Min,
    /// Modes other than mode 1 stay active for at most `tau` consecutive steps.
    Max,
}

/// Dwell-time constraint graph.
///
/// Minimum dwell: for every mode `i` an anchor node with an `i` self-loop,
/// and for every other mode `j` a chain of `tau - 1` nodes leading from
/// anchor `i` to anchor `j`, all edges labeled `i`. Node order is anchor `i`
/// followed by its chains, for `i = 1..N`.
///
/// Maximum dwell: a hub node with a mode-1 self-loop and, for every mode
/// `s >= 2`, a chain `c_1..c_tau` with hub→`c_1` labeled 1, `c_k`→`c_{k+1}`
/// and `c_k`→hub labeled `s`.
pub fn dwell_graph(kind: DwellKind, modes: usize, tau: usize) -> Result<LabeledGraph, GraphError> {
    if tau == 0 {
        return Err(GraphError::InvalidParameters("dwell time must be at least 1".into()));
    }
    match kind {
        DwellKind::Min => {
            if modes < 2 {
                return Err(GraphError::InvalidParameters("minimum dwell needs at least 2 modes".into()));
            }
            let block = (modes - 1) * (tau - 1) + 1;
            let anchor = |i: usize| i * block;
            let mut edges = Vec::new();
            for i in 0..modes {
                let a = anchor(i);
                edges.push(Edge::new(a, a, i + 1));
                let mut next_free = a + 1;
                for j in (0..modes).filter(|&j| j != i) {
                    let mut prev = a;
                    for _ in 0..tau - 1 {
                        edges.push(Edge::new(prev, next_free, i + 1));
                        prev = next_free;
                        next_free += 1;
                    }
                    edges.push(Edge::new(prev, anchor(j), i + 1));
                }
            }
            LabeledGraph::numbered(modes * block, modes, edges)
        }
        DwellKind::Max => {
            if modes < 1 {
                return Err(GraphError::InvalidParameters("maximum dwell needs at least 1 mode".into()));
            }
            let mut edges = vec![Edge::new(0, 0, 1)];
            let mut next = 1;
            for s in 2..=modes {
                let first = next;
                edges.push(Edge::new(0, first, 1));
                for k in 0..tau {
                    let node = first + k;
                    if k + 1 < tau {
                        edges.push(Edge::new(node, node + 1, s));
                    }
                    edges.push(Edge::new(node, 0, s));
                }
                next += tau;
            }
            LabeledGraph::numbered(next, modes, edges)
        }
    }
}

/// Recovers `(modes, tau)` when `g` is exactly `dwell_graph(kind, modes, tau)`.
pub fn infer_dwell(g: &LabeledGraph, kind: DwellKind) -> Option<(usize, usize)> {
    let modes = g.mode_count();
    let nodes = g.node_count();
    let tau = match kind {
        DwellKind::Min => {
            if modes < 2 {
                return None;
            }
            let per = modes * (modes - 1);
            if nodes < modes || !(nodes - modes).is_multiple_of(per) {
                return None;
            }
            (nodes - modes) / per + 1
        }
        DwellKind::Max => {
            if modes == 1 {
                if nodes != 1 {
                    return None;
                }
                1
            } else {
                if nodes < 1 || !(nodes - 1).is_multiple_of(modes - 1) {
                    return None;
                }
                (nodes - 1) / (modes - 1)
            }
        }
    };
    let expected = dwell_graph(kind, modes, tau).ok()?;
    let mut a: Vec<Edge> = expected.edges().to_vec();
    let mut b: Vec<Edge> = g.edges().to_vec();
    a.sort();
    b.sort();
    (a == b).then_some((modes, tau))
}
