use super::{GraphError, LabeledGraph};

/// Largest graph searched exhaustively by [`minimal_unavoidable`].
pub const DEFAULT_SEARCH_CAP: usize = 20;

/// Longest walk (in edges) inside the subgraph induced on nodes outside `y`,
/// or `None` when that subgraph has a cycle.
fn longest_avoiding_path(g: &LabeledGraph, in_y: &[bool]) -> Option<usize> {
    let m = g.node_count();
    let mut indeg = vec![0usize; m];
    for e in g.edges() {
        if !in_y[e.source] && !in_y[e.target] {
            indeg[e.target] += 1;
        }
    }
    let mut order: Vec<usize> = (0..m).filter(|&i| !in_y[i] && indeg[i] == 0).collect();
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for e in g.out_edges(u) {
            if !in_y[e.target] {
                indeg[e.target] -= 1;
                if indeg[e.target] == 0 {
                    order.push(e.target);
                }
            }
        }
    }
    let outside = in_y.iter().filter(|&&b| !b).count();
    if order.len() < outside {
        return None;
    }
    let mut longest = vec![0usize; m];
    let mut best = 0;
    for &u in &order {
        for e in g.out_edges(u) {
            if !in_y[e.target] {
                longest[e.target] = longest[e.target].max(longest[u] + 1);
                best = best.max(longest[e.target]);
            }
        }
    }
    Some(best)
}

/// True iff every walk with `m` edges visits a node of `y`.
pub fn is_unavoidable(g: &LabeledGraph, y: &[usize], m: usize) -> bool {
    let mut in_y = vec![false; g.node_count()];
    for &v in y {
        if v < in_y.len() {
            in_y[v] = true;
        }
    }
    matches!(longest_avoiding_path(g, &in_y), Some(l) if l < m)
}

/// Smallest `m`-unavoidable set, first in lexicographic node order.
pub fn minimal_unavoidable(g: &LabeledGraph, m: usize) -> Result<Vec<usize>, GraphError> {
    minimal_unavoidable_capped(g, m, DEFAULT_SEARCH_CAP)
}

pub fn minimal_unavoidable_capped(g: &LabeledGraph, m: usize, cap: usize) -> Result<Vec<usize>, GraphError> {
    if m == 0 {
        return Err(GraphError::InvalidParameters("horizon must be at least 1".into()));
    }
    let n = g.node_count();
    if n > cap {
        return Err(GraphError::SearchBudgetExceeded { nodes: n, cap });
    }
    for k in 1..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if is_unavoidable(g, &combo, m) {
                return Ok(combo);
            }
            // Advance to the next combination in lexicographic order.
            let mut i = k;
            while i > 0 && combo[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..k {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok((0..n).collect())
}

/// Greedy unavoidable set for graphs too large for the exhaustive search:
/// repeatedly adds the node lying on the most edges of the remaining graph.
pub fn greedy_unavoidable(g: &LabeledGraph, m: usize) -> Vec<usize> {
    let n = g.node_count();
    let mut in_y = vec![false; n];
    while !matches!(longest_avoiding_path(g, &in_y), Some(l) if l < m) {
        let mut score = vec![0usize; n];
        for e in g.edges() {
            if !in_y[e.source] && !in_y[e.target] {
                score[e.source] += 1;
                score[e.target] += 1;
            }
        }
        let pick = (0..n)
            .filter(|&i| !in_y[i])
            .max_by_key(|&i| (score[i], std::cmp::Reverse(i)))
            .expect("some node remains while a walk avoids the set");
        in_y[pick] = true;
    }
    (0..n).filter(|&i| in_y[i]).collect()
}
