use std::collections::{BTreeMap, HashMap};

use super::{Edge, GraphError, LabeledGraph, WalkLabel, DEFAULT_WALK_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    /// Same nodes, one edge per walk of `T` edges.
    Product,
    /// One node per walk of `P` edges.
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftIndexMap {
    pub kind: LiftKind,
    pub parameter: usize,
    pub graph: LabeledGraph,
    /// Product lift: parent label sequence of each lifted label (label `k+1`
    /// is `label_sequences[k]`). Path lift: the singleton parent labels.
    pub label_sequences: Vec<Vec<usize>>,
    /// Product lift: the parent walk behind each lifted edge.
    pub edge_walks: Vec<WalkLabel>,
    /// Path lift: the parent walk behind each lifted node.
    pub node_walks: Vec<WalkLabel>,
    /// For each parent node `j`, the lifted nodes that stand for it
    /// (itself for product lifts, walks ending at `j` for path lifts).
    pub members: Vec<Vec<usize>>,
}

impl LiftIndexMap {
    /// Lifted node whose walk has the given encoded name, e.g. `"a2a"`.
    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.graph.index_of(name)
    }

    /// Parent node each lifted node stands for.
    pub fn parent_node(&self, lifted: usize) -> usize {
        match self.kind {
            LiftKind::Product => lifted,
            LiftKind::Path => self.node_walks[lifted].end(),
        }
    }
}

/// Product lift over walks of `t` edges.
pub fn lift_t(g: &LabeledGraph, t: usize) -> Result<LiftIndexMap, GraphError> {
    if t == 0 {
        return Err(GraphError::InvalidParameters("lift horizon must be at least 1".into()));
    }
    let members = (0..g.node_count()).map(|j| vec![j]).collect();
    if t == 1 {
        return Ok(LiftIndexMap {
            kind: LiftKind::Product,
            parameter: 1,
            graph: g.clone(),
            label_sequences: (1..=g.mode_count()).map(|l| vec![l]).collect(),
            edge_walks: g.edges().iter().map(|e| WalkLabel::trivial(e.source).extended(e)).collect(),
            node_walks: Vec::new(),
            members,
        });
    }
    let walks = g.all_walks(t, DEFAULT_WALK_CAP)?;
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for w in &walks {
        ids.entry(w.labels.clone()).or_insert(0);
    }
    for (k, v) in ids.values_mut().enumerate() {
        *v = k + 1;
    }
    let mut edges = Vec::new();
    let mut edge_walks = Vec::new();
    for w in walks {
        let e = Edge::new(w.start(), w.end(), ids[&w.labels]);
        if !edges.contains(&e) {
            edges.push(e);
            edge_walks.push(w);
        }
    }
    let graph = LabeledGraph::new(g.names().to_vec(), ids.len(), edges)?;
    Ok(LiftIndexMap {
        kind: LiftKind::Product,
        parameter: t,
        graph,
        label_sequences: ids.into_keys().collect(),
        edge_walks,
        node_walks: Vec::new(),
        members,
    })
}

fn encode(g: &LabeledGraph, w: &WalkLabel) -> String {
    let mut s = g.name(w.nodes[0]).to_string();
    for (l, v) in w.labels.iter().zip(&w.nodes[1..]) {
        s.push_str(&l.to_string());
        s.push_str(g.name(*v));
    }
    s
}

/// Path-dependent lift over walks of `p` edges.
pub fn lift_p(g: &LabeledGraph, p: usize) -> Result<LiftIndexMap, GraphError> {
    if p == 0 {
        return Err(GraphError::InvalidParameters("lift memory must be at least 1".into()));
    }
    let node_walks = g.all_walks(p, DEFAULT_WALK_CAP)?;
    let index: HashMap<&WalkLabel, usize> = node_walks.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut names: Vec<String> = node_walks.iter().map(|w| encode(g, w)).collect();
    // Multi-character node names can make encodings collide; disambiguate.
    for i in 0..names.len() {
        if names[..i].contains(&names[i]) {
            names[i] = format!("{}#{}", names[i], i);
        }
    }
    let mut edges = Vec::new();
    for (i, w) in node_walks.iter().enumerate() {
        for e in g.out_edges(w.end()) {
            let next = WalkLabel {
                nodes: w.nodes[1..].iter().copied().chain([e.target]).collect(),
                labels: w.labels[1..].iter().copied().chain([e.label]).collect(),
            };
            let j = index[&next];
            edges.push(Edge::new(i, j, e.label));
        }
    }
    let mut members = vec![Vec::new(); g.node_count()];
    for (i, w) in node_walks.iter().enumerate() {
        members[w.end()].push(i);
    }
    let graph = LabeledGraph::new(names, g.mode_count(), edges)?;
    Ok(LiftIndexMap {
        kind: LiftKind::Path,
        parameter: p,
        graph,
        label_sequences: (1..=g.mode_count()).map(|l| vec![l]).collect(),
        edge_walks: Vec::new(),
        node_walks,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::abc;
    use super::*;

    fn lifted_triples(m: &LiftIndexMap) -> Vec<(String, String, Vec<usize>)> {
        m.graph
            .edges()
            .iter()
            .map(|e| {
                (
                    m.graph.name(e.source).to_string(),
                    m.graph.name(e.target).to_string(),
                    m.label_sequences[e.label - 1].clone(),
                )
            })
            .collect()
    }

    #[test]
    fn product_lift_contains_figure_edges() {
        let m = lift_t(&abc(), 2).unwrap();
        let got = lifted_triples(&m);
        let figure = [
            ("a", "a", vec![2, 2]),
            ("a", "b", vec![2, 1]),
            ("a", "c", vec![1, 1]),
            ("b", "b", vec![1, 2]),
            ("b", "a", vec![1, 1]),
            ("c", "c", vec![2, 1]),
            ("c", "a", vec![1, 2]),
        ];
        for (s, d, l) in figure {
            assert!(got.contains(&(s.into(), d.into(), l.clone())), "missing {s}->{d} {l:?}");
        }
        assert!(got.contains(&("c".into(), "b".into(), vec![1, 1])));
        assert_eq!(got.len(), abc().all_walks(2, 100).unwrap().len());
        assert_eq!(m.label_sequences, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn product_lift_of_order_one_is_parent() {
        let g = abc();
        let m = lift_t(&g, 1).unwrap();
        assert_eq!(m.graph, g);
    }

    #[test]
    fn path_lift_nodes_and_overlap_edges() {
        let m = lift_p(&abc(), 1).unwrap();
        let mut names: Vec<&str> = m.graph.names().iter().map(|s| s.as_str()).collect();
        names.sort();
        assert_eq!(names, vec!["a1b", "a2a", "b1c", "c1a", "c2b"]);
        let c1a = m.node_by_name("c1a").unwrap();
        let a1b = m.node_by_name("a1b").unwrap();
        let a2a = m.node_by_name("a2a").unwrap();
        assert!(m.graph.has_edge(c1a, a1b, 1));
        assert!(m.graph.has_edge(c1a, a2a, 2));
        assert!(m.graph.has_edge(a2a, a1b, 1));
        assert!(m.graph.is_strongly_connected());
        assert_eq!(m.members[0], vec![a2a, c1a]);
    }

    #[test]
    fn arbitrary_switching_path_lifts() {
        let g = LabeledGraph::from_named(&["a"], 2, &[("a", "a", 1), ("a", "a", 2)]).unwrap();
        let m1 = lift_p(&g, 1).unwrap();
        assert_eq!((m1.graph.node_count(), m1.graph.edges().len()), (2, 4));
        let m2 = lift_p(&g, 2).unwrap();
        assert_eq!(m2.graph.node_count(), 4);
    }
}
