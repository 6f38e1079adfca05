//! Simple undirected graphs, walks on them, Hamiltonian-cycle checks and the
//! one-hot walk encoding consumed by the network.
//!
//! Nodes are dense identifiers `0..n`. A [`Graph`] is immutable once built;
//! its adjacency lists are sorted and symmetric.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node identifier.
pub type Node = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(Node),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: Node, n: usize },
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(Node, Node),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Simple undirected graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Node, Node)>,
    adj: Vec<Vec<Node>>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicates and reversed pairs are
    /// merged; the stored edge list is canonical (`u < v`, sorted).
    pub fn new(n: usize, edge_list: &[(Node, Node)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edge_list {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, edges, adj })
    }

    /// Graph with no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::new(n, &[])
    }

    /// Cycle `0 1 .. n-1 0`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// Path `0 1 .. n-1`.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, &edges)
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::new(leaves + 1, &edges)
    }

    /// The Petersen graph (10 nodes, 3-regular, not Hamiltonian).
    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::new(10, &edges).expect("petersen graph is well formed")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, `u < v`, lexicographically sorted.
    pub fn edges(&self) -> &[(Node, Node)] {
        &self.edges
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: Node) -> &[Node] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Node) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Node, v: Node) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// First node with no neighbors, if any.
    pub fn isolated_node(&self) -> Option<Node> {
        (0..self.n).find(|&v| self.adj[v].is_empty())
    }

    pub fn nodes(&self) -> std::ops::Range<Node> {
        0..self.n
    }

    /// Parses the plain-text format: a header line `n m` followed by `m`
    /// lines `u v`. Lines starting with `#` and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let head = parse_pair(hline, header)?;
        let (n, m) = head;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            if edges.len() == m {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("more than the declared {m} edges"),
                });
            }
            edges.push(parse_pair(line, l)?);
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: text.lines().count(),
                msg: format!("expected {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, &edges)
    }

    /// Canonical text form: header then sorted `u v` lines.
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Graphviz rendering; edges of `cycle` get a bold red style.
    pub fn to_dot(&self, cycle: Option<&Walk>) -> String {
        let mut marked = BTreeSet::new();
        if let Some(w) = cycle {
            for pair in w.nodes().windows(2) {
                marked.insert((pair[0].min(pair[1]), pair[0].max(pair[1])));
            }
        }
        let mut out = String::from("graph G {\n");
        for v in 0..self.n {
            out.push_str(&format!("  {v};\n"));
        }
        for e @ (u, v) in &self.edges {
            if marked.contains(e) {
                out.push_str(&format!("  {u} -- {v} [color=red, penwidth=2.5];\n"));
            } else {
                out.push_str(&format!("  {u} -- {v};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn parse_pair(line: usize, l: &str) -> Result<(usize, usize), GraphError> {
    let err = |msg: &str| GraphError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut it = l.split_whitespace();
    let a = it.next().ok_or_else(|| err("expected two integers"))?;
    let b = it.next().ok_or_else(|| err("expected two integers"))?;
    if it.next().is_some() {
        return Err(err("trailing tokens"));
    }
    let a = a.parse().map_err(|_| err("invalid integer"))?;
    let b = b.parse().map_err(|_| err("invalid integer"))?;
    Ok((a, b))
}

/// Sequence of nodes in which successive nodes are adjacent.
///
/// Adjacency is validated when the walk is built against a graph, so code
/// holding a `Walk` never re-checks it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Walk {
    nodes: Vec<Node>,
}

impl Walk {
    pub fn new(g: &Graph, nodes: Vec<Node>) -> Result<Self, GraphError> {
        for &v in &nodes {
            if v >= g.node_count() {
                return Err(GraphError::NodeOutOfRange {
                    node: v,
                    n: g.node_count(),
                });
            }
        }
        for pair in nodes.windows(2) {
            if !g.has_edge(pair[0], pair[1]) {
                return Err(GraphError::NotAdjacent(pair[0], pair[1]));
            }
        }
        Ok(Walk { nodes })
    }

    pub fn empty() -> Self {
        Walk::default()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> Option<Node> {
        self.nodes.first().copied()
    }

    pub fn last(&self) -> Option<Node> {
        self.nodes.last().copied()
    }

    pub fn contains(&self, v: Node) -> bool {
        self.nodes.contains(&v)
    }

    /// Appends `v`, checking it is adjacent to the current last node.
    pub fn push(&mut self, g: &Graph, v: Node) -> Result<(), GraphError> {
        if v >= g.node_count() {
            return Err(GraphError::NodeOutOfRange {
                node: v,
                n: g.node_count(),
            });
        }
        if let Some(last) = self.last() {
            if !g.has_edge(last, v) {
                return Err(GraphError::NotAdjacent(last, v));
            }
        }
        self.nodes.push(v);
        Ok(())
    }

    /// Prefix of the first `len` nodes.
    pub fn prefix(&self, len: usize) -> Walk {
        Walk {
            nodes: self.nodes[..len.min(self.nodes.len())].to_vec(),
        }
    }

    pub fn into_nodes(self) -> Vec<Node> {
        self.nodes
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.nodes {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// True iff `w` is `v1 .. vn v1` with `v1 .. vn` pairwise distinct.
pub fn is_hamiltonian_cycle(g: &Graph, w: &Walk) -> bool {
    let n = g.node_count();
    let nodes = w.nodes();
    if nodes.len() != n + 1 || nodes[0] != nodes[n] {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in &nodes[..n] {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    // Walk::new guarantees adjacency, but a cycle needs n >= 3 to be simple.
    n >= 3
}

/// Column of the walk encoding.
pub const START: usize = 0;
pub const END: usize = 1;
pub const VISITED: usize = 2;

/// `n x 3` zero-one walk representation: start flag, end flag, visited flag.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkEncoding {
    n: usize,
    data: Vec<f64>,
}

impl WalkEncoding {
    pub const WIDTH: usize = 3;

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, node: Node, col: usize) -> f64 {
        self.data[node * Self::WIDTH + col]
    }

    pub fn row(&self, node: Node) -> [f64; 3] {
        let r = &self.data[node * 3..node * 3 + 3];
        [r[0], r[1], r[2]]
    }

    /// Row-major `n x 3` data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Node carrying the end flag; `None` for the empty walk.
    pub fn last_node(&self) -> Option<Node> {
        (0..self.n).find(|&v| self.get(v, END) == 1.0)
    }
}

/// Encodes a walk; the empty walk maps to the zero matrix.
pub fn encode_walk(g: &Graph, w: &Walk) -> WalkEncoding {
    let n = g.node_count();
    let mut data = vec![0.0; n * 3];
    if let (Some(first), Some(last)) = (w.first(), w.last()) {
        data[first * 3 + START] = 1.0;
        data[last * 3 + END] = 1.0;
        for &v in w.nodes() {
            data[v * 3 + VISITED] = 1.0;
        }
    }
    WalkEncoding { n, data }
}

/// One record of a JSON-lines dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<[Node; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<Node>>,
}

impl GraphRecord {
    pub fn from_graph(g: &Graph, cycle: Option<&Walk>) -> Self {
        GraphRecord {
            n: g.node_count(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            cycle: cycle.map(|w| w.nodes().to_vec()),
        }
    }

    pub fn to_graph(&self) -> Result<(Graph, Option<Walk>), GraphError> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = Graph::new(self.n, &edges)?;
        let cycle = match &self.cycle {
            Some(c) => Some(Walk::new(&g, c.clone())?),
            None => None,
        };
        Ok((g, cycle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triangle() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.nodes().all(|v| g.degree(v) == 2));
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(Graph::new(2, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
    }

    #[test]
    fn out_of_range_rejected() {
        assert_eq!(
            Graph::new(2, &[(0, 5)]),
            Err(GraphError::NodeOutOfRange { node: 5, n: 2 })
        );
    }

    #[test]
    fn duplicates_merged() {
        let g = Graph::new(4, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.degree(3), 0);
    }

    #[test]
    fn hamiltonian_check() {
        let c4 = Graph::cycle(4).unwrap();
        let closed = Walk::new(&c4, vec![0, 1, 2, 3, 0]).unwrap();
        let open = Walk::new(&c4, vec![0, 1, 2, 3]).unwrap();
        assert!(is_hamiltonian_cycle(&c4, &closed));
        assert!(!is_hamiltonian_cycle(&c4, &open));
        let k4 = Graph::complete(4).unwrap();
        let short = Walk::new(&k4, vec![0, 1, 2, 0]).unwrap();
        assert!(!is_hamiltonian_cycle(&k4, &short));
        let repeat = Walk::new(&k4, vec![0, 1, 0, 1, 0]).unwrap();
        assert!(!is_hamiltonian_cycle(&k4, &repeat));
    }

    #[test]
    fn walk_rejects_non_adjacent() {
        let p = Graph::path(4).unwrap();
        assert_eq!(
            Walk::new(&p, vec![0, 2]),
            Err(GraphError::NotAdjacent(0, 2))
        );
    }

    #[test]
    fn encode_single_node() {
        let g = Graph::complete(4).unwrap();
        let x = encode_walk(&g, &Walk::new(&g, vec![2]).unwrap());
        for v in 0..4 {
            let want = if v == 2 { [1.0, 1.0, 1.0] } else { [0.0; 3] };
            assert_eq!(x.row(v), want);
        }
        assert_eq!(x.last_node(), Some(2));
    }

    #[test]
    fn encode_empty_is_zero() {
        let g = Graph::complete(4).unwrap();
        let x = encode_walk(&g, &Walk::empty());
        assert!(x.as_slice().iter().all(|&e| e == 0.0));
        assert_eq!(x.as_slice().len(), 12);
        assert_eq!(x.last_node(), None);
    }

    #[test]
    fn encode_two_nodes() {
        let g = Graph::complete(4).unwrap();
        let x = encode_walk(&g, &Walk::new(&g, vec![0, 3]).unwrap());
        assert_eq!(x.row(0), [1.0, 0.0, 1.0]);
        assert_eq!(x.row(3), [0.0, 1.0, 1.0]);
        assert_eq!(x.row(1), [0.0; 3]);
    }

    #[test]
    fn parse_triangle() {
        let g = Graph::parse("3 3\n0 1\n1 2\n0 2\n").unwrap();
        assert_eq!(g, Graph::complete(3).unwrap());
    }

    #[test]
    fn parse_comments_and_range() {
        let g = Graph::parse("# a comment\n3 1\n\n# more\n2 0\n").unwrap();
        assert_eq!(g.edges(), &[(0, 2)]);
        assert_eq!(
            Graph::parse("2 1\n0 5\n"),
            Err(GraphError::NodeOutOfRange { node: 5, n: 2 })
        );
    }

    #[test]
    fn parse_errors_carry_line() {
        match Graph::parse("3 2\n0 1\nx 2\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Graph::parse("3 2\n0 1\n"),
            Err(GraphError::Parse { .. })
        ));
    }

    #[test]
    fn canonical_serialization() {
        let g = Graph::parse("4 3\n3 2\n1 0\n2 1\n").unwrap();
        assert_eq!(g.serialize(), "4 3\n0 1\n1 2\n2 3\n");
    }

    #[test]
    fn dot_marks_cycle_edges() {
        let g = Graph::cycle(3).unwrap();
        let w = Walk::new(&g, vec![0, 1]).unwrap();
        let dot = g.to_dot(Some(&w));
        assert!(dot.contains("0 -- 1 [color=red"));
        assert!(dot.contains("1 -- 2;"));
    }

    #[test]
    fn record_round_trip() {
        let g = Graph::cycle(5).unwrap();
        let w = Walk::new(&g, vec![0, 1, 2, 3, 4, 0]).unwrap();
        let rec = GraphRecord::from_graph(&g, Some(&w));
        let line = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            line,
            r#"{"n":5,"edges":[[0,1],[0,4],[1,2],[2,3],[3,4]],"cycle":[0,1,2,3,4,0]}"#
        );
        let back: GraphRecord = serde_json::from_str(&line).unwrap();
        let (g2, w2) = back.to_graph().unwrap();
        assert_eq!(g2, g);
        assert_eq!(w2, Some(w));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..15).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..40).prop_map(move |pairs| {
                let edges: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Graph::new(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn degree_sum_is_twice_edges(g in arb_graph()) {
            let total: usize = g.nodes().map(|v| g.degree(v)).sum();
            prop_assert_eq!(total, 2 * g.edge_count());
            for v in g.nodes() {
                for &u in g.neighbors(v) {
                    prop_assert!(g.neighbors(u).contains(&v));
                }
            }
        }

        #[test]
        fn text_round_trip(g in arb_graph()) {
            let text = g.serialize();
            let back = Graph::parse(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(back.serialize(), text);
        }

        #[test]
        fn visited_column_counts_distinct(g in arb_graph(), steps in proptest::collection::vec(0usize..100, 0..20)) {
            let mut w = Walk::empty();
            if !steps.is_empty() {
                w.push(&g, steps[0] % g.node_count()).unwrap();
                for s in &steps[1..] {
                    let nb = g.neighbors(w.last().unwrap());
                    if nb.is_empty() { break; }
                    w.push(&g, nb[s % nb.len()]).unwrap();
                }
            }
            let x = encode_walk(&g, &w);
            let visited: f64 = g.nodes().map(|v| x.get(v, VISITED)).sum();
            let distinct: BTreeSet<_> = w.nodes().iter().collect();
            prop_assert_eq!(visited as usize, distinct.len());
            let starts: f64 = g.nodes().map(|v| x.get(v, START)).sum();
            prop_assert!(starts <= 1.0);
        }
    }
}
