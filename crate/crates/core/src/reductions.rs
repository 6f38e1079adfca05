//! Polynomial reductions between Hamiltonian-cycle instances and to TSP.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, GraphError, Node, Walk};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("padding length must be at least 2, got {0}")]
    PadTooSmall(usize),
    #[error("node {node} not in graph of {n} nodes")]
    NodeNotFound { node: Node, n: usize },
    #[error("walk is not a Hamiltonian cycle of the padded graph")]
    NotASolution,
    #[error("padding chain is not traversed contiguously")]
    MalformedChain,
    #[error("instance needs at least {min} nodes, got {n}")]
    SizeTooSmall { n: usize, min: usize },
    #[error("malformed weight matrix: {0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph grown by replacing node `removed` of the original with a chain.
///
/// Remaining original nodes are relabelled to `0..n-1` in order; the chain
/// `w1 .. w(k+1)` occupies the labels `n-1 .. n+k` and both of its ends are
/// joined to every former neighbor of the removed node.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedInstance {
    pub graph: Graph,
    pub original_nodes: usize,
    pub removed: Node,
    pub k: usize,
}

impl PaddedInstance {
    /// Padded label of original node `v`, or `None` for the removed node.
    pub fn relabel(&self, v: Node) -> Option<Node> {
        match v.cmp(&self.removed) {
            std::cmp::Ordering::Less => Some(v),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(v - 1),
        }
    }

    /// Labels of the chain nodes in chain order.
    pub fn chain(&self) -> std::ops::Range<Node> {
        let first = self.original_nodes - 1;
        first..first + self.k + 1
    }

    fn original_label(&self, v: Node) -> Node {
        if v >= self.removed {
            v + 1
        } else {
            v
        }
    }
}

/// Pads `g` with a chain of `k + 1` nodes in place of `v`. The result is
/// Hamiltonian exactly when `g` is.
pub fn pad_hcp(g: &Graph, v: Node, k: usize) -> Result<PaddedInstance, ReductionError> {
    if k < 2 {
        return Err(ReductionError::PadTooSmall(k));
    }
    let n = g.node_count();
    if v >= n {
        return Err(ReductionError::NodeNotFound { node: v, n });
    }
    let padded = PaddedInstance {
        graph: Graph::empty(1)?,
        original_nodes: n,
        removed: v,
        k,
    };
    let mut edges = Vec::with_capacity(g.edge_count() + k + 2 * g.degree(v));
    for &(a, b) in g.edges() {
        if let (Some(a), Some(b)) = (padded.relabel(a), padded.relabel(b)) {
            edges.push((a, b));
        }
    }
    let chain: Vec<Node> = padded.chain().collect();
    for pair in chain.windows(2) {
        edges.push((pair[0], pair[1]));
    }
    let (w1, wk) = (chain[0], chain[k]);
    for &u in g.neighbors(v) {
        let u = padded.relabel(u).expect("neighbor differs from v");
        edges.push((u, w1));
        edges.push((u, wk));
    }
    Ok(PaddedInstance {
        graph: Graph::new(n + k, &edges)?,
        ..padded
    })
}

/// Maps a Hamiltonian cycle of the padded graph back to one of the original
/// graph by collapsing the chain into the removed node.
pub fn unpad_solution(padded: &PaddedInstance, walk: &Walk, original: &Graph) -> Result<Walk, ReductionError> {
    if !crate::graph::is_hamiltonian_cycle(&padded.graph, walk) {
        return Err(ReductionError::NotASolution);
    }
    let chain = padded.chain();
    let cycle = &walk.nodes()[..walk.len() - 1];
    let len = cycle.len();
    // Rotate so the cycle starts at the first chain node encountered.
    let start = (0..len)
        .find(|&i| chain.contains(&cycle[i]) && !chain.contains(&cycle[(i + len - 1) % len]))
        .ok_or(ReductionError::MalformedChain)?;
    let rotated: Vec<Node> = (0..len).map(|i| cycle[(start + i) % len]).collect();
    let chain_len = padded.k + 1;
    if !rotated[..chain_len].iter().all(|v| chain.contains(v)) {
        return Err(ReductionError::MalformedChain);
    }
    let mut nodes = Vec::with_capacity(padded.original_nodes + 1);
    nodes.push(padded.removed);
    nodes.extend(rotated[chain_len..].iter().map(|&v| padded.original_label(v)));
    nodes.push(padded.removed);
    Walk::new(original, nodes).map_err(|_| ReductionError::MalformedChain)
}

/// Symmetric complete graph with non-negative edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCompleteGraph {
    weights: Vec<Vec<f64>>,
}

pub const EDGE_WEIGHT: f64 = 0.5;
pub const NON_EDGE_WEIGHT: f64 = 1.0;

impl WeightedCompleteGraph {
    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, u: Node, v: Node) -> f64 {
        self.weights[u][v]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Total weight of a closed tour given as `v0 .. v0`.
    pub fn tour_length(&self, tour: &[Node]) -> f64 {
        tour.windows(2).map(|p| self.weights[p[0]][p[1]]).sum()
    }

    /// Tour length that certifies a Hamiltonian cycle in the source graph.
    pub fn hamiltonian_threshold(&self) -> f64 {
        self.node_count() as f64 * EDGE_WEIGHT
    }

    /// `n` on the first line, then the upper triangle row by row.
    pub fn serialize(&self) -> String {
        let n = self.node_count();
        let mut out = format!("{n}\n");
        for i in 0..n {
            let row: Vec<String> = (i + 1..n).map(|j| self.weights[i][j].to_string()).collect();
            if !row.is_empty() {
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| ReductionError::Parse("missing size".into()))?
            .parse()
            .map_err(|e| ReductionError::Parse(format!("size: {e}")))?;
        let mut weights = vec![vec![0.0; n]; n];
        for (i, j) in (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))) {
            let tok = tokens
                .next()
                .ok_or_else(|| ReductionError::Parse(format!("missing weight ({i}, {j})")))?;
            let w: f64 = tok
                .parse()
                .map_err(|e| ReductionError::Parse(format!("weight ({i}, {j}): {e}")))?;
            if !(w >= 0.0 && w.is_finite()) {
                return Err(ReductionError::Parse(format!("weight ({i}, {j}) = {w}")));
            }
            weights[i][j] = w;
            weights[j][i] = w;
        }
        if tokens.next().is_some() {
            return Err(ReductionError::Parse("trailing data".into()));
        }
        Ok(WeightedCompleteGraph { weights })
    }
}

/// Complete graph weighting edges of `g` by 1/2 and non-edges by 1; `g`
/// has a Hamiltonian cycle iff the optimal tour has length `n / 2`.
pub fn hcp_to_tsp(g: &Graph) -> Result<WeightedCompleteGraph, ReductionError> {
    let n = g.node_count();
    if n < 3 {
        return Err(ReductionError::SizeTooSmall { n, min: 3 });
    }
    let weights = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, g.has_edge(i, j)) {
                    (true, _) => 0.0,
                    (false, true) => EDGE_WEIGHT,
                    (false, false) => NON_EDGE_WEIGHT,
                })
                .collect()
        })
        .collect();
    Ok(WeightedCompleteGraph { weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_hamiltonian_cycle;

    #[test]
    fn padding_a_cycle() {
        let c5 = Graph::cycle(5).unwrap();
        let p = pad_hcp(&c5, 2, 3).unwrap();
        assert_eq!(p.graph.node_count(), 8);
        assert_eq!(p.chain(), 4..8);
        // 0-1, 2-3 survive; chain 4-5-6-7; ends joined to 1 and 2.
        for (a, b) in [(0, 1), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (1, 4), (1, 7), (2, 4), (2, 7)] {
            assert!(p.graph.has_edge(a, b), "missing {a}-{b}");
        }
        assert_eq!(p.graph.edge_count(), 10);
    }

    #[test]
    fn padding_validation() {
        let c5 = Graph::cycle(5).unwrap();
        assert_eq!(pad_hcp(&c5, 0, 1), Err(ReductionError::PadTooSmall(1)));
        assert_eq!(pad_hcp(&c5, 5, 2), Err(ReductionError::NodeNotFound { node: 5, n: 5 }));
    }

    #[test]
    fn unpad_round_trip() {
        let c5 = Graph::cycle(5).unwrap();
        let p = pad_hcp(&c5, 2, 2).unwrap();
        let w = crate::solvers::exact_hcp(&p.graph, 10_000).unwrap().unwrap();
        let back = unpad_solution(&p, &w, &c5).unwrap();
        assert!(is_hamiltonian_cycle(&c5, &back));
        assert_eq!(back.first(), Some(2));
        assert_eq!(unpad_solution(&p, &Walk::empty(), &c5), Err(ReductionError::NotASolution));
    }

    #[test]
    fn tsp_weights_and_format() {
        let p3 = Graph::path(3).unwrap();
        let t = hcp_to_tsp(&p3).unwrap();
        assert_eq!(t.weight(0, 1), 0.5);
        assert_eq!(t.weight(0, 2), 1.0);
        assert_eq!(t.weight(1, 1), 0.0);
        assert_eq!(t.serialize(), "3\n0.5 1\n0.5\n");
        assert_eq!(WeightedCompleteGraph::parse(&t.serialize()).unwrap(), t);
        assert_eq!(hcp_to_tsp(&Graph::path(2).unwrap()), Err(ReductionError::SizeTooSmall { n: 2, min: 3 }));
        assert!(WeightedCompleteGraph::parse("3\n0.5 1\n").is_err());
        assert!(WeightedCompleteGraph::parse("3\n0.5 1\n0.5 7\n").is_err());
    }

    #[test]
    fn tour_length_of_cycle_is_threshold() {
        let c6 = Graph::cycle(6).unwrap();
        let t = hcp_to_tsp(&c6).unwrap();
        assert_eq!(t.tour_length(&[0, 1, 2, 3, 4, 5, 0]), t.hamiltonian_threshold());
        assert_eq!(t.tour_length(&[0, 2, 1, 3, 4, 5, 0]), 4.0);
    }
}
