#![allow(dead_code)]

use hamlab::graph::{Graph, Node};

/// Hamiltonian cycle by trying every ordering of the nodes after node 0.
pub fn brute_force_hamiltonian(g: &Graph) -> Option<Vec<Node>> {
    let n = g.node_count();
    if n < 3 {
        return None;
    }
    let mut rest: Vec<Node> = (1..n).collect();
    loop {
        let closes = g.has_edge(0, rest[0]) && g.has_edge(rest[n - 2], 0);
        if closes && rest.windows(2).all(|p| g.has_edge(p[0], p[1])) {
            let mut cycle = vec![0];
            cycle.extend_from_slice(&rest);
            cycle.push(0);
            return Some(cycle);
        }
        if !next_permutation(&mut rest) {
            return None;
        }
    }
}

pub fn next_permutation(xs: &mut [Node]) -> bool {
    let Some(i) = (1..xs.len()).rev().find(|&i| xs[i - 1] < xs[i]) else {
        return false;
    };
    let j = (i..xs.len()).rev().find(|&j| xs[j] > xs[i - 1]).expect("successor exists");
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}
