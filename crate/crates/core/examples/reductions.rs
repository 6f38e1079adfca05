//! Padding a graph with a chain and reducing it to TSP, checked with the
//! exact and brute-force solvers.

use hamlab::graph::{Graph, Walk};
use hamlab::reductions::{hcp_to_tsp, pad_hcp, unpad_solution};
use hamlab::solvers::{brute_force_tsp, exact_hcp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let house = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (3, 4)])?;
    for (name, g) in [("house", house), ("petersen", Graph::petersen())] {
        let padded = pad_hcp(&g, 0, 3)?;
        let original = exact_hcp(&g, 1_000_000)?;
        let lifted = exact_hcp(&padded.graph, 1_000_000)?;
        println!(
            "{name}: {} nodes -> {} nodes, Hamiltonian {} -> {}",
            g.node_count(),
            padded.graph.node_count(),
            original.is_some(),
            lifted.is_some()
        );
        if let Some(w) = &lifted {
            println!("  padded cycle {w}, back on the original: {}", unpad_solution(&padded, w, &g)?);
        }

        let tsp = hcp_to_tsp(&g)?;
        let (tour, length) = brute_force_tsp(tsp.weights())?;
        let tour = Walk::new(&Graph::complete(g.node_count())?, tour)?;
        println!(
            "  optimal tour {tour} has length {length}; a Hamiltonian cycle would give {}",
            tsp.hamiltonian_threshold()
        );
    }
    Ok(())
}
