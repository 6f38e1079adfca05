//! Critical-regime and planted-cycle datasets, with a look at how often the
//! critical generator actually yields Hamiltonian graphs.
//!
//! ```text
//! cargo run --release --example generate_dataset -- [n] [count] [out.jsonl]
//! ```

use std::fs::File;
use std::io::BufWriter;

use hamlab::gen::{critical_p, Dataset, GeneratorParams};
use hamlab::solvers::exact_hcp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(25), |s| s.parse())?;
    let count: usize = args.get(1).map_or(Ok(200), |s| s.parse())?;

    for p_hamilton in [0.5, 0.8, 0.95] {
        let dataset = Dataset::generate(GeneratorParams::Critical { p_hamilton }, n, count, 1)?;
        let mut hamiltonian = 0;
        for record in &dataset.records {
            let (g, _) = record.to_graph()?;
            hamiltonian += usize::from(exact_hcp(&g, 50_000_000)?.is_some());
        }
        println!(
            "p_H {p_hamilton:.2}: edge probability {:.4}, {hamiltonian}/{count} Hamiltonian",
            critical_p(n, p_hamilton)?
        );
    }

    let planted = Dataset::generate(GeneratorParams::Planted { p_edge: 0.125 }, n, count, 2)?;
    let edges: usize = planted.records.iter().map(|r| r.edges.len()).sum();
    println!("planted: {count} graphs, mean {:.1} edges", edges as f64 / count as f64);

    if let Some(path) = args.get(2) {
        planted.write_jsonl(BufWriter::new(File::create(path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
