//! Greedy and beam decoding with a trained checkpoint, side by side with
//! the least-degree heuristic and the exact solver.
//!
//! ```text
//! cargo run --release --example decode -- [checkpoint] [n] [count]
//! ```

use std::path::Path;

use hamlab::gen::gen_critical;
use hamlab::model::load_checkpoint;
use hamlab::rng::mix;
use hamlab::solvers::{beam_decode, exact_hcp, greedy_decode, least_degree_first, GnnScorer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let default = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/model-n25.json");
    let path = args.first().map_or(default, String::as_str);
    let n: usize = args.get(1).map_or(Ok(25), |s| s.parse())?;
    let count: u64 = args.get(2).map_or(Ok(100), |s| s.parse())?;

    let (model, meta) = load_checkpoint(Path::new(path))?;
    println!("checkpoint: {} updates, seed {}", meta.updates, meta.seed);
    let scorer = GnnScorer::new(&model);

    let mut solved = [0usize; 5];
    for i in 0..count {
        let seed = mix(7, &[i]);
        let g = gen_critical(n, 0.8, seed)?;
        let results = [
            greedy_decode(&g, &scorer, seed)?.is_solution,
            beam_decode(&g, &scorer, 3, seed)?.is_solution,
            beam_decode(&g, &scorer, 5, seed)?.is_solution,
            least_degree_first(&g).is_solution,
            exact_hcp(&g, 50_000_000)?.is_some(),
        ];
        for (s, r) in solved.iter_mut().zip(results) {
            *s += usize::from(r);
        }
        if i == 0 {
            let walk = greedy_decode(&g, &scorer, seed)?.walk;
            println!("first instance, greedy walk: {walk}");
        }
    }
    for (name, s) in ["greedy", "beam 3", "beam 5", "least degree", "exact"].iter().zip(solved) {
        println!("{name:>12}: {s}/{count}");
    }
    Ok(())
}
