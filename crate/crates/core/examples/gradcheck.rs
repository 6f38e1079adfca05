//! Finite-difference check of the training gradients.
//!
//! ```text
//! cargo run --release --example gradcheck -- [seed] [coordinates]
//! ```

use hamlab::model::{gradcheck, GradcheckConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = GradcheckConfig::default();
    if let Some(s) = args.first() {
        cfg.seed = s.parse()?;
    }
    if let Some(c) = args.get(1) {
        cfg.coordinates = c.parse()?;
    }
    let report = gradcheck(&cfg)?;
    println!("loss {:.6} on an {}-node graph", report.loss, cfg.n);
    let mut worst: Vec<_> = report.checks.iter().collect();
    worst.sort_by(|a, b| b.rel_error.total_cmp(&a.rel_error));
    for c in worst.iter().take(5) {
        println!(
            "{:<28} [{:>4}]  analytic {:+.8e}  numeric {:+.8e}  rel {:.2e}",
            c.tensor, c.index, c.analytic, c.numeric, c.rel_error
        );
    }
    println!(
        "checked {} coordinates: max relative error {:.3e}, max absolute error {:.3e}",
        report.checks.len(),
        report.max_rel_error,
        report.max_abs_error
    );
    Ok(())
}
