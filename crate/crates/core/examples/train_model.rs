//! Trains the network on planted-cycle graphs and writes a checkpoint.
//!
//! ```text
//! cargo run --release --example train_model -- [updates] [seed] [out.json]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use hamlab::model::{save_checkpoint, train_with_progress, CheckpointMeta, TrainConfig, TrainEvent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = TrainConfig::default();
    if let Some(u) = args.first() {
        cfg.max_updates = u.parse()?;
        cfg.val_every = cfg.val_every.min(cfg.max_updates.max(1));
    }
    if let Some(s) = args.get(1) {
        cfg.seed = s.parse()?;
    }
    let out = PathBuf::from(args.get(2).map_or("model.json", String::as_str));

    let started = Instant::now();
    let report = train_with_progress(&cfg, |event| match event {
        TrainEvent::Update { update, loss } if update % 100 == 0 => {
            eprintln!("update {update:>6}  loss {loss:.4}  {:.0}s", started.elapsed().as_secs_f64());
        }
        TrainEvent::Validation { update, score, best } => {
            eprintln!("update {update:>6}  validation {score:.3}{}", if *best { "  (best)" } else { "" });
        }
        _ => {}
    })?;

    let meta = CheckpointMeta {
        seed: cfg.seed,
        updates: cfg.max_updates,
        val_score: report.best_score,
        parameter_count: report.model.params.parameter_count(),
        train_size: Some(cfg.n),
        p_edge: Some(cfg.p_edge),
        batch: Some(cfg.batch),
        lr: Some(cfg.lr),
    };
    save_checkpoint(&out, &report.model, &meta)?;
    println!(
        "best validation {:.3} at update {}; wrote {}",
        report.best_score.unwrap_or(f64::NAN),
        report.best_update,
        out.display()
    );
    Ok(())
}
