//! Semantic-only versus fused embeddings on a substituted synthetic test set.
//!
//! Usage: `cargo run --release --example robustness [seeds] [hidden]`

use std::time::Instant;

use hanfuse::experiments::{robustness_trial, robustness_tsv, ExperimentConfig};
use hanfuse::Tables;

fn main() -> hanfuse::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(5, |s| s.parse().expect("seed count"));
    let hidden: usize = args.next().map_or(100, |s| s.parse().expect("hidden size"));
    let tables = Tables::bundled();
    let config = ExperimentConfig {
        hidden,
        ..ExperimentConfig::default()
    };
    let mut trials = Vec::new();
    for seed in 0..seeds {
        let start = Instant::now();
        let trial = robustness_trial(&tables, &config, seed)?;
        eprintln!(
            "seed {seed}: {:.1}s, epochs {} / {}",
            start.elapsed().as_secs_f64(),
            trial.semantic_epochs,
            trial.fused_epochs
        );
        trials.push(trial);
    }
    print!("{}", robustness_tsv(&trials));
    let wins = trials.iter().filter(|t| t.fused_recall_higher()).count();
    println!("fused recall higher in {wins} of {seeds} seeds");
    Ok(())
}
