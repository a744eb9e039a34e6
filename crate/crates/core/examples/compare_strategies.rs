//! Trains Concat, Concat+Linear and Multiple-LSTMs taggers on the same
//! synthetic data and prints their F1 as a TSV table.
//!
//! Usage: `cargo run --release --example compare_strategies [sentences] [hidden]`

use hanfuse::experiments::{compare_strategies, strategy_table, ExperimentConfig};
use hanfuse::Tables;

fn main() -> hanfuse::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let sentences: usize = args.next().map_or(300, |s| s.parse().expect("sentence count"));
    let hidden: usize = args.next().map_or(32, |s| s.parse().expect("hidden size"));
    let config = ExperimentConfig {
        sentences,
        dev: sentences / 6,
        test: sentences / 6,
        hidden,
        ..ExperimentConfig::default()
    };
    let results = compare_strategies(&Tables::bundled(), &config, 7)?;
    print!("{}", strategy_table(&results));
    Ok(())
}
