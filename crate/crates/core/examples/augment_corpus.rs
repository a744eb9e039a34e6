//! Character substitution inside entity spans.
//!
//! Usage: `cargo run --example augment_corpus [p] [seed]`

use hanfuse::augment::{records_to_tsv, substitute_corpus, AugmentConfig};
use hanfuse::synth::Synthesizer;
use hanfuse::Tables;

fn main() -> hanfuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(0.5, |s| s.parse().expect("probability"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let tables = Tables::bundled();
    let corpus = Synthesizer::bundled().generate(8, 1);
    let config = AugmentConfig {
        probability: p,
        seed,
        emit_pairs: true,
        ..AugmentConfig::default()
    };
    let out = substitute_corpus(&corpus, &tables.inventory()?, &tables, &config)?;
    for s in out.corpus.iter() {
        println!("{}", s.text());
    }
    println!();
    print!("{}", records_to_tsv(&out.records));
    println!("{:?}", out.stats);
    Ok(())
}
