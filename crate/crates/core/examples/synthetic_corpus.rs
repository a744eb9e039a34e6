//! Prints a template-generated NER corpus in CoNLL format.
//!
//! Usage: `cargo run --example synthetic_corpus [sentences] [seed]`

use hanfuse::synth::Synthesizer;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(20, |s| s.parse().expect("sentence count"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let synth = Synthesizer::bundled();
    eprintln!(
        "{} entities of types {:?}",
        synth.entities().len(),
        synth.entity_types()
    );
    print!("{}", synth.generate(n, seed).to_conll());
}
