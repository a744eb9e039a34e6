//! The per-character matrices produced by each fusion strategy.

use hanfuse::fusion::{Embedder, FeatureMask, FusionStrategy};
use hanfuse::{Mode, Tables};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hanfuse::Result<()> {
    let tables = Tables::bundled();
    let sentence: Vec<char> = "他想去大浦桥".chars().collect();
    let embedder = Embedder::new(&tables, Mode::Strict);
    let d = tables.semantic_dim();

    let concat = embedder.embed(&sentence, &FusionStrategy::Concat)?;
    let m = concat.matrix.as_ref().expect("concat matrix");
    println!("concat: {} x {} ({} semantic + 25 glyph + 39 phonetic)", m.rows(), m.cols(), d);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let linear = FusionStrategy::concat_linear(d, 48, &mut rng);
    let mixed = embedder.embed(&sentence, &linear)?;
    let m = mixed.matrix.as_ref().expect("linear matrix");
    println!("concat-linear: {} x {}", m.rows(), m.cols());

    let branches = embedder.embed(&sentence, &FusionStrategy::MultiBranch)?;
    let shapes: Vec<String> = branches
        .parts
        .blocks()
        .iter()
        .map(|b| format!("{}x{}", b.rows(), b.cols()))
        .collect();
    println!("multi-lstm blocks: {}", shapes.join(", "));

    let masked = embedder.with_mask(FeatureMask::SEMANTIC_ONLY).parts(&sentence)?;
    let glyph_sum: f64 = masked.glyph.as_slice().iter().sum();
    println!("semantic-only mask leaves glyph block sum {glyph_sum}");
    Ok(())
}
